#pragma once

// Forward stepwise selection with a significance-test stopping rule.
//
// Starting from the empty model, every step computes the test statistic
// W_jS for each unselected column j against the current model S, keeps the
// columns whose statistic clears the policy threshold, and adds the one with
// the largest W (lowest index on exact ties). The loop stops when no column
// passes, when max_steps is reached, or when the working model fits exactly.
//
// Columns are always rescaled internally to unit empirical second moment;
// with include_intercept the outcome and columns are demeaned first and the
// intercept is never a candidate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fsel/numcore.hpp"
#include "fsel/robustreg.hpp"

namespace fsel {

enum class Policy {
    ForwardI,    // c_tau * tau * z(1 - alpha / p)
    ForwardII,   // z(1 - alpha / p)
    ForwardIII,  // z(1 - alpha / (p - |S|))
};

inline const char* to_string(Policy policy) {
    switch (policy) {
    case Policy::ForwardI: return "Forward I";
    case Policy::ForwardII: return "Forward II";
    case Policy::ForwardIII: return "Forward III";
    }
    return "?";
}

struct SelectionConfig {
    double alpha = 0.05;
    double c_tau = 1.1;
    Policy policy = Policy::ForwardI;
    SeKind se_kind = SeKind::White;
    Index max_steps = -1;  // negative: min(n - 2, p), one less with an intercept
    bool include_intercept = false;
    TauForm tau_form = TauForm::SelfNormalized;
    ClassicalTau classical_tau = ClassicalTau::Robust;
};

enum class TerminalReason { NoCandidate, MaxSteps, PerfectFit };

inline const char* to_string(TerminalReason reason) {
    switch (reason) {
    case TerminalReason::NoCandidate: return "no-candidate";
    case TerminalReason::MaxSteps: return "max-steps";
    case TerminalReason::PerfectFit: return "perfect-fit";
    }
    return "?";
}

struct SelectionStep {
    Index index = -1;
    double W = 0.0;
    double threshold = 0.0;
    double tau = 1.0;
    Index passing = 0;  // candidates with W >= their threshold
    Index skipped = 0;  // candidates numerically collinear with the current model
    double rss = 0.0;   // working-model RSS after the step (demeaned, standardized scale)
};

struct SelectionTrace {
    std::vector<SelectionStep> steps;
    IndexList support;
    TerminalReason reason = TerminalReason::NoCandidate;
    double initial_rss = 0.0;
    Index max_steps = 0;
};

struct SelectedModel {
    IndexList support;
    Vector coef;  // over support, original column scale
    double intercept = 0.0;
    Vector fitted;
};

// z(1 - q), formed by reflection so small q keeps full precision.
inline double upper_quantile(double q) {
    return -gaussian_quantile(q);
}

inline double threshold(const SelectionConfig& config, Index p, Index current_size, double tau) {
    if (p < 1) fail(ErrorKind::InvalidArgument, "p must be positive");
    if (current_size < 0 || current_size >= p) {
        fail(ErrorKind::InvalidArgument, "current model size must lie in [0, p)");
    }
    const double pd = static_cast<double>(p);
    switch (config.policy) {
    case Policy::ForwardI:
        if (tau < 1.0 - 1e-9) fail(ErrorKind::InvalidArgument, "tau must be at least 1");
        return config.c_tau * tau * upper_quantile(config.alpha / pd);
    case Policy::ForwardII:
        return upper_quantile(config.alpha / pd);
    case Policy::ForwardIII:
        return upper_quantile(config.alpha / static_cast<double>(p - current_size));
    }
    return std::numeric_limits<double>::quiet_NaN();
}

inline Index default_max_steps(Index n, Index p, bool include_intercept) {
    return std::max<Index>(0, std::min(n - 2 - (include_intercept ? 1 : 0), p));
}

inline void validate(const SelectionConfig& config, Index n, Index p) {
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        fail(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
    }
    if (!(config.c_tau > 1.0)) {
        fail(ErrorKind::InvalidArgument, "c_tau must exceed 1");
    }
    if (config.max_steps > std::min(n - 2, p)) {
        fail(ErrorKind::InvalidArgument, "max_steps may not exceed min(n - 2, p)");
    }
}

namespace detail {

struct WorkingData {
    Matrix X;             // demeaned (optional) and standardized
    Vector y;             // demeaned (optional)
    std::vector<bool> eligible;
};

inline WorkingData prepare(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                           bool include_intercept) {
    WorkingData w{X, y, std::vector<bool>(static_cast<std::size_t>(X.cols()), true)};
    if (include_intercept) {
        w.y.array() -= w.y.mean();
        w.X.rowwise() -= w.X.colwise().mean();
    }
    const double n = static_cast<double>(X.rows());
    for (Index j = 0; j < w.X.cols(); ++j) {
        const double second_moment = w.X.col(j).squaredNorm() / n;
        if (second_moment > 0.0) {
            w.X.col(j) /= std::sqrt(second_moment);
        } else {
            w.eligible[static_cast<std::size_t>(j)] = false;
        }
    }
    return w;
}

}  // namespace detail

inline SelectionTrace forward_select(const Eigen::Ref<const Matrix>& X,
                                     const Eigen::Ref<const Vector>& y,
                                     const SelectionConfig& config) {
    const Index n = X.rows();
    const Index p = X.cols();
    if (y.size() != n) {
        fail(ErrorKind::DimensionMismatch, "y has length " + std::to_string(y.size()) +
                                               ", X has " + std::to_string(n) + " rows");
    }
    if (n <= 2) fail(ErrorKind::InvalidArgument, "need at least three observations");
    if (!X.allFinite() || !y.allFinite()) fail(ErrorKind::InvalidArgument, "non-finite input");
    validate(config, n, p);

    const detail::WorkingData w = detail::prepare(X, y, config.include_intercept);
    const Index intercept_dof = config.include_intercept ? 1 : 0;

    SelectionTrace trace;
    trace.max_steps = config.max_steps >= 0
                          ? config.max_steps
                          : default_max_steps(n, p, config.include_intercept);
    trace.initial_rss = w.y.squaredNorm();
    if (p == 0 || trace.max_steps == 0) {
        trace.reason = p == 0 ? TerminalReason::NoCandidate : TerminalReason::MaxSteps;
        return trace;
    }
    const double exact_fit_rss = kPerfectFitTol * w.y.squaredNorm();
    if (trace.initial_rss <= exact_fit_rss) {
        trace.reason = TerminalReason::PerfectFit;
        return trace;
    }

    std::vector<bool> selected(static_cast<std::size_t>(p), false);
    Matrix Q(n, 0);
    CholeskyState chol;
    Vector e = w.y;
    const bool need_tau =
        config.policy == Policy::ForwardI &&
        (config.se_kind == SeKind::White || config.classical_tau == ClassicalTau::Robust);
    const double sq_norm = static_cast<double>(n);  // every eligible column after rescaling

    while (static_cast<Index>(trace.support.size()) < trace.max_steps) {
        const Index k = static_cast<Index>(trace.support.size());
        const Index dof = n - k - 1 - intercept_dof;

        // Residualize every column on the current model, with one
        // reorthogonalization pass.
        Matrix C = Q.transpose() * w.X;
        Matrix R = w.X - Q * C;
        if (k > 0) {
            const Matrix C2 = Q.transpose() * R;
            R.noalias() -= Q * C2;
            C += C2;
        }
        const double fixed_threshold =
            config.policy == Policy::ForwardI ? 0.0 : threshold(config, p, k, 1.0);

        SelectionStep step;
        double best_W = -1.0;
        Vector resid(n);
        Vector resid_sq(n);

        for (Index j = 0; j < p; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (selected[ju] || !w.eligible[ju]) continue;
            const auto r = R.col(j);
            const double ss = r.squaredNorm();
            if (!(ss > kSingularityFloor * sq_norm)) {
                ++step.skipped;
                continue;
            }
            const double coef = r.dot(e) / ss;
            resid = e - coef * r;
            const double rss = resid.squaredNorm();

            double W = 0.0;
            double tau = 1.0;
            if (rss <= exact_fit_rss) {
                W = coef != 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            } else {
                resid_sq = resid.array().square();
                const double meat = (r.array().square() * resid_sq.array()).sum();
                double v = 0.0;
                if (config.se_kind == SeKind::Classical) {
                    v = rss / static_cast<double>(dof) / ss;
                } else {
                    v = meat / (ss * ss);
                }
                if (!(v > 0.0)) {
                    ++step.skipped;
                    continue;
                }
                W = std::abs(coef) / std::sqrt(v);
                if (need_tau && meat > 0.0) {
                    const Vector beta = chol.back_solve(C.col(j));
                    auto weight = [&](Index col) {
                        const double psi = resid_sq.dot(w.X.col(col).cwiseAbs2());
                        return config.tau_form == TauForm::SelfNormalized ? std::sqrt(psi) : psi;
                    };
                    double numer = weight(j);
                    for (Index s = 0; s < k; ++s) {
                        numer += std::abs(beta[s]) * weight(trace.support[static_cast<std::size_t>(s)]);
                    }
                    tau = numer / std::sqrt(meat);
                }
            }
            const double thr = config.policy == Policy::ForwardI ? threshold(config, p, k, tau)
                                                                 : fixed_threshold;
            if (W >= thr) {
                ++step.passing;
                if (W > best_W) {
                    best_W = W;
                    step.index = j;
                    step.W = W;
                    step.threshold = thr;
                    step.tau = tau;
                }
            }
        }

        if (step.passing == 0) {
            trace.reason = TerminalReason::NoCandidate;
            return trace;
        }

        const Index jhat = step.index;
        const auto r = R.col(jhat);
        const double norm = r.norm();
        chol.append_factor_row(C.col(jhat), norm, jhat);
        Q.conservativeResize(n, k + 1);
        Q.col(k) = r / norm;
        selected[static_cast<std::size_t>(jhat)] = true;
        trace.support.push_back(jhat);

        e = w.y - Q * (Q.transpose() * w.y);
        e -= Q * (Q.transpose() * e);
        step.rss = e.squaredNorm();
        trace.steps.push_back(step);

        if (std::isinf(step.W) || step.rss <= exact_fit_rss) {
            trace.reason = TerminalReason::PerfectFit;
            return trace;
        }
    }
    trace.reason = TerminalReason::MaxSteps;
    return trace;
}

// Least squares on the selected columns in their original scale.
inline SelectedModel refit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                           const IndexList& support, bool include_intercept = false) {
    SelectedModel model;
    model.support = support;
    if (!include_intercept) {
        const RegressionFit fit = ols_fit(X, y, support);
        model.coef = fit.coef;
        model.fitted = y - fit.residuals;
        return model;
    }
    const Eigen::RowVectorXd means = X.colwise().mean();
    const Matrix Xc = X.rowwise() - means;
    const double ybar = y.mean();
    const Vector yc = y.array() - ybar;
    const RegressionFit fit = ols_fit(Xc, yc, support);
    model.coef = fit.coef;
    model.intercept = ybar;
    for (std::size_t k = 0; k < support.size(); ++k) {
        model.intercept -= fit.coef[static_cast<Index>(k)] * means[support[k]];
    }
    model.fitted = y - fit.residuals;
    return model;
}

inline SelectedModel refit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                           const SelectionTrace& trace, bool include_intercept = false) {
    return refit(X, y, trace.support, include_intercept);
}

}  // namespace fsel
