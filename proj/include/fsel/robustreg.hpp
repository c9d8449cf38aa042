#pragma once

// Least squares on a column subset, partial (Frisch-Waugh) regression of a
// candidate on a conditioning set, and the classical / Huber-Eicker-White
// variance of the candidate coefficient together with the tau correction
// used by the Forward I threshold.
//
// These are the direct, one-candidate-at-a-time forms. The selection loop in
// fselect.hpp evaluates all candidates of a step with shared work but must
// agree with these definitions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fsel/numcore.hpp"

namespace fsel {

enum class SeKind { Classical, White };

// Numerator of tau: sum_k |eta_k| sqrt(Psi_kk) (self-normalized bound) or the
// literal sum_k |eta_k| Psi_kk.
enum class TauForm { SelfNormalized, LiteralDisplay };

// tau under classical standard errors: built from the same residual-weighted
// Gram as the White branch (Robust), or fixed at 1 (Unit).
enum class ClassicalTau { Robust, Unit };

inline const char* to_string(SeKind kind) {
    return kind == SeKind::Classical ? "classical" : "white";
}

// Residual sums of squares at or below this fraction of ||y||^2 are treated
// as an exact fit.
inline constexpr double kPerfectFitTol = 1e-24;

struct RegressionFit {
    IndexList support;
    Vector coef;
    Vector residuals;
    double rss = 0.0;
};

struct PartialRegression {
    Index j = -1;
    IndexList S;
    Vector beta;   // coefficients of column j on the columns of S
    Vector eta;    // (1, -beta)
    Vector breve;  // column j with the span of S projected out
};

struct VarianceEstimate {
    double v_hat = 0.0;
    SeKind kind = SeKind::White;
    double tau_hat = 1.0;
};

// [Psi]_{kl} = sum_i e_i^2 x_ik x_il over an ordered index set.
struct WeightedGram {
    IndexList indices;
    Matrix entries;
};

struct TestStatistic {
    double W = 0.0;
    double coef = 0.0;  // [theta_jS]_j
    VarianceEstimate variance;
    bool perfect_fit = false;  // zero residuals with nonzero coefficient; W = +inf
};

namespace detail {

inline void check_indices(const Eigen::Ref<const Matrix>& X, const IndexList& S) {
    for (std::size_t a = 0; a < S.size(); ++a) {
        if (S[a] < 0 || S[a] >= X.cols()) {
            fail(ErrorKind::InvalidArgument, "column index " + std::to_string(S[a]) +
                                                 " out of range [0, " +
                                                 std::to_string(X.cols()) + ")");
        }
        for (std::size_t b = 0; b < a; ++b) {
            if (S[a] == S[b]) {
                fail(ErrorKind::InvalidArgument,
                     "column index " + std::to_string(S[a]) + " repeated");
            }
        }
    }
}

inline CholeskyState gram_factor(const Eigen::Ref<const Matrix>& X, const IndexList& S) {
    CholeskyState chol;
    Vector cross(0);
    for (std::size_t k = 0; k < S.size(); ++k) {
        const auto col = X.col(S[k]);
        cross.resize(static_cast<Index>(k));
        for (std::size_t l = 0; l < k; ++l) cross[static_cast<Index>(l)] = X.col(S[l]).dot(col);
        chol.append(cross, col.squaredNorm(), S[k]);
    }
    return chol;
}

inline Vector cross_products(const Eigen::Ref<const Matrix>& X, const IndexList& S,
                             const Eigen::Ref<const Vector>& v) {
    Vector out(static_cast<Index>(S.size()));
    for (std::size_t k = 0; k < S.size(); ++k) out[static_cast<Index>(k)] = X.col(S[k]).dot(v);
    return out;
}

}  // namespace detail

inline RegressionFit ols_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                             const IndexList& S) {
    if (y.size() != X.rows()) {
        fail(ErrorKind::DimensionMismatch, "y has length " + std::to_string(y.size()) +
                                               ", X has " + std::to_string(X.rows()) + " rows");
    }
    detail::check_indices(X, S);
    if (static_cast<Index>(S.size()) >= X.rows()) {
        fail(ErrorKind::InvalidArgument, "support size must be below the number of rows");
    }
    RegressionFit fit;
    fit.support = S;
    const CholeskyState chol = detail::gram_factor(X, S);
    fit.coef = chol.solve(detail::cross_products(X, S, y));
    fit.residuals = y;
    for (std::size_t k = 0; k < S.size(); ++k) {
        fit.residuals -= fit.coef[static_cast<Index>(k)] * X.col(S[k]);
    }
    fit.rss = fit.residuals.squaredNorm();
    return fit;
}

inline PartialRegression fwl_residualize(const Eigen::Ref<const Matrix>& X, const IndexList& S,
                                         Index j) {
    detail::check_indices(X, S);
    if (j < 0 || j >= X.cols()) {
        fail(ErrorKind::InvalidArgument, "candidate index " + std::to_string(j) + " out of range");
    }
    if (std::find(S.begin(), S.end(), j) != S.end()) {
        fail(ErrorKind::InvalidArgument,
             "candidate " + std::to_string(j) + " already in the conditioning set");
    }
    PartialRegression out;
    out.j = j;
    out.S = S;
    const auto psi = X.col(j);
    const CholeskyState chol = detail::gram_factor(X, S);
    out.beta = chol.solve(detail::cross_products(X, S, psi));
    out.breve = psi;
    for (std::size_t k = 0; k < S.size(); ++k) {
        out.breve -= out.beta[static_cast<Index>(k)] * X.col(S[k]);
    }
    if (!(out.breve.squaredNorm() > kSingularityFloor * psi.squaredNorm())) {
        fail(ErrorKind::NearSingular,
             "column " + std::to_string(j) + " is collinear with the conditioning set");
    }
    out.eta.resize(out.beta.size() + 1);
    out.eta[0] = 1.0;
    out.eta.tail(out.beta.size()) = -out.beta;
    return out;
}

inline WeightedGram weighted_gram(const Eigen::Ref<const Matrix>& X, const IndexList& indices,
                                  const Eigen::Ref<const Vector>& residuals) {
    const Vector w = residuals.array().square();
    const Matrix cols = select_columns(X, indices);
    return {indices, cols.transpose() * w.asDiagonal() * cols};
}

inline double tau_hat(const PartialRegression& partial, const WeightedGram& wg,
                      TauForm form = TauForm::SelfNormalized) {
    const Vector& eta = partial.eta;
    if (eta.size() != wg.entries.rows()) {
        fail(ErrorKind::DimensionMismatch, "eta and weighted Gram sizes differ");
    }
    const double quad = eta.dot(wg.entries * eta);
    if (!(quad > 0.0)) {
        fail(ErrorKind::DegenerateWeightedNorm, "eta' Psi eta is not positive");
    }
    double numer = 0.0;
    for (Index k = 0; k < eta.size(); ++k) {
        const double psi_kk = wg.entries(k, k);
        numer += std::abs(eta[k]) * (form == TauForm::SelfNormalized ? std::sqrt(psi_kk) : psi_kk);
    }
    return numer / std::sqrt(quad);
}

// Variance of [theta_jS]_j from the partial regression and the joint fit on
// {j} u S. The classical form uses n - |S| - 1 degrees of freedom.
inline VarianceEstimate variance(const Eigen::Ref<const Matrix>& X, const PartialRegression& partial,
                                 const RegressionFit& fit, SeKind kind,
                                 TauForm form = TauForm::SelfNormalized,
                                 ClassicalTau classical_tau = ClassicalTau::Robust) {
    const double ss = partial.breve.squaredNorm();
    if (!(ss > std::numeric_limits<double>::min())) {
        fail(ErrorKind::DegenerateResidualizedColumn, "residualized candidate has zero norm");
    }
    const Index n = fit.residuals.size();
    const Index dof = n - static_cast<Index>(partial.S.size()) - 1;
    if (dof < 1) {
        fail(ErrorKind::InvalidArgument, "need n > |S| + 1");
    }
    VarianceEstimate out;
    out.kind = kind;
    const double meat = (partial.breve.array().square() * fit.residuals.array().square()).sum();
    if (kind == SeKind::Classical) {
        out.v_hat = fit.rss / static_cast<double>(dof) / ss;
        if (classical_tau == ClassicalTau::Unit) return out;
    } else {
        out.v_hat = meat / (ss * ss);
    }
    if (meat > 0.0) {
        IndexList jS{partial.j};
        jS.insert(jS.end(), partial.S.begin(), partial.S.end());
        out.tau_hat = tau_hat(partial, weighted_gram(X, jS, fit.residuals), form);
    }
    return out;
}

inline TestStatistic test_statistic(const Eigen::Ref<const Matrix>& X,
                                    const Eigen::Ref<const Vector>& y, const IndexList& S, Index j,
                                    SeKind kind, TauForm form = TauForm::SelfNormalized,
                                    ClassicalTau classical_tau = ClassicalTau::Robust) {
    const PartialRegression partial = fwl_residualize(X, S, j);
    IndexList jS{j};
    jS.insert(jS.end(), S.begin(), S.end());
    const RegressionFit fit = ols_fit(X, y, jS);

    TestStatistic out;
    out.coef = fit.coef[0];
    if (fit.rss <= kPerfectFitTol * y.squaredNorm()) {
        out.variance.kind = kind;
        out.variance.v_hat = 0.0;
        out.perfect_fit = out.coef != 0.0;
        out.W = out.perfect_fit ? std::numeric_limits<double>::infinity() : 0.0;
        return out;
    }
    out.variance = variance(X, partial, fit, kind, form, classical_tau);
    out.W = std::abs(out.coef) / std::sqrt(out.variance.v_hat);
    return out;
}

}  // namespace fsel
