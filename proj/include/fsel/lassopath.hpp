#pragma once

// Lasso with data-driven penalty loadings and the Post-Lasso refit.
//
// Objective: (1/n) ||y - X theta||^2 + (lambda/n) sum_j l_j |theta_j|,
// minimized by cyclic coordinate descent with covariance updates (Gram
// columns are computed on first activation and cached).

#include <algorithm>
#include <cassert>
#include <cmath>
#include <optional>
#include <vector>

#include "fsel/fselect.hpp"
#include "fsel/numcore.hpp"
#include "fsel/robustreg.hpp"

namespace fsel {

struct LassoConfig {
    double alpha = 0.05;
    double c_tau = 1.1;
    SeKind loadings = SeKind::White;  // Classical: sigma * sqrt(E_n x^2); White: sqrt(E_n x^2 e^2)
    Index loading_iters = 5;
    double loading_tol = 1e-4;  // stop refitting loadings once the max relative change is below
    double cd_tol = 1e-7;
    Index cd_max_sweeps = 10000;
    double kkt_tol = 1e-7;  // (1/n)-scaled stationarity slack required before stopping
};

struct PenaltyLoadings {
    Vector loadings;
    double lambda = 0.0;
};

struct LassoFit {
    Vector coef;
    IndexList support;
    double objective = 0.0;
    std::vector<double> objective_path;  // after each sweep
    Index sweeps = 0;
    bool converged = false;
    double max_kkt_violation = 0.0;
};

struct BcchFit {
    LassoFit lasso;        // coefficients on the original column scale
    SelectedModel post;    // Post-Lasso OLS on the Lasso support
    PenaltyLoadings penalty;  // loadings for the standardized columns
    Index loading_rounds = 0;
};

inline double penalty_level(Index n, Index p, const LassoConfig& config) {
    if (n < 1 || p < 1) fail(ErrorKind::InvalidArgument, "n and p must be positive");
    return 2.0 * config.c_tau * std::sqrt(static_cast<double>(n)) *
           upper_quantile(config.alpha / (2.0 * static_cast<double>(p)));
}

inline double lasso_objective(const Eigen::Ref<const Vector>& residuals,
                              const Eigen::Ref<const Vector>& coef, double lambda,
                              const Eigen::Ref<const Vector>& loadings) {
    const double n = static_cast<double>(residuals.size());
    return residuals.squaredNorm() / n +
           lambda / n * (loadings.array() * coef.array().abs()).sum();
}

// Largest deviation from the stationarity conditions, on the (1/n) scale.
inline double kkt_violation(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                            const Eigen::Ref<const Vector>& coef, double lambda,
                            const Eigen::Ref<const Vector>& loadings) {
    const double n = static_cast<double>(X.rows());
    const Vector score = X.transpose() * (y - X * coef) / n;
    double worst = 0.0;
    for (Index j = 0; j < X.cols(); ++j) {
        const double bound = lambda * loadings[j] / (2.0 * n);
        const double v = coef[j] != 0.0 ? std::abs(score[j] - std::copysign(bound, coef[j]))
                                        : std::max(0.0, std::abs(score[j]) - bound);
        worst = std::max(worst, v);
    }
    return worst;
}

inline LassoFit lasso_cd(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                         double lambda, const Eigen::Ref<const Vector>& loadings,
                         const LassoConfig& config = {},
                         std::optional<Vector> warm_start = std::nullopt) {
    const Index n = X.rows();
    const Index p = X.cols();
    if (y.size() != n || loadings.size() != p) {
        fail(ErrorKind::DimensionMismatch, "lasso inputs have inconsistent sizes");
    }
    if (!(lambda >= 0.0)) fail(ErrorKind::InvalidArgument, "lambda must be nonnegative");
    if (!(config.cd_tol > 0.0)) fail(ErrorKind::InvalidArgument, "cd_tol must be positive");

    LassoFit fit;
    fit.coef = warm_start ? *warm_start : Vector::Zero(p);
    if (fit.coef.size() != p) fail(ErrorKind::DimensionMismatch, "warm start has the wrong length");

    const Vector col_sq = X.colwise().squaredNorm().transpose();
    std::vector<Vector> gram(static_cast<std::size_t>(p));
    auto gram_col = [&](Index j) -> const Vector& {
        auto& g = gram[static_cast<std::size_t>(j)];
        if (g.size() == 0) g = X.transpose() * X.col(j);
        return g;
    };
    Vector residual = y - X * fit.coef;
    Vector xtr = X.transpose() * residual;

    double previous = lasso_objective(residual, fit.coef, lambda, loadings);
    for (fit.sweeps = 0; fit.sweeps < config.cd_max_sweeps;) {
        double max_change = 0.0;
        for (Index j = 0; j < p; ++j) {
            const double a = col_sq[j];
            if (!(a > 0.0)) continue;
            const double rho = xtr[j] + a * fit.coef[j];
            const double pen = 0.5 * lambda * loadings[j];
            const double updated =
                rho > pen ? (rho - pen) / a : (rho < -pen ? (rho + pen) / a : 0.0);
            const double delta = updated - fit.coef[j];
            if (delta != 0.0) {
                xtr.noalias() -= gram_col(j) * delta;
                fit.coef[j] = updated;
                max_change = std::max(max_change, std::abs(delta) * std::sqrt(a / n));
            }
        }
        ++fit.sweeps;

        residual = y - X * fit.coef;
        const double current = lasso_objective(residual, fit.coef, lambda, loadings);
        fit.objective_path.push_back(current);
        assert(current <= previous + 1e-12 * std::max(1.0, std::abs(previous)));
        previous = current;

        if (max_change < config.cd_tol) {
            // Refresh the accumulated scores before trusting them.
            xtr = X.transpose() * residual;
            if (kkt_violation(X, y, fit.coef, lambda, loadings) <= config.kkt_tol) {
                fit.converged = true;
                break;
            }
        }
    }
    fit.objective = previous;
    fit.max_kkt_violation = kkt_violation(X, y, fit.coef, lambda, loadings);
    for (Index j = 0; j < p; ++j) {
        if (fit.coef[j] != 0.0) fit.support.push_back(j);
    }
    return fit;
}

inline Vector penalty_loadings(const Eigen::Ref<const Matrix>& X,
                               const Eigen::Ref<const Vector>& residuals, SeKind kind) {
    const double n = static_cast<double>(X.rows());
    if (kind == SeKind::Classical) {
        const double sigma = std::sqrt(residuals.squaredNorm() / n);
        return (X.colwise().squaredNorm().transpose() / n).array().sqrt() * sigma;
    }
    const Vector e2 = residuals.array().square();
    return ((X.array().square().colwise() * e2.array()).colwise().sum().transpose() / n).sqrt();
}

// Least squares on a support that may be rank deficient (pivoted QR fallback).
inline SelectedModel post_lasso(const Eigen::Ref<const Matrix>& X,
                                const Eigen::Ref<const Vector>& y, const IndexList& support) {
    if (static_cast<Index>(support.size()) < X.rows()) {
        try {
            return refit(X, y, support);
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::NearSingular) throw;
        }
    }
    SelectedModel model;
    model.support = support;
    const Matrix XS = select_columns(X, support);
    model.coef = XS.colPivHouseholderQr().solve(Vector(y));
    model.fitted = XS * model.coef;
    return model;
}

inline BcchFit bcch_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y,
                        const LassoConfig& config = {}) {
    const Index n = X.rows();
    const Index p = X.cols();
    if (y.size() != n) fail(ErrorKind::DimensionMismatch, "y and X row counts differ");
    if (config.loading_iters < 1) fail(ErrorKind::InvalidArgument, "loading_iters must be >= 1");

    // Standardize; zero columns keep scale 1 and never enter.
    Matrix Xs = X;
    Vector scales = Vector::Ones(p);
    for (Index j = 0; j < p; ++j) {
        const double m2 = X.col(j).squaredNorm() / static_cast<double>(n);
        if (m2 > 0.0) {
            scales[j] = std::sqrt(m2);
            Xs.col(j) /= scales[j];
        }
    }

    BcchFit out;
    out.penalty.lambda = penalty_level(n, p, config);
    const Vector centered = y.array() - y.mean();
    out.penalty.loadings = penalty_loadings(Xs, centered, config.loadings);
    LassoFit fit = lasso_cd(Xs, y, out.penalty.lambda, out.penalty.loadings, config);

    for (Index round = 0; round < config.loading_iters; ++round) {
        const Vector residuals = y - Xs * fit.coef;
        const Vector updated = penalty_loadings(Xs, residuals, config.loadings);
        double change = 0.0;
        for (Index j = 0; j < p; ++j) {
            if (out.penalty.loadings[j] > 0.0) {
                change = std::max(change, std::abs(updated[j] - out.penalty.loadings[j]) /
                                              out.penalty.loadings[j]);
            }
        }
        out.penalty.loadings = updated;
        fit = lasso_cd(Xs, y, out.penalty.lambda, out.penalty.loadings, config, fit.coef);
        out.loading_rounds = round + 1;
        if (change < config.loading_tol) break;
    }

    out.post = post_lasso(X, y, fit.support);
    fit.coef.array() /= scales.array();
    out.lasso = std::move(fit);
    return out;
}

}  // namespace fsel
