#pragma once

// Dense kernels shared by the selection, Lasso and simulation code:
// incremental Cholesky of a growing Gram matrix, the standard normal
// CDF/quantile pair, a seedable normal stream and column normalization.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fsel/error.hpp"

namespace fsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

// Squared pivots at or below this fraction of the incoming diagonal are
// treated as exact collinearity.
inline constexpr double kSingularityFloor = 1e-10;

inline bool all_finite(const Eigen::Ref<const Matrix>& m) {
    return m.allFinite();
}

// Lower-triangular factor L of the Gram matrix of an ordered column set,
// grown one column at a time.
class CholeskyState {
public:
    CholeskyState() = default;

    Index dim() const { return factor_.rows(); }
    const Matrix& factor() const { return factor_; }
    const IndexList& columns() const { return columns_; }

    // Extends the factor by one column whose inner products with the
    // existing columns are `cross` and whose squared norm is `diag`.
    void append(const Eigen::Ref<const Vector>& cross, double diag, Index column = -1) {
        const Index k = dim();
        if (cross.size() != k) {
            fail(ErrorKind::DimensionMismatch,
                 "cross has length " + std::to_string(cross.size()) + ", expected " +
                     std::to_string(k));
        }
        if (!(diag > 0.0) || !std::isfinite(diag)) {
            fail(ErrorKind::NearSingular, "non-positive diagonal " + std::to_string(diag));
        }
        Vector row = forward_solve(cross);
        const double pivot_sq = diag - row.squaredNorm();
        if (!(pivot_sq > kSingularityFloor * diag)) {
            fail(ErrorKind::NearSingular, "pivot below singularity floor for column " +
                                              std::to_string(column));
        }
        factor_.conservativeResize(k + 1, k + 1);
        factor_.row(k).head(k) = row.transpose();
        factor_.col(k).head(k).setZero();
        factor_(k, k) = std::sqrt(pivot_sq);
        columns_.push_back(column);
    }

    // Appends a precomputed factor row (e.g. Gram-Schmidt coefficients
    // Q^T x and the residual norm) without re-deriving it from the Gram.
    void append_factor_row(const Eigen::Ref<const Vector>& row, double pivot, Index column = -1) {
        const Index k = dim();
        if (row.size() != k) {
            fail(ErrorKind::DimensionMismatch, "factor row has the wrong length");
        }
        if (!(pivot > 0.0)) {
            fail(ErrorKind::NearSingular, "non-positive pivot for column " + std::to_string(column));
        }
        factor_.conservativeResize(k + 1, k + 1);
        factor_.row(k).head(k) = row.transpose();
        factor_.col(k).head(k).setZero();
        factor_(k, k) = pivot;
        columns_.push_back(column);
    }

    // L^{-1} rhs
    Vector forward_solve(const Eigen::Ref<const Vector>& rhs) const {
        check_len(rhs.size());
        if (dim() == 0) return Vector(0);
        return factor_.triangularView<Eigen::Lower>().solve(rhs);
    }

    // L^{-T} rhs
    Vector back_solve(const Eigen::Ref<const Vector>& rhs) const {
        check_len(rhs.size());
        if (dim() == 0) return Vector(0);
        return factor_.triangularView<Eigen::Lower>().transpose().solve(rhs);
    }

    // Gram^{-1} rhs
    Vector solve(const Eigen::Ref<const Vector>& rhs) const {
        return back_solve(forward_solve(rhs));
    }

    Matrix gram() const { return factor_ * factor_.transpose(); }

    // Factorizes a whole Gram matrix column by column; throws NearSingular
    // on the first dependent column.
    static CholeskyState from_gram(const Eigen::Ref<const Matrix>& gram) {
        if (gram.rows() != gram.cols()) {
            fail(ErrorKind::DimensionMismatch, "Gram matrix is not square");
        }
        CholeskyState state;
        for (Index k = 0; k < gram.rows(); ++k) {
            state.append(gram.col(k).head(k), gram(k, k), k);
        }
        return state;
    }

private:
    void check_len(Index n) const {
        if (n != dim()) {
            fail(ErrorKind::DimensionMismatch, "rhs has length " + std::to_string(n) +
                                                   ", factor has dimension " +
                                                   std::to_string(dim()));
        }
    }

    Matrix factor_;
    IndexList columns_;
};

inline Vector solve_spd(const CholeskyState& chol, const Eigen::Ref<const Vector>& rhs) {
    return chol.solve(rhs);
}

inline CholeskyState chol_append(CholeskyState chol, const Eigen::Ref<const Vector>& cross,
                                 double diag) {
    chol.append(cross, diag);
    return chol;
}

inline double gaussian_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double gaussian_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

namespace detail {

// Rational approximation for the lower half, relative error ~1e-9 before
// refinement (Acklam's coefficients).
inline double quantile_initial(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

// Inverse of the standard normal CDF. Upper-half arguments are reflected so
// that 1 - p is formed exactly and tail accuracy is preserved.
inline double gaussian_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        fail(ErrorKind::InvalidArgument,
             "quantile probability must lie in (0, 1), got " + std::to_string(p));
    }
    if (p > 0.5) return -gaussian_quantile(1.0 - p);
    if (p == 0.5) return 0.0;

    double x = detail::quantile_initial(p);
    // One Halley step on Phi(x) - p.
    const double e = gaussian_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

// SplitMix64 finalizer; derives independent stream seeds from
// (master seed, stream index) pairs.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(mix_seed(seed, 0)) {}

    double operator()() { return dist_(engine_); }

    void fill(Eigen::Ref<Vector> out) {
        for (Index i = 0; i < out.size(); ++i) out[i] = dist_(engine_);
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

inline NormalStream normal_stream(std::uint64_t seed) {
    return NormalStream(seed);
}

struct Standardized {
    Matrix X;
    Vector scales;  // divisor applied to each column
};

// Rescales every column to unit empirical second moment (1/n) sum x^2 = 1.
inline Standardized standardize_columns(const Eigen::Ref<const Matrix>& X) {
    const double n = static_cast<double>(X.rows());
    Standardized out{Matrix(X.rows(), X.cols()), Vector(X.cols())};
    for (Index j = 0; j < X.cols(); ++j) {
        const double second_moment = X.col(j).squaredNorm() / n;
        if (!(second_moment > 0.0)) {
            fail(ErrorKind::ZeroColumn, "column " + std::to_string(j) + " is identically zero");
        }
        const double scale = std::sqrt(second_moment);
        out.scales[j] = scale;
        out.X.col(j) = X.col(j) / scale;
    }
    return out;
}

inline Matrix select_columns(const Eigen::Ref<const Matrix>& X, const IndexList& cols) {
    Matrix out(X.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = X.col(cols[k]);
    return out;
}

}  // namespace fsel
