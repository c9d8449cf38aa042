#pragma once

// Post-triple-selection instrumental variables.
//
// Controls are chosen by running forward selection separately on the three
// reduced forms (outcome, endogenous regressor and instrument, each on the
// controls); the union of the three selections enters an exactly identified
// 2SLS. An intercept is always included and never selected against.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fsel/fselect.hpp"
#include "fsel/numcore.hpp"

namespace fsel {

struct IvDataset {
    Vector outcome;
    Vector endogenous;
    Vector instrument;
    Matrix controls;
    std::vector<std::string> control_names;
};

inline void validate(const IvDataset& data) {
    const Index n = data.outcome.size();
    if (data.endogenous.size() != n || data.instrument.size() != n ||
        (data.controls.cols() > 0 && data.controls.rows() != n)) {
        fail(ErrorKind::DimensionMismatch, "IV dataset columns have unequal lengths");
    }
    if (static_cast<Index>(data.control_names.size()) != data.controls.cols()) {
        fail(ErrorKind::DimensionMismatch, "control names do not match control columns");
    }
    if (!data.outcome.allFinite() || !data.endogenous.allFinite() ||
        !data.instrument.allFinite() || !data.controls.allFinite()) {
        fail(ErrorKind::InvalidArgument, "IV dataset contains non-finite values");
    }
}

// ---- geography controls ----------------------------------------------------

inline constexpr std::array<double, 3> kLatitudeKnots{0.08, 0.16, 0.24};

// ".08" style
inline std::string knot_label(double knot) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), knot, std::chars_format::fixed, 2);
    std::string s(buf, res.ptr);
    if (s.rfind("0.", 0) == 0) s.erase(0, 1);
    return s;
}

struct GeoExpansion {
    Matrix columns;  // n x 16
    std::vector<std::string> names;
};

// Continent dummies (Africa, Asia, North America, South America) followed by
// lat, lat^2, lat^3, the three hinge terms (lat - k)_+, their squares and
// their cubes.
inline GeoExpansion expand_geo(const Eigen::Ref<const Vector>& latitude,
                               const Eigen::Ref<const Matrix>& dummies) {
    const Index n = latitude.size();
    if (dummies.rows() != n || dummies.cols() != 4) {
        fail(ErrorKind::DimensionMismatch, "expected an n x 4 block of continent dummies");
    }
    for (Index i = 0; i < n; ++i) {
        if (!(latitude[i] >= 0.0 && latitude[i] <= 1.0)) {
            fail(ErrorKind::InvalidArgument,
                 "latitude must be normalized to [0, 1]; row " + std::to_string(i) + " has " +
                     std::to_string(latitude[i]));
        }
    }
    GeoExpansion geo;
    geo.columns.resize(n, 16);
    geo.names = {"africa", "asia", "namer", "samer", "lat", "lat^2", "lat^3"};
    geo.columns.leftCols(4) = dummies;
    geo.columns.col(4) = latitude;
    geo.columns.col(5) = latitude.array().square();
    geo.columns.col(6) = latitude.array().cube();
    Index col = 7;
    for (int power = 1; power <= 3; ++power) {
        for (double knot : kLatitudeKnots) {
            std::string name = "(lat-" + knot_label(knot) + ")+";
            if (power > 1) name = "(" + name + ")^" + std::to_string(power);
            geo.names.push_back(name);
            geo.columns.col(col++) = (latitude.array() - knot).max(0.0).pow(power);
        }
    }
    return geo;
}

// ---- triple selection ------------------------------------------------------

struct TripleSelection {
    std::array<SelectionTrace, 3> traces;  // outcome, endogenous, instrument
    IndexList union_set;                   // ascending
    std::vector<std::array<bool, 3>> provenance;  // per union member
};

struct TripleSelectConfig {
    SelectionConfig base{};
    std::array<double, 3> alpha{0.05, 0.05, 0.05};
};

inline TripleSelectConfig default_triple_config() {
    TripleSelectConfig config;
    config.base.policy = Policy::ForwardI;
    config.base.se_kind = SeKind::White;
    config.base.include_intercept = true;
    return config;
}

inline TripleSelection triple_select(const IvDataset& data,
                                     const TripleSelectConfig& config = default_triple_config()) {
    validate(data);
    TripleSelection out;
    const std::array<const Vector*, 3> lhs{&data.outcome, &data.endogenous, &data.instrument};
    for (std::size_t step = 0; step < 3; ++step) {
        SelectionConfig sc = config.base;
        sc.alpha = config.alpha[step];
        sc.include_intercept = true;
        out.traces[step] = forward_select(data.controls, *lhs[step], sc);
    }
    for (std::size_t step = 0; step < 3; ++step) {
        for (Index j : out.traces[step].support) {
            if (std::find(out.union_set.begin(), out.union_set.end(), j) == out.union_set.end()) {
                out.union_set.push_back(j);
            }
        }
    }
    std::sort(out.union_set.begin(), out.union_set.end());
    for (Index j : out.union_set) {
        std::array<bool, 3> member{};
        for (std::size_t step = 0; step < 3; ++step) {
            const auto& s = out.traces[step].support;
            member[step] = std::find(s.begin(), s.end(), j) != s.end();
        }
        out.provenance.push_back(member);
    }
    return out;
}

// ---- 2SLS --------------------------------------------------------------------

struct IvEstimate {
    IndexList controls;
    double theta = 0.0;
    double theta_se = 0.0;            // HC0
    double theta_se_classical = 0.0;
    double first_stage = 0.0;         // instrument coefficient
    double first_stage_se = 0.0;      // HC0
    double first_stage_se_classical = 0.0;
    bool weak_instrument = false;     // |first stage t| < 1
    Index n = 0;
};

namespace detail {

inline Matrix with_intercept(const Eigen::Ref<const Vector>& lead, const Eigen::Ref<const Matrix>& controls,
                             const IndexList& subset) {
    const Index n = lead.size();
    Matrix M(n, 2 + static_cast<Index>(subset.size()));
    M.col(0) = lead;
    M.col(1).setOnes();
    for (std::size_t k = 0; k < subset.size(); ++k) M.col(2 + static_cast<Index>(k)) = controls.col(subset[k]);
    return M;
}

}  // namespace detail

// Exactly identified 2SLS of outcome on (endogenous, 1, controls) with
// instruments (instrument, 1, controls).
inline IvEstimate tsls(const IvDataset& data, const IndexList& controls_subset) {
    validate(data);
    for (Index j : controls_subset) {
        if (j < 0 || j >= data.controls.cols()) {
            fail(ErrorKind::InvalidArgument, "control index " + std::to_string(j) + " out of range");
        }
    }
    const Index n = data.outcome.size();
    const Matrix Z = detail::with_intercept(data.instrument, data.controls, controls_subset);
    const Matrix X = detail::with_intercept(data.endogenous, data.controls, controls_subset);
    const Index k = Z.cols();
    if (n <= k) fail(ErrorKind::SingularDesign, "not enough observations for the IV design");

    IvEstimate out;
    out.controls = controls_subset;
    out.n = n;

    // Z = Q R P'. With k instruments for k regressors, Z'X = P R' Q'X, so the
    // estimator only needs the k x k system Q'X; forming Z'Z or Z'X would
    // square the conditioning of the spline controls.
    const Eigen::ColPivHouseholderQR<Matrix> qr(Z);
    if (qr.rank() < k) fail(ErrorKind::SingularDesign, "instrument and controls are collinear");
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, k);
    const Matrix R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();

    // First stage: rows of (Z'Z)^{-1} Z' = P R^{-1} Q'.
    const Matrix rinv_qt = R.triangularView<Eigen::Upper>().solve(Matrix(Q.transpose()));
    const Matrix zplus = qr.colsPermutation() * rinv_qt;
    const Vector pi = zplus * data.endogenous;
    const Vector v = data.endogenous - Z * pi;
    out.first_stage = pi[0];
    out.first_stage_se = std::sqrt((zplus.row(0).transpose().array() * v.array()).square().sum());
    out.first_stage_se_classical =
        std::sqrt(v.squaredNorm() / static_cast<double>(n - k) * zplus.row(0).squaredNorm());

    // Structural equation: beta = (Q'X)^{-1} Q'y.
    const Eigen::FullPivLU<Matrix> b_lu(Q.transpose() * X);
    if (b_lu.rank() < k) {
        fail(ErrorKind::SingularDesign, "instrument carries no first-stage variation");
    }
    const Matrix influence = b_lu.solve(Matrix(Q.transpose()));  // beta = influence * y
    const Vector beta = influence * data.outcome;
    const Vector e = data.outcome - X * beta;
    out.theta = beta[0];
    out.theta_se = std::sqrt((influence.row(0).transpose().array() * e.array()).square().sum());
    out.theta_se_classical =
        std::sqrt(e.squaredNorm() / static_cast<double>(n - k) * influence.row(0).squaredNorm());

    const double t = out.first_stage_se > 0.0 ? out.first_stage / out.first_stage_se
                                              : std::numeric_limits<double>::infinity();
    out.weak_instrument = std::abs(t) < 1.0;
    return out;
}

}  // namespace fsel
