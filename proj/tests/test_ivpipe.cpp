#include <cmath>

#include <gtest/gtest.h>

#include "fsel/ivpipe.hpp"
#include "generators.hpp"

using namespace fsel;

namespace {

// Exactly identified system with k controls. Control 0 enters every equation.
IvDataset synthetic(gen::Rng& rng, Index n, Index k, double theta, double noise) {
    IvDataset d;
    d.controls = rng.matrix(n, k);
    for (Index j = 0; j < k; ++j) d.control_names.push_back("w" + std::to_string(j));
    const Vector u = rng.vector(n);
    const Vector v = rng.vector(n);
    const Vector e = 0.6 * v + 0.8 * rng.vector(n);
    d.instrument = (u + 0.5 * d.controls.col(0)).array() + 1.0;
    d.endogenous = (0.9 * d.instrument + 0.7 * d.controls.col(0) + noise * v).array() - 2.0;
    d.outcome = (theta * d.endogenous + 1.2 * d.controls.col(0) + noise * e).array() + 0.5;
    return d;
}

struct Reference {
    double theta;
    double se;
    double pi;
    double pi_se;
};

// Textbook 2SLS via projections, HC0 sandwich from the projected regressors.
Reference reference_tsls(const IvDataset& d, const IndexList& subset) {
    const Index n = d.outcome.size();
    const Index k = 2 + static_cast<Index>(subset.size());
    Matrix Z(n, k);
    Matrix X(n, k);
    Z.col(0) = d.instrument;
    X.col(0) = d.endogenous;
    Z.col(1).setOnes();
    X.col(1).setOnes();
    for (std::size_t c = 0; c < subset.size(); ++c) {
        Z.col(2 + static_cast<Index>(c)) = d.controls.col(subset[c]);
        X.col(2 + static_cast<Index>(c)) = d.controls.col(subset[c]);
    }
    const auto qr = Z.householderQr();
    const Vector pi = qr.solve(d.endogenous);
    const Vector v = d.endogenous - Z * pi;
    const Matrix ZtZi = (Z.transpose() * Z).inverse();
    const Matrix V1 = ZtZi * (Z.transpose() * v.array().square().matrix().asDiagonal() * Z) * ZtZi;
    Matrix Xhat(n, k);
    for (Index c = 0; c < k; ++c) Xhat.col(c) = Z * qr.solve(X.col(c));
    const Vector beta = (Xhat.transpose() * X).inverse() * (Xhat.transpose() * d.outcome);
    const Vector e = d.outcome - X * beta;
    const Matrix B = (Xhat.transpose() * Xhat).inverse();
    const Matrix V2 = B * (Xhat.transpose() * e.array().square().matrix().asDiagonal() * Xhat) * B;
    return {beta[0], std::sqrt(V2(0, 0)), pi[0], std::sqrt(V1(0, 0))};
}

}  // namespace

TEST(ExpandGeo, ZeroLatitude) {
    Matrix dummies(2, 4);
    dummies << 1, 0, 0, 0, 0, 0, 1, 0;
    const GeoExpansion g = expand_geo(Vector::Zero(2), dummies);
    ASSERT_EQ(g.columns.cols(), 16);
    EXPECT_EQ(g.columns.leftCols(4), dummies);
    EXPECT_EQ(g.columns.rightCols(12), Matrix::Zero(2, 12));
}

TEST(ExpandGeo, KnotBoundaryAndArithmetic) {
    const GeoExpansion g = expand_geo(Vector{{0.16, 0.5}}, Matrix::Zero(2, 4));
    auto col = [&](const std::string& name) {
        for (std::size_t k = 0; k < g.names.size(); ++k) {
            if (g.names[k] == name) return static_cast<Index>(k);
        }
        ADD_FAILURE() << "missing column " << name;
        return Index{0};
    };
    EXPECT_NEAR(g.columns(0, col("(lat-.08)+")), 0.08, 1e-15);
    EXPECT_EQ(g.columns(0, col("(lat-.16)+")), 0.0);
    EXPECT_NEAR(g.columns(1, col("lat^3")), 0.125, 1e-15);
    EXPECT_NEAR(g.columns(1, col("((lat-.24)+)^2")), 0.0676, 1e-15);
}

TEST(ExpandGeo, NamesAndOrder) {
    const GeoExpansion g = expand_geo(Vector::Constant(1, 0.3), Matrix::Zero(1, 4));
    const std::vector<std::string> expected{
        "africa",        "asia",          "namer",         "samer",           "lat",
        "lat^2",         "lat^3",         "(lat-.08)+",    "(lat-.16)+",      "(lat-.24)+",
        "((lat-.08)+)^2", "((lat-.16)+)^2", "((lat-.24)+)^2", "((lat-.08)+)^3", "((lat-.16)+)^3",
        "((lat-.24)+)^3"};
    EXPECT_EQ(g.names, expected);
}

TEST(ExpandGeo, SplineSupportProperty) {
    gen::Rng rng(1);
    Vector lat(200);
    for (Index i = 0; i < 200; ++i) lat[i] = rng.uniform(0.0, 1.0);
    const GeoExpansion g = expand_geo(lat, Matrix::Zero(200, 4));
    for (Index i = 0; i < 200; ++i) {
        for (int power = 0; power < 3; ++power) {
            for (int k = 0; k < 3; ++k) {
                const double v = g.columns(i, 7 + 3 * power + k);
                if (lat[i] <= kLatitudeKnots[static_cast<std::size_t>(k)]) {
                    EXPECT_EQ(v, 0.0);
                } else {
                    EXPECT_NEAR(v, std::pow(lat[i] - kLatitudeKnots[static_cast<std::size_t>(k)], power + 1), 1e-15);
                }
            }
        }
    }
}

TEST(ExpandGeo, RejectsUnnormalizedLatitude) {
    EXPECT_THROW(expand_geo(Vector::Constant(3, 1.5), Matrix::Zero(3, 4)), Error);
    EXPECT_THROW(expand_geo(Vector::Constant(3, 0.5), Matrix::Zero(3, 3)), Error);
}

TEST(TripleSelect, OrthogonalControlsGiveEmptyUnion) {
    // Columns of a 16 x 16 Sylvester-Hadamard matrix; column 0 is the constant.
    Matrix H(16, 16);
    for (Index i = 0; i < 16; ++i) {
        for (Index j = 0; j < 16; ++j) H(i, j) = (__builtin_popcountll(static_cast<unsigned long long>(i & j)) % 2) ? -1.0 : 1.0;
    }
    IvDataset d;
    d.outcome = H.col(1);
    d.endogenous = H.col(2) + 0.5 * H.col(1);
    d.instrument = H.col(3) + 0.5 * H.col(2);
    d.controls = H.middleCols(4, 6);
    for (int k = 0; k < 6; ++k) d.control_names.push_back("h" + std::to_string(k));
    const TripleSelection t = triple_select(d);
    EXPECT_TRUE(t.union_set.empty());
}

TEST(TripleSelect, SharedDriverSelectedEverywhere) {
    gen::Rng rng(2);
    const Index n = 120;
    IvDataset d;
    d.controls = rng.matrix(n, 6);
    for (int k = 0; k < 6; ++k) d.control_names.push_back("w" + std::to_string(k));
    d.instrument = 3.0 * d.controls.col(3) + 0.3 * rng.vector(n);
    d.endogenous = 3.0 * d.controls.col(3) + 0.3 * rng.vector(n);
    d.outcome = 3.0 * d.controls.col(3) + 0.3 * rng.vector(n);
    const TripleSelection t = triple_select(d);
    for (const auto& trace : t.traces) {
        ASSERT_FALSE(trace.support.empty());
        EXPECT_EQ(trace.support[0], 3);
    }
    const auto at = std::find(t.union_set.begin(), t.union_set.end(), 3);
    ASSERT_NE(at, t.union_set.end());
    const auto& member = t.provenance[static_cast<std::size_t>(at - t.union_set.begin())];
    EXPECT_TRUE(member[0] && member[1] && member[2]);
}

TEST(TripleSelect, UnionContainsEachSelection) {
    gen::Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        IvDataset d = synthetic(rng, 80, 10, 0.8, 1.0);
        d.outcome += 0.8 * d.controls.col(4);
        d.instrument += 0.6 * d.controls.col(7);
        const TripleSelection t = triple_select(d);
        for (const auto& trace : t.traces) {
            for (Index j : trace.support) {
                EXPECT_NE(std::find(t.union_set.begin(), t.union_set.end(), j), t.union_set.end());
            }
        }
        EXPECT_TRUE(std::is_sorted(t.union_set.begin(), t.union_set.end()));
    }
}

TEST(Tsls, NoiselessRecoversTheta) {
    gen::Rng rng(4);
    const IvDataset d = synthetic(rng, 50, 4, 0.8, 0.0);
    const IvEstimate est = tsls(d, {0, 1});
    EXPECT_NEAR(est.theta, 0.8, 1e-9);
    EXPECT_NEAR(est.first_stage, 0.9, 1e-9);
}

TEST(Tsls, MatchesProjectionFormulas) {
    gen::Rng rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const IvDataset d = synthetic(rng, 70, 5, -0.4, 1.0);
        const IndexList subset{0, 2, 4};
        const IvEstimate est = tsls(d, subset);
        const Reference ref = reference_tsls(d, subset);
        EXPECT_NEAR(est.theta, ref.theta, 1e-9);
        EXPECT_NEAR(est.theta_se, ref.se, 1e-9);
        EXPECT_NEAR(est.first_stage, ref.pi, 1e-9);
        EXPECT_NEAR(est.first_stage_se, ref.pi_se, 1e-9);
        EXPECT_GT(est.theta_se_classical, 0.0);
        EXPECT_GT(est.first_stage_se_classical, 0.0);
    }
}

TEST(Tsls, ClassicalFirstStageSe) {
    gen::Rng rng(6);
    const IvDataset d = synthetic(rng, 40, 2, 1.0, 1.0);
    const IvEstimate est = tsls(d, {});
    // Simple regression with intercept: se = s / sqrt(Sxx), s^2 = rss / (n - 2).
    const Vector zc = d.instrument.array() - d.instrument.mean();
    const double b = zc.dot(d.endogenous) / zc.squaredNorm();
    const Vector r = (d.endogenous.array() - d.endogenous.mean()).matrix() - b * zc;
    EXPECT_NEAR(est.first_stage, b, 1e-12);
    EXPECT_NEAR(est.first_stage_se_classical, std::sqrt(r.squaredNorm() / 38.0 / zc.squaredNorm()), 1e-12);
}

TEST(Tsls, ReparameterizedControlsSameTheta) {
    gen::Rng rng(7);
    const IvDataset d = synthetic(rng, 60, 3, 0.8, 1.0);
    IvDataset e = d;
    const Matrix A{{2.0, 1.0, 0.0}, {0.0, 1.0, -1.0}, {0.5, 0.0, 3.0}};
    e.controls = d.controls * A;
    EXPECT_NEAR(tsls(d, {0, 1, 2}).theta, tsls(e, {0, 1, 2}).theta, 1e-8);
}

TEST(Tsls, WeakInstrumentFlag) {
    gen::Rng rng(8);
    IvDataset d = synthetic(rng, 100, 2, 0.8, 1.0);
    // Make the instrument exactly orthogonal to the endogenous variable after
    // the intercept: it cannot pass a |t| >= 1 check.
    const Vector dc = d.endogenous.array() - d.endogenous.mean();
    Vector z = rng.vector(100);
    z.array() -= z.mean();
    z -= dc * (dc.dot(z) / dc.squaredNorm());
    d.instrument = z + 0.001 * dc;
    EXPECT_TRUE(tsls(d, {}).weak_instrument);
    EXPECT_FALSE(tsls(synthetic(rng, 100, 2, 0.8, 1.0), {}).weak_instrument);
}

TEST(Tsls, SingularDesign) {
    gen::Rng rng(9);
    IvDataset d = synthetic(rng, 40, 3, 0.8, 1.0);
    d.instrument = d.controls.col(1);
    try {
        tsls(d, {1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingularDesign);
    }
    EXPECT_THROW(tsls(d, {7}), Error);
}

TEST(Tsls, ValidatesDataset) {
    gen::Rng rng(10);
    IvDataset d = synthetic(rng, 30, 2, 0.8, 1.0);
    d.outcome.conservativeResize(29);
    EXPECT_THROW(tsls(d, {}), Error);
}
