#include <cmath>
#include <cstring>
#include <set>

#include <gtest/gtest.h>

#include "fsel/numcore.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fsel;

namespace {

std::vector<std::vector<double>> to_rows(const Matrix& A) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(A.rows()));
    for (Index i = 0; i < A.rows(); ++i) {
        for (Index j = 0; j < A.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(A(i, j));
    }
    return rows;
}

}  // namespace

TEST(SolveSpd, IdentityGram) {
    const CholeskyState chol = CholeskyState::from_gram(Matrix::Identity(2, 2));
    const Vector x = solve_spd(chol, Vector{{3.0, -1.0}});
    EXPECT_DOUBLE_EQ(x[0], 3.0);
    EXPECT_DOUBLE_EQ(x[1], -1.0);
}

TEST(SolveSpd, DiagonalGram) {
    Matrix G{{4.0, 0.0}, {0.0, 9.0}};
    const Vector x = solve_spd(CholeskyState::from_gram(G), Vector{{8.0, 9.0}});
    EXPECT_NEAR(x[0], 2.0, 1e-15);
    EXPECT_NEAR(x[1], 1.0, 1e-15);
}

TEST(SolveSpd, MatchesGaussianElimination) {
    gen::Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix G = rng.spd(5);
        const Vector b = rng.vector(5);
        const Vector x = solve_spd(CholeskyState::from_gram(G), b);
        const auto ref = oracle::gauss_solve(to_rows(G), std::vector<double>(b.data(), b.data() + 5));
        for (Index k = 0; k < 5; ++k) EXPECT_NEAR(x[k], ref[static_cast<std::size_t>(k)], 1e-9 * (1 + std::abs(x[k])));
        EXPECT_LE((G * x - b).norm(), 1e-9 * b.norm());
    }
}

TEST(SolveSpd, RejectsWrongLength) {
    const CholeskyState chol = CholeskyState::from_gram(Matrix::Identity(3, 3));
    try {
        solve_spd(chol, Vector::Ones(2));
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(CholAppend, ScalarCase) {
    const CholeskyState chol = chol_append(CholeskyState{}, Vector(0), 4.0);
    ASSERT_EQ(chol.dim(), 1);
    EXPECT_DOUBLE_EQ(chol.factor()(0, 0), 2.0);
}

TEST(CholAppend, DuplicateColumnIsNearSingular) {
    gen::Rng rng(3);
    const Vector a = rng.vector(10);
    const CholeskyState chol = chol_append(CholeskyState{}, Vector(0), a.squaredNorm());
    try {
        chol_append(chol, Vector::Constant(1, a.squaredNorm()), a.squaredNorm());
        FAIL() << "expected NearSingular";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NearSingular);
    }
}

TEST(CholAppend, IncrementalEqualsOneShot) {
    gen::Rng rng(5);
    for (Index k : {3, 7, 12, 20}) {
        const Matrix X = rng.matrix(40, k);
        const Matrix G = X.transpose() * X;
        CholeskyState chol;
        for (Index c = 0; c < k; ++c) chol = chol_append(chol, G.col(c).head(c), G(c, c));
        const Matrix L_ref = G.llt().matrixL();
        EXPECT_LE((chol.factor() - L_ref).norm(), 1e-10 * L_ref.norm()) << "k = " << k;
        EXPECT_LE((chol.gram() - G).norm(), 1e-10 * G.norm());
    }
}

TEST(GaussianQuantile, SpotValues) {
    EXPECT_EQ(gaussian_quantile(0.5), 0.0);
    // Frozen from the quadrature/bisection oracle.
    EXPECT_NEAR(gaussian_quantile(0.975), 1.959963984540057, 1e-9);
    EXPECT_NEAR(gaussian_quantile(1.0 - 0.05 / 400.0), 3.662259930887911, 1e-9);
}

TEST(GaussianQuantile, OracleAgreesWithFrozenValues) {
    EXPECT_NEAR(oracle::quantile(0.975), 1.959963984540057, 1e-9);
    EXPECT_NEAR(oracle::upper_quantile(0.05 / 400.0), 3.662259930887911, 1e-9);
}

TEST(GaussianQuantile, InvertsIntegratedCdfOnGrid) {
    for (int k = 0; k < 100; ++k) {
        const double z = -6.0 + 12.0 * k / 99.0;
        EXPECT_NEAR(gaussian_quantile(oracle::cdf(z)), z, 1e-8) << "z = " << z;
    }
}

TEST(GaussianQuantile, RejectsOutsideOpenInterval) {
    for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
        EXPECT_THROW(gaussian_quantile(p), Error);
    }
}

TEST(GaussianCdf, MatchesQuadrature) {
    for (double z : {-7.0, -3.0, -0.5, 0.0, 1.0, 2.5, 5.0}) {
        EXPECT_NEAR(gaussian_cdf(z), oracle::cdf(z), 1e-14);
    }
}

TEST(NormalStream, Replay) {
    NormalStream a = normal_stream(42);
    NormalStream b = normal_stream(42);
    for (int k = 0; k < 1000; ++k) {
        const double x = a();
        const double y = b();
        EXPECT_EQ(std::memcmp(&x, &y, sizeof x), 0);
    }
}

TEST(NormalStream, MomentsOverMillionDraws) {
    NormalStream s = normal_stream(2024);
    const int N = 1000000;
    double sum = 0.0;
    double sumsq = 0.0;
    for (int k = 0; k < N; ++k) {
        const double x = s();
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / N;
    const double var = sumsq / N - mean * mean;
    EXPECT_LT(std::abs(mean), 0.004);
    EXPECT_LT(std::abs(var - 1.0), 8.0 / std::sqrt(double(N)));
}

TEST(NormalStream, DistinctSeedsDiffer) {
    std::set<std::vector<double>> seen;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        NormalStream s = normal_stream(seed);
        std::vector<double> head(16);
        for (auto& v : head) v = s();
        EXPECT_TRUE(seen.insert(head).second) << "seed " << seed;
    }
}

TEST(MixSeed, StreamsAreDistinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 1000; ++r) seen.insert(mix_seed(7, r));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(mix_seed(7, 0), mix_seed(8, 0));
}

TEST(Standardize, UnitColumnUnchanged) {
    Matrix X(4, 1);
    X << 1, -1, 1, -1;
    const Standardized s = standardize_columns(X);
    EXPECT_EQ(s.X, X);
    EXPECT_DOUBLE_EQ(s.scales[0], 1.0);
}

TEST(Standardize, ConstantTwo) {
    const Matrix X = Matrix::Constant(5, 1, 2.0);
    const Standardized s = standardize_columns(X);
    EXPECT_DOUBLE_EQ(s.scales[0], 2.0);
    EXPECT_TRUE(s.X.isApprox(Matrix::Ones(5, 1)));
}

TEST(Standardize, RandomColumnsHaveUnitSecondMoment) {
    gen::Rng rng(9);
    const Matrix X = rng.matrix(37, 6) * 3.7;
    const Standardized s = standardize_columns(X);
    for (Index j = 0; j < X.cols(); ++j) {
        EXPECT_NEAR(s.X.col(j).squaredNorm() / 37.0, 1.0, 1e-12);
        EXPECT_TRUE((s.X.col(j) * s.scales[j]).isApprox(X.col(j), 1e-14));
    }
}

TEST(Standardize, Idempotent) {
    gen::Rng rng(10);
    const Standardized once = standardize_columns(rng.matrix(20, 4));
    const Standardized twice = standardize_columns(once.X);
    EXPECT_LE((twice.X - once.X).cwiseAbs().maxCoeff(), 1e-14);
    for (Index j = 0; j < 4; ++j) EXPECT_NEAR(twice.scales[j], 1.0, 1e-14);
}

TEST(Standardize, ZeroColumnThrows) {
    Matrix X = Matrix::Ones(5, 2);
    X.col(1).setZero();
    try {
        standardize_columns(X);
        FAIL() << "expected ZeroColumn";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroColumn);
    }
}
