#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lpcoreset/lewis.hpp"

using namespace lpcoreset;

namespace {

Matrix gaussian(int n, int d, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Matrix m(n, d);
    for (int i = 0; i < m.size(); ++i) m.data()[i] = nd(gen);
    return m;
}

// Hat-matrix diagonal through the normal equations; full-rank inputs only.
Vector hat_diagonal(const Matrix& a) {
    const Eigen::MatrixXd gram = a.transpose() * a;
    const Eigen::MatrixXd inv = gram.fullPivLu().inverse();
    Vector out(a.rows());
    for (int i = 0; i < a.rows(); ++i) out[i] = a.row(i) * inv * a.row(i).transpose();
    return out;
}

} // namespace

TEST(Leverage, IdentityAllOnes) {
    const auto tau = leverage_scores(DenseMatrix::identity(5));
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(tau[i], 1.0, 1e-14);
}

TEST(Leverage, OnesColumnUniform) {
    const auto tau = leverage_scores(DenseMatrix(Matrix::Ones(8, 1)));
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(tau[i], 0.125, 1e-14);
}

TEST(Leverage, ThreeByTwoExample) {
    std::vector<double> v{1, 0, 0, 1, 1, 1};
    const auto tau = leverage_scores(DenseMatrix(3, 2, v));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(tau[i], 2.0 / 3.0, 1e-14);
}

TEST(Leverage, MatchesNormalEquations) {
    const Matrix a = gaussian(60, 4, 5);
    const auto tau = leverage_scores(DenseMatrix(a));
    const Vector oracle = hat_diagonal(a);
    for (int i = 0; i < 60; ++i) EXPECT_NEAR(tau[i], oracle[i], 1e-12);
}

TEST(Leverage, SumEqualsRank) {
    Matrix a = gaussian(40, 5, 8);
    a.col(4) = a.col(0) + 2.0 * a.col(1); // rank 4
    const auto tau = leverage_scores(DenseMatrix(a));
    EXPECT_NEAR(tau.sum(), 4.0, 1e-9);
    EXPECT_EQ(numerical_rank(DenseMatrix(a)), 4u);
}

TEST(Leverage, ZeroMatrixRankZero) {
    const auto tau = leverage_scores(DenseMatrix::zeros(4, 3));
    EXPECT_EQ(tau.sum(), 0.0);
}

TEST(Lewis, P2EqualsLeverage) {
    const Matrix a = gaussian(100, 6, 1);
    const auto res = lewis_weights(DenseMatrix(a), 2.0);
    const auto tau = leverage_scores(DenseMatrix(a));
    for (int i = 0; i < 100; ++i) EXPECT_NEAR(res.weights[i], tau[i], 1e-10);
    EXPECT_TRUE(res.converged);
}

TEST(Lewis, OnesColumnUniformAnyP) {
    for (double p : {1.0, 1.5, 3.0, 5.0}) {
        const auto res = lewis_weights(DenseMatrix(Matrix::Ones(10, 1)), p);
        for (int i = 0; i < 10; ++i) EXPECT_NEAR(res.weights[i], 0.1, 1e-10) << p;
    }
}

TEST(Lewis, ThreeByTwoFixedPointP1) {
    std::vector<double> v{1, 0, 0, 1, 1, 1};
    const DenseMatrix a(3, 2, v);
    const auto res = lewis_weights(a, 1.0, 5000, 1e-12);
    EXPECT_TRUE(res.converged);
    // Independent check of w_i = tau_i(W^{-1/2} A) via normal equations.
    Matrix m = a.values();
    for (int i = 0; i < 3; ++i) m.row(i) /= std::sqrt(res.weights[i]);
    const Vector tau = hat_diagonal(m);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(res.weights[i], tau[i], 1e-8);
    // Symmetric instance: every row carries the same weight.
    EXPECT_NEAR(res.weights[0], 2.0 / 3.0, 1e-8);
}

TEST(Lewis, FixedPointResidualAndNormalization) {
    for (double p : {1.0, 1.5, 3.0, 4.0, 6.0}) {
        const Matrix a = gaussian(80, 4, 10 + static_cast<unsigned>(p * 10));
        const auto res = lewis_weights(DenseMatrix(a), p);
        EXPECT_TRUE(res.converged) << p;
        EXPECT_LE(lewis_fixed_point_residual(DenseMatrix(a), res.weights, p), 1e-8) << p;
        EXPECT_GE(res.weights.sum(), 4.0 - 1e-9);
        EXPECT_LE(res.weights.sum(), 8.0 + 1e-9);
        EXPECT_GT(res.gamma, 0.0);
        EXPECT_LE(res.gamma, 1.0);
    }
}

TEST(Lewis, RejectsZeroMatrix) {
    EXPECT_THROW(lewis_weights(DenseMatrix::zeros(3, 2), 1.5), UsageError);
}

TEST(OneSided, ExactWeightsRatioOne) {
    const Matrix a = gaussian(50, 3, 4);
    const auto res = lewis_weights(DenseMatrix(a), 1.5);
    EXPECT_NEAR(one_sidedness_ratio(DenseMatrix(a), res.weights, 1.5), 1.0, 1e-8);
}

TEST(OneSided, ScalingAtP2) {
    const Matrix a = gaussian(30, 3, 9);
    const auto tau = leverage_scores(DenseMatrix(a));
    const WeightVector doubled(Vector(3.0 * tau.values()));
    EXPECT_NEAR(one_sidedness_ratio(DenseMatrix(a), doubled, 2.0), 3.0, 1e-10);
}

TEST(OneSided, DampedP4InUnitInterval) {
    const Matrix a = gaussian(20, 3, 12);
    const auto res = lewis_weights(DenseMatrix(a), 4.0, 3);
    const double r = one_sidedness_ratio(DenseMatrix(a), res.weights, 4.0);
    EXPECT_GT(r, 0.0);
    EXPECT_LE(std::min(1.0, r), 1.0);
}

TEST(OneSided, AllZeroWeightsIsDomainError) {
    EXPECT_THROW(one_sidedness_ratio(DenseMatrix(gaussian(5, 2, 1)), WeightVector::constant(5, 0.0), 1.5),
                 DomainError);
}

// |[Ax]_i|^p <= gamma^{-1} w_i ||Ax||_p^p (p < 2) and
// <= gamma^{-p/2} ||w||_1^{p/2-1} w_i ||Ax||_p^p (p > 2).
TEST(Lewis, SensitivityBounds) {
    std::mt19937_64 gen(77);
    std::normal_distribution<double> nd;
    for (double p : {1.0, 1.5, 3.0, 4.5}) {
        Matrix a = gaussian(120, 4, 100 + static_cast<unsigned>(p * 3));
        for (int i = 0; i < 6; ++i) a.row(i) *= 15.0;
        const auto res = lewis_weights(DenseMatrix(a), p);
        const double wsum = res.weights.sum();
        for (int trial = 0; trial < 300; ++trial) {
            Vector x(4);
            for (int j = 0; j < 4; ++j) x[j] = nd(gen);
            const Vector ax = a * x;
            double total = 0.0;
            for (int i = 0; i < ax.size(); ++i) total += std::pow(std::fabs(ax[i]), p);
            for (int i = 0; i < ax.size(); ++i) {
                const double lhs = std::pow(std::fabs(ax[i]), p);
                const double bound = p <= 2.0
                                         ? res.weights[i] * total / res.gamma
                                         : std::pow(res.gamma, -p / 2) * std::pow(wsum, p / 2 - 1) * res.weights[i] * total;
                ASSERT_LE(lhs, bound * (1 + 1e-9) + 1e-9) << "p=" << p << " row " << i;
            }
        }
    }
}

TEST(Lewis, L2BoundAboveTwo) {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    for (double p : {3.0, 5.0}) {
        const Matrix a = gaussian(90, 3, 21);
        const auto res = lewis_weights(DenseMatrix(a), p);
        const double wsum = res.weights.sum();
        for (int trial = 0; trial < 200; ++trial) {
            Vector x(3);
            for (int j = 0; j < 3; ++j) x[j] = nd(gen);
            const Vector ax = a * x;
            double l2 = 0.0, lp = 0.0;
            for (int i = 0; i < ax.size(); ++i) {
                l2 += std::pow(res.weights[i], 1.0 - 2.0 / p) * ax[i] * ax[i];
                lp += std::pow(std::fabs(ax[i]), p);
            }
            EXPECT_LE(std::sqrt(l2), std::pow(wsum, 0.5 - 1.0 / p) * std::pow(lp, 1.0 / p) * (1 + 1e-9));
        }
    }
}
