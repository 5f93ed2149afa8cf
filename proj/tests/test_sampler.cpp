#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lpcoreset/sampler.hpp"

using namespace lpcoreset;

TEST(Sampler, AllOnesIsIdentity) {
    const auto s = draw_sampling_matrix(WeightVector::constant(7, 1.0), 1.5, 3);
    EXPECT_EQ(s, [] {
        auto id = SamplingMatrix::identity(7, 1.5);
        id.seed = 3;
        return id;
    }());
}

TEST(Sampler, AllZerosEmpty) {
    EXPECT_TRUE(draw_sampling_matrix(WeightVector::constant(7, 0.0), 1.0, 3).kept.empty());
}

TEST(Sampler, RejectsProbabilityAboveOne) {
    EXPECT_THROW(draw_sampling_matrix(WeightVector{0.5, 1.5}, 1.0, 0), UsageError);
}

TEST(Sampler, Reproducible) {
    const auto q = WeightVector::constant(1000, 0.3);
    EXPECT_EQ(draw_sampling_matrix(q, 2.0, 42), draw_sampling_matrix(q, 2.0, 42));
    EXPECT_NE(draw_sampling_matrix(q, 2.0, 42).kept, draw_sampling_matrix(q, 2.0, 43).kept);
}

TEST(Sampler, InvariantsOnKeptRows) {
    Vector q(500);
    for (int i = 0; i < 500; ++i) q[i] = (i % 7) / 6.0;
    const auto s = draw_sampling_matrix(WeightVector(q), 3.0, 9);
    for (std::size_t k = 0; k < s.kept.size(); ++k) {
        if (k) EXPECT_LT(s.kept[k - 1].row, s.kept[k].row);
        EXPECT_GE(s.kept[k].scale, 1.0);
        const double qi = q[static_cast<int>(s.kept[k].row)];
        EXPECT_GT(qi, 0.0);
        if (qi == 1.0) {
            EXPECT_EQ(s.kept[k].scale, 1.0);
        } else {
            EXPECT_NEAR(s.kept[k].scale, std::pow(qi, -1.0 / 3.0), 1e-14);
        }
    }
    std::size_t ones = 0;
    for (int i = 0; i < 500; ++i) ones += q[i] == 1.0;
    std::size_t kept_ones = 0;
    for (const auto& e : s.kept) kept_ones += q[static_cast<int>(e.row)] == 1.0;
    EXPECT_EQ(ones, kept_ones);
}

TEST(Sampler, HalfProbabilityCount) {
    const std::size_t n = 100000;
    const auto s = draw_sampling_matrix(WeightVector::constant(n, 0.5), 1.0, 2024);
    EXPECT_NEAR(static_cast<double>(s.nnz()), 0.5 * n, 5.0 * std::sqrt(static_cast<double>(n)));
}

TEST(Sampler, CountConcentration) {
    Vector q(400);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 400; ++i) q[i] = u(gen);
    const double mean = q.sum();
    const double sd = std::sqrt((q.array() * (1.0 - q.array())).sum());
    int inside = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto s = draw_sampling_matrix(WeightVector(q), 1.0, 5000 + trial);
        inside += std::fabs(static_cast<double>(s.nnz()) - mean) <= 4.0 * sd;
    }
    EXPECT_GE(inside, 990);
}

TEST(Sampler, UnbiasedL1) {
    const int n = 50;
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    Matrix y(n, 1);
    Vector q(n);
    for (int i = 0; i < n; ++i) {
        y(i, 0) = nd(gen);
        q[i] = 0.05 + 0.9 * (i % 10) / 9.0;
    }
    double exact = 0.0;
    for (int i = 0; i < n; ++i) exact += std::fabs(y(i, 0));
    double sum = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const Matrix sy = apply(draw_sampling_matrix(WeightVector(q), 1.0, 100 + t), y);
        sum += sy.cwiseAbs().sum();
    }
    EXPECT_NEAR(sum / trials, exact, 0.01 * exact);
}

TEST(Apply, IdentityUnchanged) {
    Matrix m(3, 2);
    m << 1, 2, 3, 4, 5, 6;
    EXPECT_EQ(apply(SamplingMatrix::identity(3, 1.0), m), m);
}

TEST(Apply, EmptyGivesZeroRows) {
    SamplingMatrix s;
    s.n = 3;
    const Matrix out = apply(s, Matrix::Ones(3, 4));
    EXPECT_EQ(out.rows(), 0);
    EXPECT_EQ(out.cols(), 4);
}

TEST(Apply, SingleRowHandComputed) {
    SamplingMatrix s;
    s.n = 3;
    s.p = 1.0;
    s.kept.push_back({2, std::pow(0.5, -1.0)});
    Matrix m(3, 1);
    m << 1, 5, 7;
    const Matrix out = apply(s, m);
    ASSERT_EQ(out.rows(), 1);
    EXPECT_DOUBLE_EQ(out(0, 0), 14.0);
}

TEST(Apply, ShapeMismatch) {
    EXPECT_THROW(apply(SamplingMatrix::identity(3, 1.0), Matrix::Ones(4, 1)), UsageError);
}

TEST(Clip, Elementwise) {
    const auto c = clip_probabilities(WeightVector{0.3, 2.0, 0.0});
    EXPECT_EQ(c[0], 0.3);
    EXPECT_EQ(c[1], 1.0);
    EXPECT_EQ(c[2], 0.0);
}

TEST(Clip, MixtureHandComputed) {
    const WeightVector w{0.2, 0.6, 0.05};
    const WeightVector v{0.1, 0.0, 0.9};
    const double alpha = 0.4, beta = 0.5;
    Vector raw(3);
    for (int i = 0; i < 3; ++i) raw[i] = w[i] / alpha + v[i] / beta;
    const auto c = clip_probabilities(WeightVector(raw));
    EXPECT_NEAR(c[0], 0.7, 1e-15);
    EXPECT_NEAR(c[1], 1.0, 1e-15);
    EXPECT_NEAR(c[2], 1.0, 1e-15);
}
