#include <cmath>

#include <gtest/gtest.h>

#include "lpcoreset/adversarial.hpp"
#include "lpcoreset/power_means.hpp"

using namespace lpcoreset;

namespace {

double exhaustive_correlation(const Matrix& v) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = i + 1; j < v.rows(); ++j)
            worst = std::max(worst, std::fabs(v.row(i).dot(v.row(j))) / std::sqrt(static_cast<double>(v.cols())));
    return worst;
}

bool all_signs(const Matrix& v) { return ((v.array() == 1.0) || (v.array() == -1.0)).all(); }

} // namespace

TEST(CodeSet, OneDimension) {
    EXPECT_EQ(generate_code_set(1, 2, 1.0, 1).vectors.rows(), 2u);
    EXPECT_EQ(generate_code_set(1, 2, 0.5, 1).vectors.rows(), 1u);
}

TEST(CodeSet, HadamardRowsAreOrthogonal) {
    const CodeSet cs = generate_code_set(8, 8, 0.0, 2);
    EXPECT_EQ(cs.vectors.rows(), 8u);
    EXPECT_EQ(cs.max_correlation, 0.0);
    EXPECT_TRUE(all_signs(cs.vectors.values()));
    const Matrix h = hadamard(8);
    EXPECT_TRUE((h * h.transpose()).isApprox(8.0 * Matrix::Identity(8, 8)));
}

TEST(CodeSet, GreedySetVerifiedPairwise) {
    const CodeSet cs = generate_code_set(63, 100, 3.0, 3);
    EXPECT_EQ(cs.vectors.rows(), 100u);
    EXPECT_TRUE(all_signs(cs.vectors.values()));
    const double c = exhaustive_correlation(cs.vectors.values());
    EXPECT_DOUBLE_EQ(cs.max_correlation, c);
    EXPECT_LE(c, 3.0 + 1e-12);
}

TEST(CodeSet, PartialSetReported) {
    const CodeSet cs = generate_code_set(5, 1000, 0.5, 4, 2000);
    EXPECT_LT(cs.vectors.rows(), 1000u);
    EXPECT_EQ(cs.target_size, 1000u);
    EXPECT_LE(exhaustive_correlation(cs.vectors.values()), 0.5 + 1e-12);
}

TEST(StrongLb, TinyShapes) {
    const StrongLbInstance inst = strong_lb_instance(3, 0.5, 3.0, 5);
    const std::size_t s = inst.code.vectors.rows();
    EXPECT_EQ(inst.multiplicity, 8u);
    EXPECT_FALSE(inst.multiplicity_capped);
    EXPECT_EQ(inst.A.rows(), s * 8);
    EXPECT_EQ(inst.A.cols(), 3u);
    EXPECT_EQ(inst.B.rows(), s * 8);
    EXPECT_EQ(inst.B.cols(), s * 8);
}

TEST(StrongLb, ZeroQueryCost) {
    const StrongLbInstance inst = strong_lb_instance(3, 0.5, 3.0, 6);
    const double m = static_cast<double>(inst.A.rows());
    const Matrix x = Matrix::Zero(3, inst.A.rows());
    const double cost = entrywise_lp_norm(DenseMatrix(Matrix(inst.A.values() * x - inst.B.values())), 3.0,
                                          NormPower::PthPower);
    EXPECT_NEAR(cost, m * 27.0, 1e-12 * m * 27.0);
}

TEST(StrongLb, MultiplicityCapAndRowCap) {
    const StrongLbInstance inst = strong_lb_instance(3, 0.1, 3.0, 7);
    EXPECT_TRUE(inst.multiplicity_capped);
    EXPECT_EQ(inst.multiplicity, kMaxGroupMultiplicity);
    EXPECT_EQ(inst.uncapped_multiplicity, 1000u);
    EXPECT_THROW(strong_lb_instance(15, 0.1, 3.0, 8), UsageError);
}

TEST(StrongLb, WeakVariantMultiplicity) {
    const StrongLbInstance inst = strong_lb_instance(3, 0.5, 3.0, 9, 2);
    EXPECT_EQ(inst.multiplicity, 2u);
}

TEST(StrongLb, AdversarialRowCostsMatchDirectEvaluation) {
    const StrongLbInstance inst = strong_lb_instance(7, 0.25, 3.0, 10);
    const std::size_t m = inst.A.rows();
    Engine gen(11);
    const std::vector<std::size_t> t = detail::uniform_subset(m, m / 16, gen);
    const Matrix r = inst.A.values() * adversarial_query(inst, t).values() - inst.B.values();
    for (std::size_t i = 0; i < m; i += 13) {
        double direct = 0.0;
        for (Eigen::Index j = 0; j < r.cols(); ++j) direct += std::pow(std::fabs(r(static_cast<Eigen::Index>(i), j)), 3.0);
        EXPECT_NEAR(adversarial_row_cost(inst, t, i), direct, 1e-10 * direct);
    }
}

TEST(StrongLb, InTCostIdentityWithMeasuredConstant) {
    const StrongLbInstance inst = strong_lb_instance(7, 0.25, 3.0, 12);
    const std::size_t m = inst.A.rows();
    Engine gen(13);
    const std::vector<std::size_t> t = detail::uniform_subset(m, m / 16, gen);
    const double d = 7.0, eps = 0.25, p = 3.0, c = inst.correlation_constant;
    for (std::size_t i : t) {
        std::size_t same = 0;
        for (std::size_t j : t) same += inst.group[j] == inst.group[i];
        const double upper = std::pow((1 - eps) * d, p) + (same - 1) * std::pow(eps * d, p) +
                             (t.size() - same) * std::pow(eps, p) * std::pow(c, p) * std::pow(d, p / 2);
        const double lower = std::pow((1 - eps) * d, p) + (same - 1) * std::pow(eps * d, p);
        const double got = adversarial_row_cost(inst, t, i);
        EXPECT_LE(got, upper * (1 + 1e-12));
        EXPECT_GE(got, lower * (1 - 1e-12));
    }
}

TEST(SpanningLb, SmallMatrix) {
    Matrix want(3, 4);
    want << 2, 1, 0, 0, 2, 0, 1, 0, 2, 0, 0, 1;
    EXPECT_EQ(spanning_lb_instance(3, 1, 2.0).values(), want);
    EXPECT_THROW(spanning_lb_instance(3, 1, 1.5), UsageError);
}

TEST(SpanningLb, BlockDiagonal) {
    const Matrix m = spanning_lb_instance(3, 2, 2.0).values();
    EXPECT_EQ(m.rows(), 6);
    EXPECT_EQ(m.cols(), 8);
    EXPECT_EQ(m.block(0, 4, 3, 4).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(m.block(3, 4, 3, 4), spanning_lb_instance(3, 1, 2.0).values());
}

TEST(SpanningLb, UpperBoundDirection) {
    for (std::size_t n : {6, 9, 12})
        for (double p : {1.0, 2.0, 3.0}) {
            const Matrix a = spanning_lb_instance(n, 1, 2.0).values();
            const double eps = 1.0 / static_cast<double>(n);
            const double bound = n * std::pow((1 - eps) * (1 - eps) + eps * eps * (n - 1), p / 2);
            EXPECT_LE(spanning_lb_upper_bound(a, p), bound * (1 + 1e-12));
            EXPECT_LE(spanning_lb_upper_bound(a, p), n * std::pow(1 - eps, p / 2) * (1 + 1e-12));
        }
}

TEST(SpanningLb, SingleRowsMissTheBarAtN6) {
    const Matrix a = spanning_lb_instance(6, 1, 2.0).values();
    const double ub = spanning_lb_upper_bound(a, 2.0);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_GT(best_rank1_in_span(a, {i}, 2.0), (1 + 1.0 / 6) * ub);
}

TEST(SpanningLb, BestInFullSpanReachesBound) {
    const Matrix a = spanning_lb_instance(6, 1, 2.0).values();
    std::vector<std::size_t> all(6);
    for (std::size_t i = 0; i < 6; ++i) all[i] = i;
    EXPECT_LE(best_rank1_in_span(a, all, 2.0), spanning_lb_upper_bound(a, 2.0) * (1 + 1e-9));
}

TEST(Rank1Cost, Direct) {
    Matrix a(2, 2);
    a << 1, 0, 0, 1;
    Vector y(2);
    y << 1, 0;
    EXPECT_DOUBLE_EQ(rank1_cost(a, y, 1.5), 1.0);
    EXPECT_THROW(rank1_cost(a, Vector::Zero(2), 1.0), UsageError);
}
