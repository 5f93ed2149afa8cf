#ifndef LPCORESET_TESTS_ACCEPTANCE_COMMON_HPP
#define LPCORESET_TESTS_ACCEPTANCE_COMMON_HPP

// Fixtures shared by the acceptance binary and the calibration program.

#include <cmath>
#include <cstdint>
#include <vector>

#include "lpcoreset/lpcoreset.hpp"

namespace fixtures {

using namespace lpcoreset;

inline constexpr std::size_t kRegN = 2000;
inline constexpr std::size_t kRegD = 5;
inline constexpr std::size_t kRegMaxM = 100;
inline constexpr std::uint64_t kInstanceSeed = 20240611;

struct Regression {
    DenseMatrix A;
    DenseMatrix B;
};

struct Parts {
    Matrix a;  // n x d
    Matrix x0; // d x 100
    Matrix e;  // n x 100
};

/// n x d design with log-normal row scales, planted X0, and residual rows
/// r_i times standard Gaussian entries with r_i Pareto(1.5).
inline Parts regression_parts(std::uint64_t seed) {
    Engine gen(seed);
    Parts out;
    out.a = gaussian_matrix(kRegN, kRegD, gen);
    std::normal_distribution<double> ln(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < out.a.rows(); ++i) out.a.row(i) *= std::exp(ln(gen));
    out.x0 = gaussian_matrix(kRegD, kRegMaxM, gen);
    out.e = gaussian_matrix(kRegN, kRegMaxM, gen);
    for (Eigen::Index i = 0; i < out.e.rows(); ++i) out.e.row(i) *= std::pow(1.0 - u(gen), -1.0 / 1.5);
    return out;
}

/// B = A X0 + E. B for m < 100 is the leading m columns of the m = 100 case.
inline Regression regression_family(std::size_t m, std::uint64_t seed = kInstanceSeed) {
    const Parts pt = regression_parts(seed);
    const Matrix b = pt.a * pt.x0 + pt.e;
    return {DenseMatrix(pt.a), DenseMatrix(Matrix(b.leftCols(static_cast<Eigen::Index>(m))))};
}

/// Random t x m embedding for the weak-coreset criterion.
inline DenseMatrix random_g(std::size_t t, std::size_t m, std::uint64_t seed = kInstanceSeed + 1) {
    Engine gen(seed);
    return DenseMatrix(gaussian_matrix(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m), gen));
}

/// Same design and residuals, signal planted through G: B = A X0' G + E
/// with X0' the leading t columns of X0.
inline Regression regression_family_through(const DenseMatrix& g, std::uint64_t seed = kInstanceSeed) {
    const Parts pt = regression_parts(seed);
    const auto m = static_cast<Eigen::Index>(g.cols());
    const Matrix b = pt.a * pt.x0.leftCols(static_cast<Eigen::Index>(g.rows())) * g.values() + pt.e.leftCols(m);
    return {DenseMatrix(pt.a), DenseMatrix(b)};
}

/// 1000 x 4 single-response instance for difference preservation.
inline Regression difference_family(std::uint64_t seed = kInstanceSeed + 2) {
    Engine gen(seed);
    Matrix a = gaussian_matrix(1000, 4, gen);
    std::normal_distribution<double> ln(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) *= std::exp(ln(gen));
    const Vector x0 = gaussian_vector(4, gen);
    Vector b = a * x0;
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] += std::pow(1.0 - u(gen), -1.0 / 1.5) * gaussian_vector(1, gen)[0];
    return {DenseMatrix(a), DenseMatrix(Matrix(b))};
}

/// Low-rank-plus-noise matrix for the spanning-coreset criterion.
inline DenseMatrix spanning_family(std::uint64_t seed = kInstanceSeed + 3) {
    return low_rank_plus_noise(2000, 50, 5, 0.5, seed);
}

/// Optimal rank-k (p = 2) cost: sum of squared trailing singular values.
inline double svd_optimal_cost(const Matrix& a, std::size_t k) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(a)};
    const Vector s = svd.singularValues();
    double c = 0.0;
    for (Eigen::Index i = static_cast<Eigen::Index>(k); i < s.size(); ++i) c += s[i] * s[i];
    return c;
}

// Calibration uses seeds from kCalibrationSeedBase on; acceptance runs use
// seeds from 1.
inline constexpr std::uint64_t kCalibrationSeedBase = 900000;

} // namespace fixtures

#endif
