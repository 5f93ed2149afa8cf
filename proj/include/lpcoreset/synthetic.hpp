#ifndef LPCORESET_SYNTHETIC_HPP
#define LPCORESET_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lpcoreset/errors.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

enum class SyntheticKind { GaussianMixture, LowRankPlusNoise, HeavyTailResidual };

inline SyntheticKind parse_synthetic_kind(const std::string& s) {
    if (s == "gaussian-mixture") return SyntheticKind::GaussianMixture;
    if (s == "low-rank-plus-noise") return SyntheticKind::LowRankPlusNoise;
    if (s == "heavy-tail-residual") return SyntheticKind::HeavyTailResidual;
    throw UsageError("unknown synthetic kind '" + s +
                     "' (expected gaussian-mixture, low-rank-plus-noise or heavy-tail-residual)");
}

struct SyntheticParams {
    std::size_t n = 1000;
    std::size_t d = 10;
    // gaussian-mixture
    std::size_t components = 3;
    double center_spread = 5.0;
    double variance = 1.0;
    // low-rank-plus-noise
    std::size_t rank = 5;
    double noise = 0.1;
    // heavy-tail-residual
    std::size_t responses = 1;
    double outlier_fraction = 0.05;
    double outlier_magnitude = 100.0;
    double base_noise = 1.0;
};

/// Rows x_i = c_{z_i} + sqrt(variance) g_i with z_i uniform over the
/// components and centers c ~ N(0, center_spread^2 I).
inline DenseMatrix gaussian_mixture(std::size_t n, std::size_t d, std::size_t components, double center_spread,
                                    double variance, std::uint64_t seed) {
    detail::require(n >= 1 && d >= 1, "gaussian_mixture: n and d must be >= 1");
    detail::require(components >= 1, "gaussian_mixture: need at least one component");
    detail::require(center_spread >= 0.0 && variance >= 0.0, "gaussian_mixture: spread and variance must be >= 0");
    Engine gen(seed);
    const Matrix centers = center_spread * gaussian_matrix(static_cast<Eigen::Index>(components),
                                                          static_cast<Eigen::Index>(d), gen);
    std::uniform_int_distribution<std::size_t> pick(0, components - 1);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    const double sd = std::sqrt(variance);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto z = static_cast<Eigen::Index>(pick(gen));
        x.row(i) = centers.row(z) + sd * gaussian_vector(x.cols(), gen).transpose();
    }
    return DenseMatrix(std::move(x));
}

/// U V + noise * N with U (n x k), V (k x d), N all standard Gaussian.
inline DenseMatrix low_rank_plus_noise(std::size_t n, std::size_t d, std::size_t k, double noise, std::uint64_t seed) {
    detail::require(n >= 1 && d >= 1, "low_rank_plus_noise: n and d must be >= 1");
    detail::require(k >= 1 && k <= std::min(n, d), "low_rank_plus_noise: need 1 <= k <= min(n, d)");
    detail::require(noise >= 0.0, "low_rank_plus_noise: noise must be >= 0");
    Engine gen(seed);
    const Matrix u = gaussian_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k), gen);
    const Matrix v = gaussian_matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d), gen);
    Matrix x = u * v;
    if (noise > 0.0) x += noise * gaussian_matrix(x.rows(), x.cols(), gen);
    return DenseMatrix(std::move(x));
}

struct HeavyTailInstance {
    DenseMatrix A;
    DenseMatrix B;
    DenseMatrix X0;
    /// Rows whose residual B - A X0 has magnitude outlier_magnitude.
    std::vector<std::size_t> outlier_rows;
};

/// A Gaussian, B = A X0 + base_noise * N, then exactly round(f n) rows
/// (chosen uniformly) get residual entries of magnitude M with random sign.
inline HeavyTailInstance heavy_tail_residual(const SyntheticParams& prm, std::uint64_t seed) {
    detail::require(prm.n >= 1 && prm.d >= 1 && prm.responses >= 1, "heavy_tail_residual: sizes must be >= 1");
    detail::require(prm.outlier_fraction >= 0.0 && prm.outlier_fraction <= 1.0,
                    "heavy_tail_residual: outlier fraction must lie in [0,1]");
    detail::require(prm.outlier_magnitude > 0.0 && prm.base_noise >= 0.0,
                    "heavy_tail_residual: magnitudes must be nonnegative");
    Engine gen(seed);
    const auto n = static_cast<Eigen::Index>(prm.n);
    const Matrix a = gaussian_matrix(n, static_cast<Eigen::Index>(prm.d), gen);
    const Matrix x0 = gaussian_matrix(static_cast<Eigen::Index>(prm.d), static_cast<Eigen::Index>(prm.responses), gen);
    Matrix r = prm.base_noise * gaussian_matrix(n, x0.cols(), gen);

    std::vector<std::size_t> idx(prm.n);
    for (std::size_t i = 0; i < prm.n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), gen);
    const auto count = static_cast<std::size_t>(std::llround(prm.outlier_fraction * static_cast<double>(prm.n)));
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i : idx)
        for (Eigen::Index j = 0; j < r.cols(); ++j)
            r(static_cast<Eigen::Index>(i), j) = coin(gen) ? prm.outlier_magnitude : -prm.outlier_magnitude;

    HeavyTailInstance out;
    out.A = DenseMatrix(a);
    out.B = DenseMatrix(Matrix(a * x0 + r));
    out.X0 = DenseMatrix(x0);
    out.outlier_rows = std::move(idx);
    return out;
}

/// Single-matrix form. The heavy-tail kind returns [A | B].
inline DenseMatrix generate_synthetic(SyntheticKind kind, const SyntheticParams& prm, std::uint64_t seed) {
    switch (kind) {
    case SyntheticKind::GaussianMixture:
        return gaussian_mixture(prm.n, prm.d, prm.components, prm.center_spread, prm.variance, seed);
    case SyntheticKind::LowRankPlusNoise:
        return low_rank_plus_noise(prm.n, prm.d, prm.rank, prm.noise, seed);
    case SyntheticKind::HeavyTailResidual: {
        const HeavyTailInstance h = heavy_tail_residual(prm, seed);
        Matrix ab(h.A.values().rows(), h.A.values().cols() + h.B.values().cols());
        ab << h.A.values(), h.B.values();
        return DenseMatrix(std::move(ab));
    }
    }
    throw UsageError("generate_synthetic: unknown kind");
}

// ---------------------------------------------------------------------------
// 28x28 digit-like surrogate with values in [0,1]
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDigitSide = 28;
inline constexpr std::size_t kDigitFeatures = kDigitSide * kDigitSide;
inline constexpr std::size_t kDigitRows = 60000;

namespace detail {

/// Ten stroke templates, each a sum of Gaussian blobs along a random path.
inline Matrix digit_templates(std::uint64_t seed) {
    Engine gen(derive_seed(seed, 0xd161ULL));
    std::uniform_real_distribution<double> pos(6.0, 21.0);
    Matrix t = Matrix::Zero(10, static_cast<Eigen::Index>(kDigitFeatures));
    for (Eigen::Index c = 0; c < 10; ++c) {
        for (int stroke = 0; stroke < 3; ++stroke) {
            const double x0 = pos(gen), y0 = pos(gen), x1 = pos(gen), y1 = pos(gen);
            for (int s = 0; s <= 12; ++s) {
                const double cx = x0 + (x1 - x0) * s / 12.0, cy = y0 + (y1 - y0) * s / 12.0;
                for (std::size_t r = 0; r < kDigitSide; ++r)
                    for (std::size_t q = 0; q < kDigitSide; ++q) {
                        const double dx = static_cast<double>(q) - cx, dy = static_cast<double>(r) - cy;
                        t(c, static_cast<Eigen::Index>(r * kDigitSide + q)) += std::exp(-(dx * dx + dy * dy) / 2.0);
                    }
            }
        }
        t.row(c) /= t.row(c).maxCoeff();
    }
    return t;
}

inline double counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const double u1 = counter_uniform(seed, stream, 2 * counter);
    const double u2 = counter_uniform(seed, stream, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace detail

/// Columns `cols` of the n x 784 surrogate. Entry (i, j) is a function of
/// (seed, i, j) only, so any column subset matches the full matrix.
/// Row i picks a template and intensity; pixels where the template exceeds
/// 0.05 get the scaled template plus N(0, 0.15^2) noise, clipped to [0,1].
/// Other pixels are 0.
inline DenseMatrix digits_surrogate_columns(std::size_t n, const std::vector<std::size_t>& cols, std::uint64_t seed) {
    for (std::size_t c : cols)
        detail::require(c < kDigitFeatures, "digits_surrogate_columns: column index out of range");
    const Matrix t = detail::digit_templates(seed);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < n; ++i) {
        const auto label = static_cast<Eigen::Index>(std::min(9.0, std::floor(10.0 * counter_uniform(seed, 1, i))));
        const double intensity = 0.6 + 0.4 * counter_uniform(seed, 2, i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const double tv = t(label, static_cast<Eigen::Index>(cols[k]));
            double v = 0.0;
            if (tv > 0.05)
                v = std::clamp(intensity * tv + 0.15 * detail::counter_gaussian(seed, 3, i * kDigitFeatures + cols[k]),
                               0.0, 1.0);
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
        }
    }
    return DenseMatrix(std::move(x));
}

inline DenseMatrix digits_surrogate(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> cols(kDigitFeatures);
    for (std::size_t j = 0; j < kDigitFeatures; ++j) cols[j] = j;
    return digits_surrogate_columns(n, cols, seed);
}

} // namespace lpcoreset

#endif
