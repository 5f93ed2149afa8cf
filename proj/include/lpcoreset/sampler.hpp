#ifndef LPCORESET_SAMPLER_HPP
#define LPCORESET_SAMPLER_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lpcoreset/errors.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

/// Sparse diagonal lp sampling matrix: kept row i carries scale q_i^{-1/p}.
struct SamplingMatrix {
    struct Entry {
        std::size_t row;
        double scale;
        friend bool operator==(const Entry&, const Entry&) = default;
    };

    std::size_t n = 0;
    double p = 1.0;
    std::vector<Entry> kept;
    std::uint64_t seed = 0;

    std::size_t nnz() const { return kept.size(); }

    static SamplingMatrix identity(std::size_t n, double p) {
        SamplingMatrix s;
        s.n = n;
        s.p = p;
        s.kept.reserve(n);
        for (std::size_t i = 0; i < n; ++i) s.kept.push_back({i, 1.0});
        return s;
    }

    friend bool operator==(const SamplingMatrix&, const SamplingMatrix&) = default;
};

/// Stream tag separating row-sampling draws from other uses of a seed.
inline constexpr std::uint64_t kSamplerStream = 0x5a4d504c45ULL;

inline SamplingMatrix draw_sampling_matrix(const WeightVector& q, double p, std::uint64_t seed) {
    detail::require(p >= 1.0 && std::isfinite(p), "draw_sampling_matrix: p must be >= 1");
    SamplingMatrix s;
    s.n = q.size();
    s.p = p;
    s.seed = seed;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double qi = q[i];
        if (qi > 1.0)
            throw UsageError("draw_sampling_matrix: probability q[" + std::to_string(i) +
                             "] = " + std::to_string(qi) + " outside [0,1]");
        if (qi == 0.0) continue;
        if (qi == 1.0) {
            s.kept.push_back({i, 1.0});
            continue;
        }
        if (counter_uniform(seed, kSamplerStream, i) < qi)
            s.kept.push_back({i, std::pow(qi, -1.0 / p)});
    }
    return s;
}

/// Rows of M selected by S, each multiplied by its scale.
inline Matrix apply(const SamplingMatrix& s, const Matrix& m) {
    detail::require(static_cast<std::size_t>(m.rows()) == s.n,
                    "apply: matrix has " + std::to_string(m.rows()) + " rows, sampling matrix expects " +
                        std::to_string(s.n));
    Matrix out(static_cast<Eigen::Index>(s.kept.size()), m.cols());
    for (std::size_t k = 0; k < s.kept.size(); ++k)
        out.row(static_cast<Eigen::Index>(k)) = s.kept[k].scale * m.row(static_cast<Eigen::Index>(s.kept[k].row));
    return out;
}

inline DenseMatrix apply(const SamplingMatrix& s, const DenseMatrix& m) {
    return DenseMatrix(apply(s, m.values()));
}

/// Per-kept-row multiplier on |.|^p, i.e. 1/q_i.
inline Vector pth_power_scales(const SamplingMatrix& s) {
    Vector out(static_cast<Eigen::Index>(s.kept.size()));
    for (std::size_t k = 0; k < s.kept.size(); ++k)
        out[static_cast<Eigen::Index>(k)] = abs_pow(s.kept[k].scale, s.p);
    return out;
}

inline std::vector<std::size_t> kept_rows(const SamplingMatrix& s) {
    std::vector<std::size_t> out;
    out.reserve(s.kept.size());
    for (const auto& e : s.kept) out.push_back(e.row);
    return out;
}

inline WeightVector clip_probabilities(const WeightVector& raw) {
    return WeightVector(Vector(raw.values().cwiseMin(1.0)));
}

} // namespace lpcoreset

#endif
