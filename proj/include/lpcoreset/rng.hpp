#ifndef LPCORESET_RNG_HPP
#define LPCORESET_RNG_HPP

#include <cstdint>
#include <random>

#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based uniform in [0,1): depends only on (seed, stream, counter).
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const std::uint64_t h = mix64(mix64(seed ^ mix64(stream)) + counter);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Derive an independent child seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed * 0x2545f4914f6cdd1dULL + mix64(tag));
}

using Engine = std::mt19937_64;

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Engine& gen) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(gen);
    return m;
}

inline Vector gaussian_vector(Eigen::Index n, Engine& gen) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(gen);
    return v;
}

} // namespace lpcoreset

#endif
