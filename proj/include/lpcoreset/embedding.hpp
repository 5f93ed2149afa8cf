#ifndef LPCORESET_EMBEDDING_HPP
#define LPCORESET_EMBEDDING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "lpcoreset/errors.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

/// Gaussian map x -> scale * n^{-1/p} * G x whose lp norm tracks ||x||_2.
struct DvoretzkyEmbedding {
    Matrix G; // n_embed x k
    double p = 2.0;
    double scale = 1.0;
    double eps_target = 0.0;
    double size_constant = 50.0;
    std::uint64_t seed = 0;

    std::size_t n_embed() const { return static_cast<std::size_t>(G.rows()); }
    std::size_t k() const { return static_cast<std::size_t>(G.cols()); }
    double multiplier() const { return scale * std::pow(static_cast<double>(G.rows()), -1.0 / p); }
};

/// (E|N(0,1)|^p)^{-1/p}.
inline double gaussian_moment_scale(double p) {
    const double moment = std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(M_PI);
    return std::pow(moment, -1.0 / p);
}

/// Rows required: c * max(k / eps^2, k^{p/2} / eps).
inline std::size_t embedding_rows(std::size_t k, double p, double eps, double c) {
    const double kk = static_cast<double>(k);
    return static_cast<std::size_t>(std::ceil(c * std::max(kk / (eps * eps), std::pow(kk, p / 2.0) / eps)));
}

inline DvoretzkyEmbedding build_embedding_rows(std::size_t k, double p, double eps, std::uint64_t seed,
                                               std::size_t rows, double c) {
    DvoretzkyEmbedding e;
    Engine gen(seed);
    e.G = gaussian_matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k), gen);
    e.p = p;
    e.scale = gaussian_moment_scale(p);
    e.eps_target = eps;
    e.size_constant = c;
    e.seed = seed;
    return e;
}

inline DvoretzkyEmbedding build_embedding(std::size_t k, double p, double eps, std::uint64_t seed, double c = 50.0) {
    detail::require(k >= 1, "build_embedding: k must be >= 1");
    detail::require(p >= 1.0 && std::isfinite(p), "build_embedding: p must be a finite real >= 1");
    detail::require(eps > 0.0 && eps < 1.0 / p,
                    "build_embedding: eps must lie in (0, 1/p), got eps=" + std::to_string(eps));
    detail::require(c > 0.0, "build_embedding: size constant must be positive");
    return build_embedding_rows(k, p, eps, seed, embedding_rows(k, p, eps, c), c);
}

inline Vector embed(const DvoretzkyEmbedding& e, const Vector& x) {
    detail::require(static_cast<std::size_t>(x.size()) == e.k(), "embed: vector length must equal k");
    return e.multiplier() * (e.G * x);
}

/// M G^T scaled, so that ||embed_rows(M)||_{p,p} ~ ||M||_{p,2}.
inline Matrix embed_rows(const DvoretzkyEmbedding& e, const Matrix& m) {
    detail::require(static_cast<std::size_t>(m.cols()) == e.k(),
                    "embed_rows: matrix has " + std::to_string(m.cols()) + " columns, embedding expects " +
                        std::to_string(e.k()));
    return e.multiplier() * (m * e.G.transpose());
}

inline DenseMatrix embed_rows(const DvoretzkyEmbedding& e, const DenseMatrix& m) {
    return DenseMatrix(embed_rows(e, m.values()));
}

/// max | ||embed(x)||_p - 1 | over the canonical basis plus `directions`
/// uniformly random unit vectors.
inline double measure_distortion(const DvoretzkyEmbedding& e, std::size_t directions, std::uint64_t seed) {
    const Eigen::Index k = static_cast<Eigen::Index>(e.k());
    Engine gen(seed);
    Matrix dirs(static_cast<Eigen::Index>(directions) + k, k);
    dirs.topRows(k).setIdentity();
    if (directions) {
        dirs.bottomRows(static_cast<Eigen::Index>(directions)) =
            gaussian_matrix(static_cast<Eigen::Index>(directions), k, gen);
        for (Eigen::Index i = k; i < dirs.rows(); ++i) dirs.row(i).normalize();
    }
    double worst = 0.0;
    const Eigen::Index block = 256;
    for (Eigen::Index start = 0; start < dirs.rows(); start += block) {
        const Eigen::Index len = std::min(block, dirs.rows() - start);
        const Eigen::MatrixXd img = e.G * dirs.middleRows(start, len).transpose(); // n_embed x len
        for (Eigen::Index j = 0; j < len; ++j) {
            CompensatedSum acc;
            for (Eigen::Index i = 0; i < img.rows(); ++i) acc += abs_pow(img(i, j), e.p);
            const double norm = e.multiplier() * std::pow(acc.value(), 1.0 / e.p);
            worst = std::max(worst, std::fabs(norm - 1.0));
        }
    }
    return worst;
}

struct SelfTestedEmbedding {
    DvoretzkyEmbedding embedding;
    double distortion = 0.0;
    int doublings = 0;
    bool met = false;
};

/// Builds an embedding and doubles n_embed until the measured distortion is
/// at most eps (or max_doublings is reached).
inline SelfTestedEmbedding build_embedding_self_tested(std::size_t k, double p, double eps, std::uint64_t seed,
                                                       double c = 50.0, std::size_t directions = 2000,
                                                       int max_doublings = 6) {
    SelfTestedEmbedding out;
    out.embedding = build_embedding(k, p, eps, seed, c);
    std::size_t rows = out.embedding.n_embed();
    for (;;) {
        out.distortion = measure_distortion(out.embedding, directions, derive_seed(seed, 0xd15ULL));
        out.met = out.distortion <= eps;
        if (out.met || out.doublings >= max_doublings) break;
        rows *= 2;
        ++out.doublings;
        out.embedding = build_embedding_rows(k, p, eps, derive_seed(seed, static_cast<std::uint64_t>(out.doublings)),
                                             rows, c);
    }
    return out;
}

} // namespace lpcoreset

#endif
