#ifndef LPCORESET_SUBSPACE_HPP
#define LPCORESET_SUBSPACE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "lpcoreset/coresets.hpp"
#include "lpcoreset/embedding.hpp"
#include "lpcoreset/errors.hpp"
#include "lpcoreset/lewis.hpp"
#include "lpcoreset/sampler.hpp"
#include "lpcoreset/solver.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

struct SubspaceProblem {
    DenseMatrix A;
    std::size_t k = 1;
    double p = 2.0;

    void validate() const {
        detail::require(p >= 1.0 && std::isfinite(p), "SubspaceProblem: p must be a finite real >= 1");
        detail::require(k >= 1 && k <= std::min(A.rows(), A.cols()),
                        "SubspaceProblem: need 1 <= k <= min(n, d), got k=" + std::to_string(k));
    }
};

struct SpanningCoreset {
    std::vector<std::size_t> row_indices;
    DenseMatrix subspace_basis; // orthonormal rows
    double cost = 0.0;
    /// Full-data cost of span(V) used as the design in the sampled solve.
    double initial_cost = 0.0;
    DenseMatrix V;     // d x k
    DenseMatrix X_hat; // k x d
    /// max over basis vectors of the distance to the span of the selected rows.
    double span_residual = 0.0;
    double alpha = 0.0;
    bool used_embedding = false;
    bool prereduced = false;
};

struct SubspaceOptions {
    double delta = 0.1;
    double c_alpha = 1.0;
    int refine_steps = 20;
    bool use_embedding = false;
    double n_embed_const = 50.0;
    std::size_t prereduce_threshold = 10000;
    SolveOptions solve;
};

namespace detail {

inline Matrix orthonormality_defect(const Matrix& basis) {
    return basis * basis.transpose() - Matrix::Identity(basis.rows(), basis.rows());
}

inline double projection_cost(const Matrix& a, const Matrix& basis, double p, const Vector* w = nullptr) {
    const Matrix r = basis.rows() ? Matrix(a - (a * basis.transpose()) * basis) : a;
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < r.rows(); ++i) acc += (w ? (*w)[i] : 1.0) * abs_pow(r.row(i).norm(), p);
    return acc.value();
}

/// Top-k right singular vectors of a matrix as orthonormal rows.
inline Matrix top_right_singular(const Matrix& m, std::size_t k) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(m), Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    Eigen::Index r = 0;
    const double cut = kRankCutoff * (s.size() ? s[0] : 0.0);
    while (r < s.size() && r < static_cast<Eigen::Index>(k) && s[r] > cut) ++r;
    return svd.matrixV().leftCols(r).transpose();
}

/// Largest distance from a basis vector to the row span of `rows`.
inline double span_residual(const Matrix& basis, const Matrix& rows) {
    if (basis.rows() == 0) return 0.0;
    const Orthobasis ob = column_basis(rows.transpose());
    double worst = 0.0;
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
        const Vector b = basis.row(i).transpose();
        const Vector proj = ob.rank ? Vector(ob.U * (ob.U.transpose() * b)) : Vector(Vector::Zero(b.size()));
        worst = std::max(worst, (b - proj).norm());
    }
    return worst;
}

} // namespace detail

/// ||A (I - P_F)||_{p,2}^p with F spanned by the orthonormal rows of basis.
inline double subspace_cost(const SubspaceProblem& prob, const DenseMatrix& basis) {
    detail::require(prob.p >= 1.0, "subspace_cost: p must be >= 1");
    if (basis.rows() == 0) return row_lp2_norm(prob.A, prob.p, NormPower::PthPower);
    detail::require(basis.cols() == prob.A.cols(), "subspace_cost: basis dimension mismatch");
    detail::require(basis.rows() <= prob.k, "subspace_cost: basis has more than k rows");
    if (detail::orthonormality_defect(basis.values()).cwiseAbs().maxCoeff() > 1e-8)
        throw UsageError("subspace_cost: basis rows are not orthonormal");
    return detail::projection_cost(prob.A.values(), basis.values(), prob.p);
}

/// O(1)-approximate rank-k basis: truncated SVD refined by reweighted SVD
/// steps that majorize the (p,2) cost. Returns d x k with orthonormal columns.
inline Matrix approximate_subspace(const Matrix& a, std::size_t k, double p, int refine_steps,
                                   const Vector* weights = nullptr) {
    Matrix best = detail::top_right_singular(a, k);
    double best_cost = detail::projection_cost(a, best, p, weights);
    if (p == 2.0) return best.transpose();
    Matrix cur = best;
    for (int it = 0; it < refine_steps; ++it) {
        const Matrix r = a - (a * cur.transpose()) * cur;
        const double mag = std::pow(std::max(best_cost, 1e-300) / static_cast<double>(a.rows()), 1.0 / p);
        const double mu = 1e-6 * mag;
        Matrix wa = a;
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const double s = r.row(i).squaredNorm() + mu * mu;
            const double w = (weights ? (*weights)[i] : 1.0) * std::pow(s, p / 2.0 - 1.0);
            wa.row(i) *= std::sqrt(w);
        }
        cur = detail::top_right_singular(wa, k);
        const double c = detail::projection_cost(a, cur, p, weights);
        if (c < best_cost * (1.0 - 1e-12)) {
            best_cost = c;
            best = cur;
        } else {
            break;
        }
    }
    return best.transpose();
}

/// Spanning coreset: approximate V, weak coreset on the Lewis weights of AV,
/// sampled solve of min ||S(AVX - A)||_{p,2}, top-k row span of X.
inline SpanningCoreset build_spanning_coreset(const SubspaceProblem& prob, double eps, std::uint64_t seed,
                                              const SubspaceOptions& opts = {}) {
    prob.validate();
    detail::require(eps > 0.0 && eps < 1.0, "build_spanning_coreset: eps must lie in (0,1)");
    const Matrix& a_full = prob.A.values();
    const double p = prob.p;
    SpanningCoreset out;

    // (1) Approximate rank-k solution.
    const Matrix v = approximate_subspace(a_full, prob.k, p, opts.refine_steps);
    out.V = DenseMatrix(v);
    out.initial_cost = detail::projection_cost(a_full, v.transpose(), p);

    // Optional strong-coreset pre-reduction for large inputs.
    Matrix a = a_full;
    std::vector<std::size_t> origin(static_cast<std::size_t>(a_full.rows()));
    for (std::size_t i = 0; i < origin.size(); ++i) origin[i] = i;
    if (static_cast<std::size_t>(a_full.rows()) > opts.prereduce_threshold) {
        StrongCoresetConfig scfg{eps, opts.delta, p, 1.0, 1.0};
        const StrongCoreset sc = build_strong_coreset(DenseMatrix(Matrix(a_full * v)), prob.A, scfg,
                                                      derive_seed(seed, 0x9e7ULL));
        a = apply(sc.S, a_full);
        origin = kept_rows(sc.S);
        out.prereduced = true;
    }

    // (2) Weak coreset on the design AV.
    const Matrix av = a * v;
    const LewisResult lw = lewis_weights(DenseMatrix(av), p);
    WeakCoresetConfig wcfg{eps, opts.delta, p, opts.c_alpha};
    const WeightVector q = weak_coreset_probabilities(DenseMatrix(av), wcfg, lw, &out.alpha);
    const SamplingMatrix s = draw_sampling_matrix(q, p, seed);
    detail::require(s.nnz() > 0, "build_spanning_coreset: empty coreset");
    const Matrix sav = apply(s, av);
    const Matrix sa = apply(s, a);

    // (3) Sampled solve.
    Matrix x_hat;
    if (opts.use_embedding) {
        const double emb_eps = std::min(eps, 0.9 / p);
        const DvoretzkyEmbedding e =
            build_embedding(static_cast<std::size_t>(a.cols()), p, emb_eps, derive_seed(seed, 0xe3bULL), opts.n_embed_const);
        // ||(SAV X - SA) E^T||_{p,p}: regression with G = E^T.
        RegressionProblem rp;
        rp.A = DenseMatrix(sav);
        rp.B = DenseMatrix(Matrix(e.multiplier() * (sa * e.G.transpose())));
        rp.G = DenseMatrix(Matrix(e.multiplier() * e.G.transpose()));
        rp.p = p;
        x_hat = solve(rp, opts.solve).X.values();
        // Restrict to the span of the sampled rows.
        const detail::Orthobasis ob = detail::column_basis(sa.transpose());
        x_hat = (x_hat * ob.U) * ob.U.transpose();
        out.used_embedding = true;
    } else {
        x_hat = solve_row_norm(sav, sa, p, Vector::Ones(sav.rows()), opts.solve).X.values();
    }
    out.X_hat = DenseMatrix(x_hat);

    // (4) Top-k row span of X.
    const Matrix basis = detail::top_right_singular(x_hat, prob.k);
    out.subspace_basis = DenseMatrix(basis);
    out.cost = detail::projection_cost(a_full, basis, p);
    out.row_indices.reserve(s.nnz());
    for (const auto& e : s.kept) out.row_indices.push_back(origin[e.row]);
    Matrix selected(static_cast<Eigen::Index>(out.row_indices.size()), a_full.cols());
    for (std::size_t i = 0; i < out.row_indices.size(); ++i)
        selected.row(static_cast<Eigen::Index>(i)) = a_full.row(static_cast<Eigen::Index>(out.row_indices[i]));
    out.span_residual = detail::span_residual(basis, selected);
    return out;
}

} // namespace lpcoreset

#endif
