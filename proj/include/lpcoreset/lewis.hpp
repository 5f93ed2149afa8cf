#ifndef LPCORESET_LEWIS_HPP
#define LPCORESET_LEWIS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "lpcoreset/errors.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

/// Relative singular-value cutoff used for every pseudo-inverse.
inline constexpr double kRankCutoff = 1e-10;
/// Lower clip for Lewis weights before negative powers are taken.
inline constexpr double kMinWeight = 1e-12;

struct LewisResult {
    WeightVector weights;
    double gamma = 1.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// max_i |w_i - tau_i(W^{1/2-1/p} A)| at the returned weights.
    double residual = 0.0;
    std::size_t rank = 0;
};

namespace detail {

struct Orthobasis {
    Matrix U; // n x r, orthonormal columns spanning col(A)
    std::size_t rank = 0;
};

/// Orthonormal basis for the column space of A via QR followed by SVD of R.
inline Orthobasis column_basis(const Matrix& a) {
    Orthobasis out;
    const Eigen::Index n = a.rows(), d = a.cols();
    if (n == 0 || d == 0) {
        out.U = Matrix::Zero(n, 0);
        return out;
    }
    Eigen::MatrixXd r;
    if (n > d) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
    } else {
        r = a;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double smax = s.size() ? s[0] : 0.0;
    Eigen::Index rank = 0;
    if (smax > 0.0)
        while (rank < s.size() && s[rank] > kRankCutoff * smax) ++rank;
    out.rank = static_cast<std::size_t>(rank);
    if (rank == 0) {
        out.U = Matrix::Zero(n, 0);
        return out;
    }
    Eigen::MatrixXd proj = svd.matrixV().leftCols(rank) * s.head(rank).cwiseInverse().asDiagonal();
    out.U = a * proj;
    return out;
}

inline Vector leverage_raw(const Matrix& a, std::size_t* rank = nullptr) {
    const Orthobasis b = column_basis(a);
    if (rank) *rank = b.rank;
    Vector tau = b.U.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < tau.size(); ++i) tau[i] = std::min(1.0, tau[i]);
    return tau;
}

/// tau(W^{1/2-1/p} A) for the given weights.
inline Vector reweighted_leverage(const Matrix& a, const Vector& w, double p) {
    const double e = 0.5 - 1.0 / p;
    Matrix m = a;
    if (e != 0.0)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            m.row(i) *= std::pow(std::max(w[i], kMinWeight), e);
    return leverage_raw(m);
}

} // namespace detail

/// tau_i(A) = e_i^T A (A^T A)^+ A^T e_i.
inline WeightVector leverage_scores(const DenseMatrix& a) {
    return WeightVector(detail::leverage_raw(a.values()));
}

inline std::size_t numerical_rank(const DenseMatrix& a) {
    return detail::column_basis(a.values()).rank;
}

/// max_i |w_i - tau_i(W^{1/2-1/p} A)|.
inline double lewis_fixed_point_residual(const DenseMatrix& a, const WeightVector& w, double p) {
    detail::require(w.size() == a.rows(), "weight length must equal row count");
    const Vector tau = detail::reweighted_leverage(a.values(), w.values(), p);
    return (w.values() - tau).cwiseAbs().maxCoeff();
}

/// min over w_i > 0 of w_i / tau_i(W^{1/2-1/p} A). Rows with tau_i = 0 impose
/// no constraint.
inline double one_sidedness_ratio(const DenseMatrix& a, const WeightVector& w, double p) {
    detail::require(w.size() == a.rows(), "weight length must equal row count");
    detail::require(p >= 1.0, "p must be >= 1");
    bool any = false;
    for (Eigen::Index i = 0; i < w.values().size(); ++i) any |= w.values()[i] > 0.0;
    if (!any) throw DomainError("one_sidedness_ratio: all weights are zero");
    const Vector tau = detail::reweighted_leverage(a.values(), w.values(), p);
    double ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < tau.size(); ++i) {
        if (w.values()[i] <= 0.0 || tau[i] <= 0.0) continue;
        ratio = std::min(ratio, w.values()[i] / tau[i]);
    }
    return ratio;
}

/// One-sided lp Lewis weights by fixed-point iteration.
///
/// Update: w <- w^{1-theta} * T(w)^theta with T(w)_i = tau_i^{p/2} w_i^{1-p/2}
/// and tau = tau(W^{1/2-1/p}A). theta = 1 below p = 4, theta = 2/p from p = 4
/// on, where the update collapses to w <- tau.
inline LewisResult lewis_weights(const DenseMatrix& a, double p, std::size_t max_iter = 1000,
                                 double tol = 1e-12) {
    detail::require(p >= 1.0 && std::isfinite(p), "lewis_weights: p must be a finite real >= 1");
    detail::require(a.rows() > 0 && a.cols() > 0, "lewis_weights: empty matrix");
    const Matrix& av = a.values();
    const Eigen::Index n = av.rows();

    LewisResult out;
    Vector w = detail::leverage_raw(av, &out.rank);
    if (out.rank == 0) throw UsageError("lewis_weights: A must be nonzero");
    for (Eigen::Index i = 0; i < n; ++i) w[i] = std::clamp(w[i], kMinWeight, 1.0);

    const double theta = p < 4.0 ? 1.0 : 2.0 / p;
    Vector tau = detail::reweighted_leverage(av, w, p);
    for (std::size_t it = 0; it < max_iter; ++it) {
        Vector next(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double t = std::max(tau[i], 0.0);
            double v;
            if (theta == 1.0)
                v = std::pow(t, p / 2.0) * std::pow(w[i], 1.0 - p / 2.0);
            else
                v = t; // theta = 2/p
            next[i] = std::clamp(v, kMinWeight, 1.0);
        }
        const double change = (next - w).cwiseAbs().maxCoeff();
        w = next;
        out.iterations = it + 1;
        tau = detail::reweighted_leverage(av, w, p);
        if (change <= tol) {
            out.converged = true;
            break;
        }
    }

    // Leverage scores are invariant to uniform rescaling of W, so upscaling
    // keeps one-sidedness intact.
    const double total = w.sum();
    const double target = static_cast<double>(out.rank);
    if (total < target) w *= target / total;

    out.weights = WeightVector(w);
    out.residual = (w - tau).cwiseAbs().maxCoeff();
    double ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        if (tau[i] > 0.0) ratio = std::min(ratio, w[i] / tau[i]);
    out.gamma = std::min(1.0, ratio);
    return out;
}

} // namespace lpcoreset

#endif
