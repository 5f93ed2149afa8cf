#ifndef LPCORESET_SOLVER_HPP
#define LPCORESET_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>

#include "lpcoreset/errors.hpp"
#include "lpcoreset/lewis.hpp"
#include "lpcoreset/sampler.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

/// min_X sum_i r_i sum_j |(AXG - B)_ij|^p, with r the optional row weights.
/// An absent G stands for the identity.
struct RegressionProblem {
    DenseMatrix A;
    DenseMatrix B;
    std::optional<DenseMatrix> G;
    double p = 2.0;
    std::optional<WeightVector> row_weights;

    std::size_t n() const { return A.rows(); }
    std::size_t d() const { return A.cols(); }
    std::size_t m() const { return B.cols(); }
    std::size_t t() const { return G ? G->rows() : B.cols(); }

    void validate() const {
        detail::require(p >= 1.0 && std::isfinite(p), "RegressionProblem: p must be a finite real >= 1");
        detail::require(A.rows() == B.rows(), "RegressionProblem: A has " + std::to_string(A.rows()) +
                                                  " rows but B has " + std::to_string(B.rows()));
        if (G)
            detail::require(G->cols() == B.cols(), "RegressionProblem: G has " + std::to_string(G->cols()) +
                                                       " columns but B has " + std::to_string(B.cols()));
        if (row_weights)
            detail::require(row_weights->size() == A.rows(), "RegressionProblem: row weight length mismatch");
    }
};

struct SolveOptions {
    /// Final-stage stopping threshold on the relative Newton decrement.
    double tol = 1e-10;
    std::size_t max_iter = 500;
    /// Smallest smoothing level, relative to the initial residual magnitude.
    double mu_floor = 1e-10;
    /// First smoothing level, relative to the initial residual magnitude.
    double mu_start = 1e-2;
};

struct SolveResult {
    DenseMatrix X;
    /// Unsmoothed objective, p-th power.
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// sqrt(lambda^2 / f) with lambda the Newton decrement at the last
    /// smoothing level. Converged solves have gradient_norm^2 <= tol.
    double gradient_norm = 0.0;
};

namespace detail {

inline Vector row_weight_vector(const std::optional<WeightVector>& rw, Eigen::Index n) {
    return rw ? rw->values() : Vector::Ones(n);
}

/// Pseudo-inverse solve of a symmetric PSD system.
inline Vector psd_solve(const Eigen::MatrixXd& h, const Vector& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Vector& ev = es.eigenvalues();
    const double cut = 1e-14 * std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    Vector coef = es.eigenvectors().transpose() * g;
    for (Eigen::Index i = 0; i < ev.size(); ++i) coef[i] = ev[i] > cut ? coef[i] / ev[i] : 0.0;
    return es.eigenvectors() * coef;
}

inline Eigen::MatrixXd psd_solve_multi(const Eigen::MatrixXd& h, const Eigen::MatrixXd& rhs) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Vector& ev = es.eigenvalues();
    const double cut = 1e-14 * std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    Eigen::MatrixXd coef = es.eigenvectors().transpose() * rhs;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        coef.row(i) = ev[i] > cut ? Eigen::MatrixXd(coef.row(i) / ev[i]) : Eigen::MatrixXd::Zero(1, coef.cols());
    return es.eigenvectors() * coef;
}

inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return Eigen::MatrixXd::Zero(m.cols(), m.rows());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cut = kRankCutoff * (s.size() ? s[0] : 0.0);
    Vector inv(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) inv[i] = s[i] > cut && s[i] > 0.0 ? 1.0 / s[i] : 0.0;
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Smoothed scalar loss phi(r) = (r^2 + mu^2)^{p/2} - mu^p and derivatives.
struct Smooth {
    double p, mu;
    double mup;
    Smooth(double p_, double mu_) : p(p_), mu(mu_), mup(mu_ > 0 ? std::pow(mu_, p_) : 0.0) {}

    double value(double r) const {
        if (mu == 0.0) return abs_pow(r, p);
        return abs_pow(std::sqrt(r * r + mu * mu), p) - mup;
    }
    double d1(double r) const {
        if (mu == 0.0) return p * signed_pow(r, p - 1.0);
        const double s = r * r + mu * mu;
        return p * r * std::pow(s, p / 2.0 - 1.0);
    }
    double d2(double r) const {
        if (mu == 0.0) return p == 2.0 ? 2.0 : p * (p - 1.0) * abs_pow(r, p - 2.0);
        const double s = r * r + mu * mu;
        return p * std::pow(s, p / 2.0 - 2.0) * ((p - 1.0) * r * r + mu * mu);
    }
    /// Curvature of the quadratic majorizer, phi'(r)/r.
    double major(double r) const {
        if (mu == 0.0) return p * abs_pow(r, p - 2.0);
        return p * std::pow(r * r + mu * mu, p / 2.0 - 1.0);
    }
};

struct StageOutcome {
    bool met = false;
    double decrement = 0.0;
};

/// Damped Newton on a smooth convex model. Eval(x, need_hessian, f, g, H, M)
/// fills the objective, gradient, Hessian and (for p < 2) a majorizer used as
/// a fallback direction when the Newton step fails its line search.
template <typename Eval>
StageOutcome newton_stage(Vector& x, Eval&& eval, double tol, std::size_t& budget, std::size_t& used) {
    StageOutcome out;
    double f = 0.0;
    Vector g;
    Eigen::MatrixXd h, mj;
    while (budget > 0) {
        eval(x, true, f, g, h, mj);
        if (!(f > 0.0)) {
            out.met = true;
            out.decrement = 0.0;
            return out;
        }
        Vector dir = -psd_solve(h, g);
        double slope = g.dot(dir);
        out.decrement = std::sqrt(std::max(0.0, -slope) / f);
        if (-slope <= tol * f) {
            out.met = true;
            return out;
        }
        --budget;
        ++used;
        bool moved = false;
        for (int attempt = 0; attempt < 2 && !moved; ++attempt) {
            if (attempt == 1) {
                if (mj.size() == 0) break;
                dir = -psd_solve(mj, g);
                slope = g.dot(dir);
                if (!(slope < 0.0)) break;
            }
            double step = 1.0;
            for (int k = 0; k < 60; ++k) {
                Vector trial = x + step * dir;
                double ft = 0.0;
                Vector gt;
                Eigen::MatrixXd ht, mt;
                eval(trial, false, ft, gt, ht, mt);
                if (std::isfinite(ft) && ft <= f + 1e-4 * step * slope) {
                    x = trial;
                    moved = ft < f || step * dir.norm() > 0.0;
                    break;
                }
                step *= 0.5;
            }
        }
        if (!moved) {
            // Numerical floor: no representable descent left.
            out.met = out.decrement * out.decrement <= std::sqrt(tol);
            return out;
        }
    }
    return out;
}

/// Unweighted least-squares warm start X0 = (R^{1/2} A)^+ (R^{1/2} B) G^+.
inline Eigen::MatrixXd least_squares_start(const RegressionProblem& prob) {
    const Vector rw = row_weight_vector(prob.row_weights, static_cast<Eigen::Index>(prob.n()));
    const Vector sq = rw.cwiseSqrt();
    Eigen::MatrixXd aw = sq.asDiagonal() * Eigen::MatrixXd(prob.A.values());
    Eigen::MatrixXd bw = sq.asDiagonal() * Eigen::MatrixXd(prob.B.values());
    Eigen::MatrixXd x = pinv(aw) * bw;
    if (prob.G) x = x * pinv(Eigen::MatrixXd(prob.G->values()));
    return x;
}

inline Eigen::MatrixXd residual(const RegressionProblem& prob, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd r = Eigen::MatrixXd(prob.A.values()) * x;
    if (prob.G) r = r * Eigen::MatrixXd(prob.G->values());
    return r - Eigen::MatrixXd(prob.B.values());
}

inline double weighted_objective(const Eigen::MatrixXd& r, const Vector& rw, double p) {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        if (rw[i] == 0.0) continue;
        CompensatedSum row;
        for (Eigen::Index j = 0; j < r.cols(); ++j) row += abs_pow(r(i, j), p);
        acc += rw[i] * row.value();
    }
    return acc.value();
}

inline void check_x_shape(const RegressionProblem& prob, const DenseMatrix& x) {
    require(x.rows() == prob.d() && x.cols() == prob.t(),
            "X must be " + std::to_string(prob.d()) + "x" + std::to_string(prob.t()) + ", got " +
                std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
}

/// Smoothing schedule shared by the entrywise and row-norm solvers.
struct Schedule {
    double mu0 = 0.0;
    double mu_min = 0.0;
    bool smooth = false;
};

inline Schedule make_schedule(double p, double mean_magnitude, const SolveOptions& opts) {
    Schedule s;
    s.smooth = p < 2.0 && mean_magnitude > 0.0;
    if (s.smooth) {
        s.mu0 = std::max(opts.mu_start, opts.mu_floor) * mean_magnitude;
        s.mu_min = opts.mu_floor * mean_magnitude;
    }
    return s;
}

/// Runs the Newton stages over the smoothing schedule.
template <typename MakeEval>
SolveResult run_schedule(Vector& x, MakeEval&& make_eval, const Schedule& sched, const SolveOptions& opts) {
    SolveResult res;
    std::size_t budget = opts.max_iter;
    std::size_t used = 0;
    double mu = sched.smooth ? sched.mu0 : 0.0;
    StageOutcome last;
    for (;;) {
        const bool final_stage = !sched.smooth || mu <= sched.mu_min * (1.0 + 1e-12);
        const double stage_tol = final_stage ? opts.tol : std::max(opts.tol, 1e-8);
        last = newton_stage(x, make_eval(mu), stage_tol, budget, used);
        if (final_stage || budget == 0) {
            res.converged = final_stage && last.met;
            break;
        }
        mu = std::max(mu * 0.1, sched.mu_min);
    }
    res.iterations = used;
    res.gradient_norm = last.decrement;
    return res;
}

} // namespace detail

/// sum_i r_i sum_j |(AXG - B)_ij|^p.
inline double objective(const RegressionProblem& prob, const DenseMatrix& x) {
    prob.validate();
    detail::check_x_shape(prob, x);
    const Vector rw = detail::row_weight_vector(prob.row_weights, static_cast<Eigen::Index>(prob.n()));
    return detail::weighted_objective(detail::residual(prob, x.values()), rw, prob.p);
}

/// p A^T R (R^{o(p-1)}) G^T with R = AXG - B and row weights folded in.
inline DenseMatrix gradient(const RegressionProblem& prob, const DenseMatrix& x) {
    prob.validate();
    detail::check_x_shape(prob, x);
    const Vector rw = detail::row_weight_vector(prob.row_weights, static_cast<Eigen::Index>(prob.n()));
    Eigen::MatrixXd r = detail::residual(prob, x.values());
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            if (prob.p == 1.0 && r(i, j) == 0.0 && rw[i] != 0.0)
                throw DomainError("gradient undefined at p = 1 with an exactly zero residual; use smoothed_gradient");
            r(i, j) = rw[i] * prob.p * signed_pow(r(i, j), prob.p - 1.0);
        }
    Eigen::MatrixXd g = Eigen::MatrixXd(prob.A.values()).transpose() * r;
    if (prob.G) g = g * Eigen::MatrixXd(prob.G->values()).transpose();
    return DenseMatrix(Matrix(g));
}

/// Gradient of sum r_i ((R_ij^2 + mu^2)^{p/2} - mu^p).
inline DenseMatrix smoothed_gradient(const RegressionProblem& prob, const DenseMatrix& x, double mu) {
    prob.validate();
    detail::check_x_shape(prob, x);
    detail::require(mu >= 0.0, "smoothing level must be nonnegative");
    const Vector rw = detail::row_weight_vector(prob.row_weights, static_cast<Eigen::Index>(prob.n()));
    const detail::Smooth sm(prob.p, mu);
    Eigen::MatrixXd r = detail::residual(prob, x.values());
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j) r(i, j) = rw[i] * sm.d1(r(i, j));
    Eigen::MatrixXd g = Eigen::MatrixXd(prob.A.values()).transpose() * r;
    if (prob.G) g = g * Eigen::MatrixXd(prob.G->values()).transpose();
    return DenseMatrix(Matrix(g));
}

namespace detail {

/// Single response: min_x sum_i rw_i phi(a_i^T x - b_i).
inline SolveResult solve_column(const Eigen::MatrixXd& a, const Vector& b, const Vector& rw, double p,
                                const Vector& x0, const SolveOptions& opts) {
    Vector x = x0;
    const Eigen::Index n = a.rows();
    Vector r0 = a * x - b;
    double wsum = 0.0, f0 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        wsum += rw[i];
        f0 += rw[i] * abs_pow(r0[i], p);
    }
    const double mag = wsum > 0.0 && f0 > 0.0 ? std::pow(f0 / wsum, 1.0 / p) : 0.0;
    const Schedule sched = make_schedule(p, mag, opts);
    auto make_eval = [&](double mu) {
        return [&, mu](const Vector& xv, bool need_h, double& f, Vector& g, Eigen::MatrixXd& h,
                       Eigen::MatrixXd& mj) {
            const Smooth sm(p, mu);
            const Vector r = a * xv - b;
            CompensatedSum acc;
            Vector d1(n), d2(n), maj(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += rw[i] * sm.value(r[i]);
                if (need_h) {
                    d1[i] = rw[i] * sm.d1(r[i]);
                    d2[i] = rw[i] * sm.d2(r[i]);
                    if (p < 2.0) maj[i] = rw[i] * sm.major(r[i]);
                }
            }
            f = acc.value();
            if (!need_h) return;
            g = a.transpose() * d1;
            h = a.transpose() * d2.asDiagonal() * a;
            if (p < 2.0)
                mj = a.transpose() * maj.asDiagonal() * a;
            else
                mj.resize(0, 0);
        };
    };
    SolveResult res = run_schedule(x, make_eval, sched, opts);
    double f = 0.0;
    const Vector r = a * x - b;
    for (Eigen::Index i = 0; i < n; ++i) f += rw[i] * abs_pow(r[i], p);
    res.objective = f;
    res.X = DenseMatrix(Matrix(x));
    return res;
}

/// General G: Newton over vec(X) with H = sum_j (g_j g_j^T) kron (A^T diag(w_j) A).
inline SolveResult solve_coupled(const RegressionProblem& prob, const Eigen::MatrixXd& x0,
                                 const SolveOptions& opts) {
    const Eigen::MatrixXd a = prob.A.values();
    const Eigen::MatrixXd b = prob.B.values();
    const Eigen::MatrixXd gm = prob.G->values();
    const double p = prob.p;
    const Eigen::Index n = a.rows(), d = a.cols(), t = gm.rows(), m = gm.cols();
    const Vector rw = row_weight_vector(prob.row_weights, n);

    Vector x = Eigen::Map<const Vector>(x0.data(), d * t);
    const Eigen::MatrixXd r0 = a * x0 * gm - b;
    const double f0 = weighted_objective(r0, rw, p);
    const double wsum = rw.sum() * static_cast<double>(m);
    const double mag = wsum > 0.0 && f0 > 0.0 ? std::pow(f0 / wsum, 1.0 / p) : 0.0;
    const Schedule sched = make_schedule(p, mag, opts);

    auto make_eval = [&](double mu) {
        return [&, mu](const Vector& xv, bool need_h, double& f, Vector& g, Eigen::MatrixXd& h,
                       Eigen::MatrixXd& mj) {
            const Smooth sm(p, mu);
            const Eigen::Map<const Eigen::MatrixXd> xm(xv.data(), d, t);
            const Eigen::MatrixXd r = a * xm * gm - b;
            CompensatedSum acc;
            Eigen::MatrixXd d1(n, m), d2(n, m), maj(n, m);
            for (Eigen::Index j = 0; j < m; ++j)
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double v = r(i, j);
                    acc += rw[i] * sm.value(v);
                    if (need_h) {
                        d1(i, j) = rw[i] * sm.d1(v);
                        d2(i, j) = rw[i] * sm.d2(v);
                        if (p < 2.0) maj(i, j) = rw[i] * sm.major(v);
                    }
                }
            f = acc.value();
            if (!need_h) return;
            const Eigen::MatrixXd gx = a.transpose() * d1 * gm.transpose();
            g = Eigen::Map<const Vector>(gx.data(), d * t);
            h = Eigen::MatrixXd::Zero(d * t, d * t);
            if (p < 2.0)
                mj = Eigen::MatrixXd::Zero(d * t, d * t);
            else
                mj.resize(0, 0);
            for (Eigen::Index j = 0; j < m; ++j) {
                const Eigen::MatrixXd cj = a.transpose() * d2.col(j).asDiagonal() * a;
                Eigen::MatrixXd mjj;
                if (p < 2.0) mjj = a.transpose() * maj.col(j).asDiagonal() * a;
                for (Eigen::Index k = 0; k < t; ++k)
                    for (Eigen::Index l = 0; l < t; ++l) {
                        const double c = gm(k, j) * gm(l, j);
                        if (c == 0.0) continue;
                        h.block(k * d, l * d, d, d) += c * cj;
                        if (p < 2.0) mj.block(k * d, l * d, d, d) += c * mjj;
                    }
            }
        };
    };
    SolveResult res = run_schedule(x, make_eval, sched, opts);
    const Eigen::Map<const Eigen::MatrixXd> xm(x.data(), d, t);
    res.X = DenseMatrix(Matrix(xm));
    res.objective = weighted_objective(a * xm * gm - b, rw, p);
    return res;
}

} // namespace detail

/// Minimizes the (row-weighted) entrywise lp objective. p = 2 is solved in
/// closed form; otherwise damped Newton on a smoothed objective, warm-started
/// from least squares. Identity G decouples into per-column solves.
inline SolveResult solve(const RegressionProblem& prob, const SolveOptions& opts = {}) {
    prob.validate();
    detail::require(prob.n() > 0, "solve: problem has no rows");
    const Eigen::MatrixXd x0 = detail::least_squares_start(prob);
    const Vector rw = detail::row_weight_vector(prob.row_weights, static_cast<Eigen::Index>(prob.n()));

    if (prob.p == 2.0) {
        SolveResult res;
        res.X = DenseMatrix(Matrix(x0));
        res.objective = detail::weighted_objective(detail::residual(prob, x0), rw, 2.0);
        res.converged = true;
        return res;
    }
    if (prob.G) return detail::solve_coupled(prob, x0, opts);

    const Eigen::MatrixXd a = prob.A.values();
    const Eigen::MatrixXd b = prob.B.values();
    Matrix x(a.cols(), b.cols());
    SolveResult total;
    total.converged = true;
    CompensatedSum obj;
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
        const SolveResult col = detail::solve_column(a, b.col(j), rw, prob.p, x0.col(j), opts);
        x.col(j) = col.X.values().col(0);
        obj += col.objective;
        total.iterations = std::max(total.iterations, col.iterations);
        total.converged = total.converged && col.converged;
        total.gradient_norm = std::max(total.gradient_norm, col.gradient_norm);
    }
    total.X = DenseMatrix(std::move(x));
    total.objective = obj.value();
    return total;
}

/// Solves the problem restricted to the rows kept by S (with their scales).
/// The reported objective is the one on the reduced data.
inline SolveResult solve_on_coreset(const RegressionProblem& prob, const SamplingMatrix& s,
                                    const SolveOptions& opts = {}) {
    prob.validate();
    detail::require(s.n == prob.n(), "solve_on_coreset: sampling matrix built for " + std::to_string(s.n) +
                                         " rows, problem has " + std::to_string(prob.n()));
    if (s.kept.empty()) throw UsageError("solve_on_coreset: coreset is empty (no constraint rows)");
    RegressionProblem reduced;
    reduced.A = apply(s, prob.A);
    reduced.B = apply(s, prob.B);
    reduced.G = prob.G;
    reduced.p = prob.p;
    if (prob.row_weights) {
        Vector w(static_cast<Eigen::Index>(s.kept.size()));
        for (std::size_t k = 0; k < s.kept.size(); ++k) w[static_cast<Eigen::Index>(k)] = (*prob.row_weights)[s.kept[k].row];
        reduced.row_weights = WeightVector(w);
    }
    return solve(reduced, opts);
}

// ---------------------------------------------------------------------------
// (p,2) row-norm regression
// ---------------------------------------------------------------------------

/// sum_i w_i ||(AX - B)_i||_2^p.
inline double row_norm_objective(const Matrix& a, const Matrix& b, const Matrix& x, double p,
                                 const Vector& w) {
    const Matrix r = a * x - b;
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        if (w[i] != 0.0) acc += w[i] * abs_pow(r.row(i).norm(), p);
    return acc.value();
}

/// min_X sum_i w_i ||(AX - B)_i||_2^p by iteratively reweighted least squares
/// with an exact one-dimensional line search along each IRLS direction.
/// With A a column of ones this is Weiszfeld's iteration for power means.
inline SolveResult solve_row_norm(const Matrix& a, const Matrix& b, double p, const Vector& w,
                                  const SolveOptions& opts = {}, const Matrix* x_init = nullptr) {
    detail::require(p >= 1.0 && std::isfinite(p), "solve_row_norm: p must be a finite real >= 1");
    detail::require(a.rows() == b.rows() && w.size() == a.rows(), "solve_row_norm: shape mismatch");
    detail::require(a.rows() > 0, "solve_row_norm: no rows");
    const Eigen::Index n = a.rows(), d = a.cols(), m = b.cols();

    const Eigen::MatrixXd ad = a;
    const Eigen::MatrixXd bd = b;
    auto wls = [&](const Vector& omega) -> Eigen::MatrixXd {
        const Eigen::MatrixXd at = ad.transpose() * omega.asDiagonal();
        return detail::psd_solve_multi(at * ad, at * bd);
    };

    Eigen::MatrixXd x;
    if (x_init) {
        detail::require(x_init->rows() == d && x_init->cols() == m, "solve_row_norm: bad initial X shape");
        x = *x_init;
    } else {
        x = wls(w);
    }
    SolveResult res;
    if (p == 2.0 && !x_init) {
        res.X = DenseMatrix(Matrix(x));
        res.objective = row_norm_objective(a, b, Matrix(x), p, w);
        res.converged = true;
        return res;
    }

    Eigen::MatrixXd r = ad * x - bd;
    double wsum = w.sum();
    double f0 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) f0 += w[i] * abs_pow(r.row(i).norm(), p);
    const double mag = wsum > 0.0 && f0 > 0.0 ? std::pow(f0 / wsum, 1.0 / p) : 0.0;
    const detail::Schedule sched = detail::make_schedule(p, mag, opts);
    double mu = sched.smooth ? sched.mu0 : 0.0;

    auto smoothed = [&](const Eigen::MatrixXd& rr, double mu_) {
        const double mup = mu_ > 0 ? std::pow(mu_, p) : 0.0;
        CompensatedSum acc;
        for (Eigen::Index i = 0; i < n; ++i)
            if (w[i] != 0.0) acc += w[i] * (std::pow(rr.row(i).squaredNorm() + mu_ * mu_, p / 2.0) - mup);
        return acc.value();
    };

    std::size_t used = 0;
    double rel_change = std::numeric_limits<double>::infinity();
    bool converged = false;
    while (used < opts.max_iter) {
        const bool final_stage = !sched.smooth || mu <= sched.mu_min * (1.0 + 1e-12);
        const double stage_tol = final_stage ? opts.tol : std::max(opts.tol, 1e-8);
        bool stage_done = false;
        while (used < opts.max_iter) {
            r = ad * x - bd;
            const double f = smoothed(r, mu);
            if (!(f > 0.0)) {
                stage_done = true;
                rel_change = 0.0;
                break;
            }
            Vector omega(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double s = r.row(i).squaredNorm() + mu * mu;
                omega[i] = s > 0.0 ? w[i] * std::pow(s, p / 2.0 - 1.0) : 0.0;
            }
            const Eigen::MatrixXd dir = wls(omega) - x;
            ++used;
            // Exact line search on the convex 1-D restriction.
            const Eigen::MatrixXd rd = ad * dir;
            Vector qa(n), qb(n), qc(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                qa[i] = r.row(i).squaredNorm() + mu * mu;
                qb[i] = r.row(i).dot(rd.row(i));
                qc[i] = rd.row(i).squaredNorm();
            }
            const double mup = mu > 0 ? std::pow(mu, p) : 0.0;
            auto phi = [&](double tt, double* d1, double* d2) {
                CompensatedSum v, g1, g2;
                for (Eigen::Index i = 0; i < n; ++i) {
                    if (w[i] == 0.0) continue;
                    const double s = std::max(qa[i] + 2.0 * qb[i] * tt + qc[i] * tt * tt, 0.0);
                    const double ds = 2.0 * qb[i] + 2.0 * qc[i] * tt;
                    if (s == 0.0) continue;
                    const double sp = std::pow(s, p / 2.0);
                    v += w[i] * (sp - mup);
                    if (d1) g1 += w[i] * 0.5 * p * sp / s * ds;
                    if (d2) g2 += w[i] * (0.5 * p * (0.5 * p - 1.0) * sp / (s * s) * ds * ds + p * sp / s * qc[i]);
                }
                if (d1) *d1 = g1.value();
                if (d2) *d2 = g2.value();
                return v.value();
            };
            double lo = 0.0, hi = 1.0, d1 = 0.0, d2 = 0.0;
            phi(0.0, &d1, nullptr);
            if (!(d1 < 0.0)) {
                stage_done = true;
                rel_change = 0.0;
                break;
            }
            // Bracket the minimizer.
            for (int k = 0; k < 60; ++k) {
                phi(hi, &d1, nullptr);
                if (d1 >= 0.0) break;
                lo = hi;
                hi *= 2.0;
            }
            double tt = lo > 0.0 ? lo : 1.0;
            if (tt > hi) tt = 0.5 * (lo + hi);
            for (int k = 0; k < 50; ++k) {
                phi(tt, &d1, &d2);
                if (d1 > 0.0) hi = tt; else lo = tt;
                double next = d2 > 0.0 ? tt - d1 / d2 : 0.5 * (lo + hi);
                if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
                if (std::fabs(next - tt) <= 1e-12 * std::max(1.0, std::fabs(tt))) {
                    tt = next;
                    break;
                }
                tt = next;
            }
            const double fn = phi(tt, nullptr, nullptr);
            if (fn <= f) x += tt * dir;
            rel_change = (f - std::min(fn, f)) / f;
            if (rel_change <= stage_tol) {
                stage_done = true;
                break;
            }
        }
        if (final_stage) {
            converged = stage_done;
            break;
        }
        if (!stage_done) break;
        mu = std::max(mu * 0.1, sched.mu_min);
    }
    res.X = DenseMatrix(Matrix(x));
    res.objective = row_norm_objective(a, b, Matrix(x), p, w);
    res.iterations = used;
    res.converged = converged;
    res.gradient_norm = std::isfinite(rel_change) ? rel_change : 0.0;
    return res;
}

} // namespace lpcoreset

#endif
