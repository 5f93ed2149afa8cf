#ifndef LPCORESET_CORESETS_HPP
#define LPCORESET_CORESETS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "lpcoreset/errors.hpp"
#include "lpcoreset/lewis.hpp"
#include "lpcoreset/sampler.hpp"
#include "lpcoreset/solver.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

struct StrongCoresetConfig {
    double eps = 0.25;
    double delta = 0.1;
    double p = 2.0;
    double c_alpha = 1.0;
    double c_beta = 1.0;
};

struct WeakCoresetConfig {
    double eps = 0.25;
    double delta = 0.1;
    double p = 2.0;
    double c_alpha = 1.0;
};

namespace detail {

inline void check_eps_delta(double eps, double delta, double p) {
    require(eps > 0.0 && eps < 1.0, "eps must lie in (0,1), got " + std::to_string(eps));
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1), got " + std::to_string(delta));
    require(p >= 1.0 && std::isfinite(p), "p must be a finite real >= 1");
}

/// (log d)^2 log n + log(1/delta), with logs floored at ln 2.
inline double log_factor(std::size_t n, std::size_t d, double delta) {
    const double ld = std::log(std::max<double>(static_cast<double>(d), 2.0));
    const double ln = std::log(std::max<double>(static_cast<double>(n), 2.0));
    return ld * ld * ln + std::log(1.0 / delta);
}

/// log log(1/eps), floored at 1.
inline double loglog_factor(double eps) {
    const double l = std::log(1.0 / eps);
    return l > 1.0 ? std::max(1.0, std::log(l)) : 1.0;
}

/// Adds the floor min(1, 1/n) and clips to [0,1].
inline WeightVector finalize_probabilities(const Vector& raw) {
    const double floor = raw.size() ? std::min(1.0, 1.0 / static_cast<double>(raw.size())) : 1.0;
    Vector q(raw.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i) q[i] = std::clamp(raw[i], floor, 1.0);
    return WeightVector(q);
}

} // namespace detail

/// Lewis-weight oversampling parameter for strong coresets.
inline double strong_alpha(const StrongCoresetConfig& cfg, std::size_t n, std::size_t d, double gamma,
                           double w_sum) {
    detail::check_eps_delta(cfg.eps, cfg.delta, cfg.p);
    const double lf = detail::log_factor(n, d, cfg.delta);
    if (cfg.p <= 2.0) return cfg.c_alpha * gamma * cfg.eps * cfg.eps / lf;
    return cfg.c_alpha * std::pow(gamma, cfg.p / 2.0) * std::pow(cfg.eps, cfg.p) /
           (std::pow(w_sum, cfg.p / 2.0 - 1.0) * lf);
}

/// Residual oversampling parameter. It scales like eps^2 / log(1/delta) so
/// that the residual term contributes about eps^{-2} log(1/delta) samples.
inline double strong_beta(const StrongCoresetConfig& cfg) {
    detail::check_eps_delta(cfg.eps, cfg.delta, cfg.p);
    return cfg.c_beta * cfg.eps * cfg.eps / std::log(1.0 / cfg.delta);
}

/// Oversampling parameter for B-oblivious (weak) coresets.
inline double weak_alpha(const WeakCoresetConfig& cfg, std::size_t n, std::size_t d, double gamma, double w_sum) {
    detail::check_eps_delta(cfg.eps, cfg.delta, cfg.p);
    const double lf = detail::log_factor(n, d, cfg.delta);
    const double ll = detail::loglog_factor(cfg.eps);
    const double e = cfg.eps, dl = cfg.delta, p = cfg.p;
    if (p == 1.0) return cfg.c_alpha * gamma * (e * dl) * (e * dl) / lf;
    if (p <= 2.0) return cfg.c_alpha * gamma * e * dl * dl / (lf * ll * ll);
    return cfg.c_alpha * std::pow(gamma, p / 2.0) * std::pow(e, p - 1.0) * std::pow(dl, p) /
           (std::pow(w_sum, p / 2.0 - 1.0) * lf * std::pow(ll, p));
}

/// Oversampling parameter for preserving differences within an eta-ball.
inline double difference_alpha(double eps, double delta, double p, double eta, double c_alpha, std::size_t n,
                               std::size_t d, double gamma, double w_sum) {
    detail::check_eps_delta(eps, delta, p);
    detail::require(eta > 0.0, "eta must be positive");
    const double lf = detail::log_factor(n, d, delta);
    if (p <= 2.0) return c_alpha * gamma * eps * eps / (std::pow(eta, 2.0 / p) * lf);
    return c_alpha * std::pow(gamma, p / 2.0) * std::pow(eps, p) / (eta * std::pow(w_sum, p / 2.0 - 1.0) * lf);
}

/// v_i = ||e_i^T Bhat||_p^p / ||Bhat||_{p,p}^p for Bhat = A Xhat - B; zero
/// when the fit is exact.
inline WeightVector residual_fractions(const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& x_hat,
                                       double p) {
    detail::require(a.rows() == b.rows(), "residual_fractions: A and B row counts differ");
    detail::require(x_hat.rows() == a.cols() && x_hat.cols() == b.cols(), "residual_fractions: bad X shape");
    const Matrix r = a.values() * x_hat.values() - b.values();
    Vector v = row_abs_pow_sums(r, p);
    const double total = v.sum();
    if (total > 0.0)
        v /= total;
    else
        v.setZero();
    return WeightVector(v);
}

struct ProbabilityBreakdown {
    WeightVector q;
    double alpha = 0.0;
    double beta = 0.0;
};

inline ProbabilityBreakdown strong_coreset_probabilities(const DenseMatrix& a, const DenseMatrix& b,
                                                         const StrongCoresetConfig& cfg, const LewisResult& lewis,
                                                         const SolveResult& approx) {
    detail::require(lewis.weights.size() == a.rows(), "Lewis weights do not match A");
    ProbabilityBreakdown out;
    out.alpha = strong_alpha(cfg, a.rows(), a.cols(), lewis.gamma, lewis.weights.sum());
    out.beta = strong_beta(cfg);
    const WeightVector v = residual_fractions(a, b, approx.X, cfg.p);
    const Vector raw = lewis.weights.values() / out.alpha + v.values() / out.beta;
    out.q = detail::finalize_probabilities(raw);
    return out;
}

struct StrongCoreset {
    SamplingMatrix S;
    DenseMatrix X_hat;
    double approx_objective = 0.0;
    LewisResult lewis;
    WeightVector q;
    double alpha = 0.0;
    double beta = 0.0;
    double expected_size() const { return q.sum(); }
};

/// Approximate solve, Lewis weights on A, probabilities, draw.
inline StrongCoreset build_strong_coreset(const DenseMatrix& a, const DenseMatrix& b, const StrongCoresetConfig& cfg,
                                          std::uint64_t seed) {
    detail::check_eps_delta(cfg.eps, cfg.delta, cfg.p);
    detail::require(a.rows() == b.rows(), "build_strong_coreset: A and B row counts differ");
    StrongCoreset out;
    RegressionProblem prob{a, b, std::nullopt, cfg.p, std::nullopt};
    SolveOptions loose;
    loose.tol = 1e-6;
    loose.mu_floor = 1e-6;
    const SolveResult approx = solve(prob, loose);
    out.X_hat = approx.X;
    out.approx_objective = approx.objective;
    out.lewis = lewis_weights(a, cfg.p);
    const ProbabilityBreakdown pb = strong_coreset_probabilities(a, b, cfg, out.lewis, approx);
    out.q = pb.q;
    out.alpha = pb.alpha;
    out.beta = pb.beta;
    out.S = draw_sampling_matrix(out.q, cfg.p, seed);
    return out;
}

inline WeightVector weak_coreset_probabilities(const DenseMatrix& a, const WeakCoresetConfig& cfg,
                                               const LewisResult& lewis, double* alpha_out = nullptr) {
    detail::require(lewis.weights.size() == a.rows(), "Lewis weights do not match A");
    const double alpha = weak_alpha(cfg, a.rows(), a.cols(), lewis.gamma, lewis.weights.sum());
    if (alpha_out) *alpha_out = alpha;
    return detail::finalize_probabilities(lewis.weights.values() / alpha);
}

/// B-oblivious sampling with q_i = min(1, w_i / alpha).
inline SamplingMatrix build_weak_coreset(const DenseMatrix& a, const WeakCoresetConfig& cfg, const LewisResult& lewis,
                                         std::uint64_t seed) {
    detail::check_eps_delta(cfg.eps, cfg.delta, cfg.p);
    return draw_sampling_matrix(weak_coreset_probabilities(a, cfg, lewis), cfg.p, seed);
}

/// Largest constant in [lo, hi] whose pass rate meets the target, by
/// geometric bisection. pass_rate must be nonincreasing in the constant.
inline double calibrate_constant(const std::function<double(double)>& pass_rate, double target, double lo, double hi,
                                 int steps = 12) {
    detail::require(lo > 0.0 && hi > lo, "calibrate_constant: need 0 < lo < hi");
    if (pass_rate(hi) >= target) return hi;
    if (pass_rate(lo) < target) return lo;
    for (int k = 0; k < steps; ++k) {
        const double mid = std::sqrt(lo * hi);
        if (pass_rate(mid) >= target)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

} // namespace lpcoreset

#endif
