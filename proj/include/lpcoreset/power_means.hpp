#ifndef LPCORESET_POWER_MEANS_HPP
#define LPCORESET_POWER_MEANS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "lpcoreset/errors.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/solver.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

struct PowerMeansInstance {
    DenseMatrix points; // n x t, rows are the b_i
    double p = 2.0;
};

struct PowerMeansOptions {
    double c_L = 3.0;
    double c_s = 1.0;
    /// Initial-center sample size is ceil(c_center * ln(1/delta)).
    double c_center = 8.0;
    SolveOptions solve;
};

struct PowerMeansResult {
    Vector center;
    /// Validation-sample estimate of the full cost, scaled by n / sample size.
    double estimated_cost = 0.0;
    /// Rows read by the L sampled instances (L * s unless fallback).
    std::size_t samples_used = 0;
    std::size_t instances_run = 0;
    std::size_t kept_instances = 0;
    std::size_t sample_size = 0;
    std::size_t centering_samples = 0;
    std::size_t validation_samples = 0;
    bool exact_fallback = false;
};

/// sum_i ||x - b_i||_2^p.
inline double power_mean_cost(const Matrix& points, const Vector& x, double p) {
    detail::require(points.cols() == x.size(), "power_mean_cost: dimension mismatch");
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < points.rows(); ++i) acc += abs_pow((points.row(i).transpose() - x).norm(), p);
    return acc.value();
}

inline double power_mean_cost(const PowerMeansInstance& inst, const Vector& x) {
    return power_mean_cost(inst.points.values(), x, inst.p);
}

/// Cost divided by n.
inline double power_mean_cost_normalized(const PowerMeansInstance& inst, const Vector& x) {
    detail::require(inst.points.rows() > 0, "power_mean_cost_normalized: no points");
    return power_mean_cost(inst, x) / static_cast<double>(inst.points.rows());
}

/// Center minimizing sum over the sample of ||x - b_i||_2^p. Uses Weiszfeld-
/// style reweighting; p = 2 is the sample mean.
inline Vector sampled_center_solve(const Matrix& sample, double p, const SolveOptions& opts = {},
                                   bool* converged = nullptr) {
    detail::require(sample.rows() > 0, "sampled_center_solve: empty sample");
    const Matrix ones = Matrix::Ones(sample.rows(), 1);
    const SolveResult r = solve_row_norm(ones, sample, p, Vector::Ones(sample.rows()), opts);
    if (converged) *converged = r.converged;
    return r.X.values().row(0).transpose();
}

/// Rows used per sampled instance: c_s * eps^{-rho} * (ln(1/eps) + ln(1/delta))
/// with rho = 2, 1, p - 1 for p = 1, 1 < p <= 2, p > 2. Depends on (eps,
/// delta, p) only.
inline std::size_t power_means_sample_size(double eps, double delta, double p, double c_s = 1.0) {
    detail::require(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0, "eps and delta must lie in (0,1)");
    detail::require(p >= 1.0, "p must be >= 1");
    const double rho = p == 1.0 ? 2.0 : (p <= 2.0 ? 1.0 : p - 1.0);
    const double s = c_s * std::pow(eps, -rho) * (std::log(1.0 / eps) + std::log(1.0 / delta));
    return static_cast<std::size_t>(std::max(1.0, std::ceil(s)));
}

inline std::size_t power_means_instances(double delta, double c_L = 3.0) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(c_L * std::log(1.0 / delta))));
}

namespace detail {

/// s distinct indices from [0, n), uniformly (Floyd's algorithm), sorted.
inline std::vector<std::size_t> uniform_subset(std::size_t n, std::size_t s, Engine& gen) {
    std::vector<std::size_t> out;
    if (s >= n) {
        out.resize(n);
        std::iota(out.begin(), out.end(), std::size_t{0});
        return out;
    }
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(s * 2);
    for (std::size_t j = n - s; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> dist(0, j);
        const std::size_t v = dist(gen);
        if (!chosen.insert(v).second) chosen.insert(j);
    }
    out.assign(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

inline Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t k = 0; k < idx.size(); ++k)
        out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(idx[k]));
    return out;
}

} // namespace detail

/// Sublinear power-means solver: O(1)-approximate centering, L uniformly
/// sampled instances, keep the 2L/3 with the smallest sampled mass, pick the
/// kept center that does best on a fresh validation sample.
inline PowerMeansResult solve_power_means(const PowerMeansInstance& inst, double eps, double delta,
                                          std::uint64_t seed, const PowerMeansOptions& opts = {}) {
    detail::require(eps > 0.0 && eps < 1.0, "solve_power_means: eps must lie in (0,1)");
    detail::require(delta > 0.0 && delta < 1.0, "solve_power_means: delta must lie in (0,1)");
    detail::require(inst.p >= 1.0 && std::isfinite(inst.p), "solve_power_means: p must be >= 1");
    const Matrix& b = inst.points.values();
    const std::size_t n = static_cast<std::size_t>(b.rows());
    detail::require(n >= 1, "solve_power_means: instance has no points");
    const double p = inst.p;

    PowerMeansResult out;
    const std::size_t s = power_means_sample_size(eps, delta, p, opts.c_s);
    const std::size_t instances = power_means_instances(delta, opts.c_L);
    out.sample_size = s;
    SolveOptions sopts = opts.solve;

    if (n <= s) {
        out.center = sampled_center_solve(b, p, sopts);
        out.estimated_cost = power_mean_cost(b, out.center, p);
        out.samples_used = n;
        out.exact_fallback = true;
        return out;
    }

    // (1) O(1)-approximate center: best sampled point under sampled cost.
    Engine cgen(derive_seed(seed, 0xce17e5ULL));
    const std::size_t m0 = std::min(n, static_cast<std::size_t>(std::ceil(opts.c_center * std::log(1.0 / delta))));
    const Matrix probe = detail::gather_rows(b, detail::uniform_subset(n, std::max<std::size_t>(m0, 1), cgen));
    out.centering_samples = static_cast<std::size_t>(probe.rows());
    Vector x_hat = probe.row(0).transpose();
    double best = HUGE_VAL;
    for (Eigen::Index i = 0; i < probe.rows(); ++i) {
        const Vector c = probe.row(i).transpose();
        const double cost = power_mean_cost(probe, c, p);
        if (cost < best) {
            best = cost;
            x_hat = c;
        }
    }

    // (2) L independent sampled instances on translated points.
    struct Candidate {
        Vector center;
        double mass;
    };
    std::vector<Candidate> cands;
    cands.reserve(instances);
    for (std::size_t l = 0; l < instances; ++l) {
        Engine gen(derive_seed(seed, 1000 + l));
        Matrix sample = detail::gather_rows(b, detail::uniform_subset(n, s, gen));
        sample.rowwise() -= x_hat.transpose();
        CompensatedSum mass;
        for (Eigen::Index i = 0; i < sample.rows(); ++i) mass += abs_pow(sample.row(i).norm(), p);
        cands.push_back({sampled_center_solve(sample, p, sopts), mass.value()});
        out.samples_used += static_cast<std::size_t>(sample.rows());
    }
    out.instances_run = instances;

    // (3) Keep the ceil(2L/3) instances with the smallest sampled mass.
    const std::size_t keep = std::max<std::size_t>(1, (2 * instances + 2) / 3);
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return cands[i].mass < cands[j].mass; });
    order.resize(keep);
    out.kept_instances = keep;

    // (4) Select on a fresh validation sample.
    Engine vgen(derive_seed(seed, 0x7a11dULL));
    Matrix val = detail::gather_rows(b, detail::uniform_subset(n, s, vgen));
    val.rowwise() -= x_hat.transpose();
    out.validation_samples = static_cast<std::size_t>(val.rows());
    double best_val = HUGE_VAL;
    std::size_t chosen = order.front();
    for (std::size_t idx : order) {
        const double c = power_mean_cost(val, cands[idx].center, p);
        if (c < best_val) {
            best_val = c;
            chosen = idx;
        }
    }
    out.center = cands[chosen].center + x_hat;
    out.estimated_cost = best_val * static_cast<double>(n) / static_cast<double>(val.rows());
    return out;
}

} // namespace lpcoreset

#endif
