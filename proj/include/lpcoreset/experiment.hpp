#ifndef LPCORESET_EXPERIMENT_HPP
#define LPCORESET_EXPERIMENT_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lpcoreset/errors.hpp"
#include "lpcoreset/power_means.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/solver.hpp"
#include "lpcoreset/synthetic.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

enum class Task { Strong, Weak, PowerMeans, Subspace, Verify, LbInstance, Bench };

struct ExperimentConfig {
    Task task = Task::Bench;
    double p = 1.0;
    double eps = 0.1;
    double delta = 0.1;
    std::uint64_t seed = 2024;
    std::vector<std::string> inputs;
    std::string target;
    std::string output;
    double c_alpha = 1.0;
    double c_beta = 1.0;
    double c_L = 3.0;
    double n_embed_const = 50.0;
    std::vector<std::size_t> sample_sizes{100, 500, 1000, 5000, 10000};
    std::vector<std::size_t> dims{100, 500};
    std::size_t seeds = 5;
    /// Rows of the synthetic surrogate when no input is given.
    std::size_t n = kDigitRows;

    void validate() const {
        detail::require(p >= 1.0, "config: p must be >= 1");
        detail::require(eps > 0.0 && eps < 1.0, "config: eps must lie in (0,1)");
        detail::require(delta > 0.0 && delta < 1.0, "config: delta must lie in (0,1)");
        switch (task) {
        case Task::Strong:
        case Task::Verify:
            detail::require(!inputs.empty() && !target.empty(), "config: task needs --input and --target");
            break;
        case Task::Weak:
        case Task::Subspace:
            detail::require(!inputs.empty(), "config: task needs --input");
            break;
        case Task::Bench:
            detail::require(!sample_sizes.empty() && !dims.empty() && seeds >= 1,
                            "config: bench needs sample sizes, dimensions and at least one seed");
            for (std::size_t s : sample_sizes) detail::require(s >= 1, "config: sample sizes must be >= 1");
            break;
        default:
            break;
        }
    }
};

struct PowerMeansRow {
    std::size_t m = 0;
    std::size_t sample_size = 0;
    double relative_error = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

inline double mean_cost(const Matrix& pts, const Vector& x, double p) {
    return power_mean_cost(pts, x, p) / static_cast<double>(pts.rows());
}

} // namespace detail

/// Uniform-sampling sweep: for each m, draw m feature columns with
/// replacement, solve the full power-means problem for OPT, then for each
/// seed and sample size solve on a with-replacement uniform row sample and
/// report (full cost of the sampled center) / OPT - 1. A sample size >= n
/// uses every row. Uses `data` when given, else the digit surrogate.
inline std::vector<PowerMeansRow> run_power_means_experiment(const ExperimentConfig& cfg,
                                                             const DenseMatrix* data = nullptr) {
    ExperimentConfig c = cfg;
    c.task = Task::Bench;
    c.validate();
    const std::size_t n = data ? data->rows() : cfg.n;
    const std::size_t features = data ? data->cols() : kDigitFeatures;
    detail::require(n >= 1 && features >= 1, "run_power_means_experiment: empty dataset");
    SolveOptions opts;
    opts.tol = 1e-12;

    std::vector<PowerMeansRow> rows;
    for (std::size_t m : cfg.dims) {
        detail::require(m >= 1, "run_power_means_experiment: m must be >= 1");
        Engine cgen(derive_seed(cfg.seed, 0xc0150000ULL + m));
        std::uniform_int_distribution<std::size_t> pick_col(0, features - 1);
        std::vector<std::size_t> cols(m);
        for (auto& j : cols) j = pick_col(cgen);
        Matrix pts;
        if (data) {
            pts.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
            for (std::size_t k = 0; k < m; ++k) pts.col(static_cast<Eigen::Index>(k)) = data->values().col(static_cast<Eigen::Index>(cols[k]));
        } else {
            pts = digits_surrogate_columns(n, cols, cfg.seed).values();
        }
        const Vector center = sampled_center_solve(pts, cfg.p, opts);
        const double opt = detail::mean_cost(pts, center, cfg.p);

        for (std::size_t r = 0; r < cfg.seeds; ++r) {
            const std::uint64_t seed = cfg.seed + r;
            for (std::size_t s : cfg.sample_sizes) {
                Vector x;
                if (s >= n) {
                    x = center;
                } else {
                    Engine gen(derive_seed(derive_seed(seed, m), s));
                    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
                    std::vector<std::size_t> idx(s);
                    for (auto& i : idx) i = pick(gen);
                    x = sampled_center_solve(detail::gather_rows(pts, idx), cfg.p, opts);
                }
                const double est = detail::mean_cost(pts, x, cfg.p);
                rows.push_back({m, s, opt > 0.0 ? est / opt - 1.0 : 0.0, seed});
            }
        }
    }
    return rows;
}

inline std::string format_power_means_table(const std::vector<PowerMeansRow>& rows) {
    std::string out = "m,sample_size,relative_error,seed\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%llu\n", r.m, r.sample_size, r.relative_error,
                      static_cast<unsigned long long>(r.seed));
        out += buf;
    }
    return out;
}

/// Median relative error per (m, sample_size).
inline std::map<std::pair<std::size_t, std::size_t>, double> median_by_cell(const std::vector<PowerMeansRow>& rows) {
    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> cells;
    for (const auto& r : rows) cells[{r.m, r.sample_size}].push_back(r.relative_error);
    std::map<std::pair<std::size_t, std::size_t>, double> out;
    for (auto& [key, v] : cells) {
        std::sort(v.begin(), v.end());
        const std::size_t h = v.size() / 2;
        out[key] = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    }
    return out;
}

} // namespace lpcoreset

#endif
