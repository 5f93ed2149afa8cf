#ifndef LPCORESET_VERIFY_HPP
#define LPCORESET_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lpcoreset/errors.hpp"
#include "lpcoreset/lewis.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/sampler.hpp"
#include "lpcoreset/solver.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

struct CoresetReport {
    std::string kind = "strong";
    std::size_t probe_count = 0;
    std::size_t skipped = 0;
    double max_rel_error = 0.0;
    double mean_rel_error = 0.0;
    double eps = 0.0;
    bool passed = false;
    std::size_t nnz = 0;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Probe sets
// ---------------------------------------------------------------------------

/// X*, 0, then alternating random X at relative scales 2^-5..2^5 of ||X*||_F
/// and perturbations X* + 2^k ||X*||_F G / ||G||_F.
inline std::vector<Matrix> structured_probes(const Matrix& x_star, std::size_t count, std::uint64_t seed) {
    std::vector<Matrix> out;
    out.reserve(std::max<std::size_t>(count, 2));
    out.push_back(x_star);
    out.push_back(Matrix::Zero(x_star.rows(), x_star.cols()));
    const double base = x_star.norm() > 0.0 ? x_star.norm() : 1.0;
    Engine gen(derive_seed(seed, 0x9b0be5ULL));
    std::size_t k = 0;
    while (out.size() < count) {
        const double scale = std::ldexp(base, static_cast<int>(k % 11) - 5);
        Matrix g = gaussian_matrix(x_star.rows(), x_star.cols(), gen);
        const double gn = g.norm();
        if (gn > 0.0) g /= gn;
        if (k % 2 == 0)
            out.push_back(scale * g);
        else
            out.push_back(x_star + scale * g);
        ++k;
    }
    return out;
}

/// Per-row costs ||e_i^T (A X_j - B)||_p^p for every probe X_j.
struct ProbeTable {
    Matrix row_costs; // n x probes
    Vector totals;    // probes
    double p = 2.0;
};

inline ProbeTable build_probe_table(const DenseMatrix& a, const DenseMatrix& b, double p,
                                    const std::vector<Matrix>& probes) {
    detail::require(a.rows() == b.rows(), "build_probe_table: A and B row counts differ");
    ProbeTable t;
    t.p = p;
    t.row_costs.resize(a.rows(), static_cast<Eigen::Index>(probes.size()));
    t.totals.resize(static_cast<Eigen::Index>(probes.size()));
    for (std::size_t j = 0; j < probes.size(); ++j) {
        detail::require(static_cast<std::size_t>(probes[j].rows()) == a.cols() &&
                            static_cast<std::size_t>(probes[j].cols()) == b.cols(),
                        "build_probe_table: probe " + std::to_string(j) + " has the wrong shape");
        const Matrix r = a.values() * probes[j] - b.values();
        const Vector c = row_abs_pow_sums(r, p);
        t.row_costs.col(static_cast<Eigen::Index>(j)) = c;
        CompensatedSum acc;
        for (Eigen::Index i = 0; i < c.size(); ++i) acc += c[i];
        t.totals[static_cast<Eigen::Index>(j)] = acc.value();
    }
    return t;
}

/// Relative errors of the sampled cost against the table. Zero-cost probes
/// are skipped.
inline CoresetReport evaluate_probe_table(const ProbeTable& t, const SamplingMatrix& s, double eps) {
    detail::require(s.n == static_cast<std::size_t>(t.row_costs.rows()),
                    "evaluate_probe_table: sampling matrix built for " + std::to_string(s.n) + " rows, table has " +
                        std::to_string(t.row_costs.rows()));
    CoresetReport rep;
    rep.eps = eps;
    rep.nnz = s.nnz();
    rep.seed = s.seed;
    const Vector w = pth_power_scales(s);
    CompensatedSum mean;
    for (Eigen::Index j = 0; j < t.totals.size(); ++j) {
        const double total = t.totals[j];
        if (!(total > 0.0)) {
            ++rep.skipped;
            continue;
        }
        CompensatedSum acc;
        for (std::size_t k = 0; k < s.kept.size(); ++k)
            acc += w[static_cast<Eigen::Index>(k)] * t.row_costs(static_cast<Eigen::Index>(s.kept[k].row), j);
        const double rel = std::fabs(acc.value() / total - 1.0);
        rep.max_rel_error = std::max(rep.max_rel_error, rel);
        mean += rel;
        ++rep.probe_count;
    }
    rep.mean_rel_error = rep.probe_count ? mean.value() / static_cast<double>(rep.probe_count) : 0.0;
    rep.passed = rep.max_rel_error <= eps;
    return rep;
}

/// Strong-coreset check of ||S(AX - B)||_{p,p}^p against ||AX - B||_{p,p}^p
/// on the structured probe set around the full-data minimizer, plus `extra`.
inline CoresetReport verify_strong(const DenseMatrix& a, const DenseMatrix& b, const SamplingMatrix& s, double p,
                                   double eps, std::size_t probes, std::uint64_t seed,
                                   const std::vector<Matrix>& extra = {}) {
    detail::require(s.n == a.rows(), "verify_strong: sampling matrix does not match A");
    detail::require(probes >= 2, "verify_strong: need at least 2 probes");
    SolveOptions opts;
    opts.tol = 1e-8;
    const SolveResult opt = solve(RegressionProblem{a, b, std::nullopt, p, std::nullopt}, opts);
    std::vector<Matrix> set = structured_probes(opt.X.values(), probes, seed);
    set.insert(set.end(), extra.begin(), extra.end());
    CoresetReport rep = evaluate_probe_table(build_probe_table(a, b, p, set), s, eps);
    rep.seed = seed;
    return rep;
}

// ---------------------------------------------------------------------------
// Weak coresets
// ---------------------------------------------------------------------------

/// Full-data optimum: the solver at tolerance 1e-8, restarted over several
/// initial smoothing levels when p < 2. Returns the best objective.
inline SolveResult full_data_opt(const RegressionProblem& prob, int restarts = 5) {
    SolveOptions opts;
    opts.tol = 1e-8;
    SolveResult best = solve(prob, opts);
    if (prob.p >= 2.0) return best;
    const double starts[] = {1e-1, 1.0, 1e-3, 1e-4};
    for (int r = 1; r < restarts && r <= 4; ++r) {
        opts.mu_start = starts[r - 1];
        SolveResult cand = solve(prob, opts);
        if (cand.objective < best.objective) best = std::move(cand);
    }
    return best;
}

/// Solves on the coreset and reports full-data objective / OPT - 1.
inline CoresetReport verify_weak(const RegressionProblem& prob, const SamplingMatrix& s, double eps,
                                 std::optional<double> opt = std::nullopt, const SolveOptions& opts = {}) {
    CoresetReport rep;
    rep.kind = "weak";
    rep.eps = eps;
    rep.nnz = s.nnz();
    rep.seed = s.seed;
    const double best = opt ? *opt : full_data_opt(prob).objective;
    const SolveResult local = solve_on_coreset(prob, s, opts);
    const double full = objective(prob, local.X);
    rep.probe_count = 1;
    if (!(best > 0.0)) {
        rep.skipped = full > 0.0 ? 0 : 1;
        rep.max_rel_error = full > 0.0 ? HUGE_VAL : 0.0;
    } else {
        rep.max_rel_error = full / best - 1.0;
    }
    rep.mean_rel_error = rep.max_rel_error;
    rep.passed = rep.max_rel_error <= eps;
    return rep;
}

inline CoresetReport verify_weak(const DenseMatrix& a, const DenseMatrix& b, const std::optional<DenseMatrix>& g,
                                 const SamplingMatrix& s, double p, double eps) {
    return verify_weak(RegressionProblem{a, b, g, p, std::nullopt}, s, eps);
}

// ---------------------------------------------------------------------------
// Difference preservation
// ---------------------------------------------------------------------------

namespace detail {

inline double sampled_pth(const SamplingMatrix& s, const Vector& r, double p) {
    CompensatedSum acc;
    for (const auto& e : s.kept) acc += abs_pow(e.scale, p) * abs_pow(r[static_cast<Eigen::Index>(e.row)], p);
    return acc.value();
}

inline double full_pth(const Vector& r, double p) {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < r.size(); ++i) acc += abs_pow(r[i], p);
    return acc.value();
}

} // namespace detail

/// Max over sampled x of
///   |(||S(Ax-b)||^p - ||Sb*||^p) - (||Ax-b||^p - ||b*||^p)|
///   / (||b*||^p + ||Sb*||^p + ||Ax - Ax*||^p / eta)
/// with b* = Ax* - b. The first trial is x = x*; the rest are x* + t u with
/// ||A(x - x*)||_p^p spread log-uniformly over 2^-12..2^6 times eta ||b*||^p.
inline double check_difference_preservation(const DenseMatrix& a, const Vector& b, const Vector& x_star,
                                            const SamplingMatrix& s, double p, double eta, std::size_t trials,
                                            std::uint64_t seed = 0) {
    detail::require(trials >= 1, "check_difference_preservation: trials must be >= 1");
    detail::require(eta > 0.0, "check_difference_preservation: eta must be positive");
    detail::require(static_cast<std::size_t>(b.size()) == a.rows() && static_cast<std::size_t>(x_star.size()) == a.cols(),
                    "check_difference_preservation: bad shapes");
    detail::require(s.n == a.rows(), "check_difference_preservation: sampling matrix does not match A");
    const Matrix& am = a.values();
    const Vector r_star = am * x_star - b;
    const double full_star = detail::full_pth(r_star, p);
    const double samp_star = detail::sampled_pth(s, r_star, p);
    const double base = full_star > 0.0 ? full_star : 1.0;
    Engine gen(derive_seed(seed, 0xd1ffULL));
    std::uniform_real_distribution<double> expo(-12.0, 6.0);

    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Vector x = x_star;
        if (t > 0) {
            const Vector u = gaussian_vector(a.cols(), gen);
            const double au = detail::full_pth(am * u, p);
            if (!(au > 0.0)) continue;
            const double target = eta * base * std::exp2(expo(gen));
            x += std::pow(target / au, 1.0 / p) * u;
        }
        const Vector r = am * x - b;
        const double lhs = std::fabs((detail::sampled_pth(s, r, p) - samp_star) - (detail::full_pth(r, p) - full_star));
        if (lhs == 0.0) continue;
        const double env = full_star + samp_star + detail::full_pth(am * (x - x_star), p) / eta;
        worst = std::max(worst, env > 0.0 ? lhs / env : HUGE_VAL);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct SensitivityPartition {
    std::vector<std::size_t> good;
    std::vector<std::size_t> outlier;
    double tau = 0.0;
};

inline double partition_threshold(double gamma, double eps, double eta, double w_sum, double p) {
    const double denom = std::pow(gamma, p / 2.0) * std::pow(eps, p);
    return p <= 2.0 ? eta / denom : eta * std::pow(w_sum, p / 2.0 - 1.0) / denom;
}

/// Splits rows by |[Ax* - b]_i|^p <= tau w_i R.
inline SensitivityPartition sensitivity_partition(const DenseMatrix& a, const Vector& b, const Vector& x_star,
                                                  const WeightVector& w, double gamma, double eps, double eta,
                                                  double r_bound, double p) {
    detail::require(static_cast<std::size_t>(b.size()) == a.rows() && w.size() == a.rows() &&
                        static_cast<std::size_t>(x_star.size()) == a.cols(),
                    "sensitivity_partition: bad shapes");
    SensitivityPartition out;
    out.tau = partition_threshold(gamma, eps, eta, w.sum(), p);
    const Vector r = a.values() * x_star - b;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const std::size_t idx = static_cast<std::size_t>(i);
        if (abs_pow(r[i], p) <= out.tau * w[idx] * r_bound)
            out.good.push_back(idx);
        else
            out.outlier.push_back(idx);
    }
    return out;
}

/// sum over `rows` of | |[Ax-b]_i|^p - |[Ax*-b]_i|^p |.
inline double outlier_mass(const DenseMatrix& a, const Vector& b, const Vector& x_star, const Vector& x,
                           const std::vector<std::size_t>& rows, double p) {
    const Vector r = a.values() * x - b;
    const Vector r0 = a.values() * x_star - b;
    CompensatedSum acc;
    for (std::size_t i : rows) {
        const auto k = static_cast<Eigen::Index>(i);
        acc += std::fabs(abs_pow(r[k], p) - abs_pow(r0[k], p));
    }
    return acc.value();
}

/// The three p = 2 conditions: subspace embedding, residual preservation,
/// and the cross term ||U^T S^T S R*||_F / ||R*||_F (U an orthonormal basis).
struct PythagoreanConditions {
    double embedding_distortion = 0.0;
    double residual_distortion = 0.0;
    double cross_term = 0.0;
    bool hold(double eps) const {
        return embedding_distortion <= eps && residual_distortion <= eps && cross_term <= eps;
    }
};

inline PythagoreanConditions pythagorean_conditions(const DenseMatrix& a, const DenseMatrix& b,
                                                    const SamplingMatrix& s) {
    detail::require(s.n == a.rows() && a.rows() == b.rows(), "pythagorean_conditions: bad shapes");
    PythagoreanConditions out;
    const detail::Orthobasis ob = detail::column_basis(a.values());
    const Matrix x_star = solve(RegressionProblem{a, b, std::nullopt, 2.0, std::nullopt}).X.values();
    const Matrix r = a.values() * x_star - b.values();

    Eigen::MatrixXd su(static_cast<Eigen::Index>(s.nnz()), ob.U.cols());
    Eigen::MatrixXd sr(static_cast<Eigen::Index>(s.nnz()), r.cols());
    for (std::size_t k = 0; k < s.kept.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(s.kept[k].row);
        su.row(static_cast<Eigen::Index>(k)) = s.kept[k].scale * ob.U.row(i);
        sr.row(static_cast<Eigen::Index>(k)) = s.kept[k].scale * r.row(i);
    }
    if (ob.rank) {
        const Eigen::MatrixXd gram = su.transpose() * su;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        const Vector ev = es.eigenvalues();
        out.embedding_distortion = std::max(std::fabs(ev.minCoeff() - 1.0), std::fabs(ev.maxCoeff() - 1.0));
    }
    const double rn = r.squaredNorm();
    if (rn > 0.0) {
        out.residual_distortion = std::fabs(sr.squaredNorm() / rn - 1.0);
        out.cross_term = (su.transpose() * sr).norm() / std::sqrt(rn);
    }
    return out;
}

// ---------------------------------------------------------------------------
// key=value records
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline std::string to_record(const CoresetReport& r) {
    std::ostringstream os;
    os << "kind=" << r.kind << " probes=" << r.probe_count << " skipped=" << r.skipped
       << " max_rel_error=" << detail::format_real(r.max_rel_error)
       << " mean_rel_error=" << detail::format_real(r.mean_rel_error) << " eps=" << detail::format_real(r.eps)
       << " passed=" << (r.passed ? 1 : 0) << " nnz=" << r.nnz << " seed=" << r.seed;
    return os.str();
}

/// Splits "k1=v1 k2=v2 ..." into a map. Tokens without '=' are a parse error.
inline std::map<std::string, std::string> parse_record(const std::string& line) {
    std::map<std::string, std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError("record: token '" + tok + "' is not key=value");
        out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

inline CoresetReport report_from_record(const std::string& line) {
    const auto kv = parse_record(line);
    auto get = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ParseError(std::string("record: missing field '") + key + "'");
        return it->second;
    };
    CoresetReport r;
    try {
        r.kind = get("kind");
        r.probe_count = std::stoull(get("probes"));
        r.skipped = std::stoull(get("skipped"));
        r.max_rel_error = std::stod(get("max_rel_error"));
        r.mean_rel_error = std::stod(get("mean_rel_error"));
        r.eps = std::stod(get("eps"));
        r.passed = get("passed") == "1";
        r.nnz = std::stoull(get("nnz"));
        r.seed = std::stoull(get("seed"));
    } catch (const std::logic_error& e) {
        throw ParseError(std::string("record: bad numeric field: ") + e.what());
    }
    return r;
}

} // namespace lpcoreset

#endif
