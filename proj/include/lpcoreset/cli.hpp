#ifndef LPCORESET_CLI_HPP
#define LPCORESET_CLI_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lpcoreset/adversarial.hpp"
#include "lpcoreset/coresets.hpp"
#include "lpcoreset/errors.hpp"
#include "lpcoreset/experiment.hpp"
#include "lpcoreset/matrix_io.hpp"
#include "lpcoreset/power_means.hpp"
#include "lpcoreset/sampler.hpp"
#include "lpcoreset/subspace.hpp"
#include "lpcoreset/synthetic.hpp"
#include "lpcoreset/verify.hpp"

namespace lpcoreset {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitVerifyFailed = 3;

namespace cli {

inline std::string real(double v) { return detail::format_real(v); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw UsageError("write failed for '" + path + "'");
}

/// key=value lines (blank lines and '#' comments ignored) turned into
/// "--key=value" arguments. "true"/"false" values become bare flags.
inline std::vector<std::string> config_arguments(const std::string& path) {
    std::istringstream is(read_file(path));
    std::vector<std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (value == "true")
            out.push_back("--" + key);
        else if (value != "false")
            out.push_back("--" + key + "=" + value);
    }
    return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& what) {
    std::vector<std::size_t> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = detail::trim(tok);
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(tok, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (tok.empty() || !std::isdigit(static_cast<unsigned char>(tok[0])) || pos != tok.size() || v == 0)
            throw UsageError(what + ": '" + tok + "' is not a positive integer");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw UsageError(what + ": empty list");
    return out;
}

inline std::string coreset_table(const SamplingMatrix& s) {
    std::string out = "row,scale\n";
    for (const auto& e : s.kept) out += std::to_string(e.row) + "," + real(e.scale) + "\n";
    return out;
}

/// Reads a "row,scale" table back into an n-row sampling matrix.
inline SamplingMatrix read_coreset_table(const std::string& path, std::size_t n, double p) {
    std::istringstream is(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    SamplingMatrix s;
    s.n = n;
    s.p = p;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (line_no == 1 && t == "row,scale") continue;
        const auto comma = t.find(',');
        if (comma == std::string::npos)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected row,scale");
        try {
            std::size_t pos = 0;
            const std::string rs = detail::trim(t.substr(0, comma)), ss = detail::trim(t.substr(comma + 1));
            const unsigned long long row = std::stoull(rs, &pos);
            if (pos != rs.size()) throw std::invalid_argument("row");
            const double scale = std::stod(ss, &pos);
            if (pos != ss.size() || !(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("scale");
            if (row >= n) throw std::out_of_range("row");
            s.kept.push_back({static_cast<std::size_t>(row), scale});
        } catch (const std::logic_error&) {
            throw ParseError(path + ": line " + std::to_string(line_no) + ": bad coreset entry '" + t + "'");
        }
    }
    return s;
}

inline DenseMatrix load_input(const std::string& path, std::ostream& err) {
    std::string warning;
    DenseMatrix m = load_matrix(path, &warning);
    if (!warning.empty()) err << "warning: " << warning << "\n";
    return m;
}

struct Common {
    double p = 2.0;
    double eps = 0.25;
    double delta = 0.1;
    std::uint64_t seed = 1;
    std::string input;
    std::string target;
    std::string output;
    std::string format = "csv";
    std::string config;
};

inline void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--p", c.p, "norm order p >= 1")->capture_default_str();
    sub->add_option("--eps", c.eps, "accuracy in (0,1)")->capture_default_str();
    sub->add_option("--delta", c.delta, "failure probability in (0,1)")->capture_default_str();
    sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
    sub->add_option("--input", c.input, "input matrix (CSV or LPCM1 binary)");
    sub->add_option("--target", c.target, "target matrix B");
    sub->add_option("--output", c.output, "output path");
    sub->add_option("--format", c.format, "matrix output format")->check(CLI::IsMember({"csv", "bin"}))->capture_default_str();
    sub->add_option("--config", c.config, "key=value config file; flags override it");
}

inline void emit_matrix(const DenseMatrix& m, const Common& c, std::ostream& out) {
    const MatrixFormat fmt = parse_matrix_format(c.format);
    if (c.output.empty())
        write_matrix(out, m, fmt);
    else
        save_matrix(c.output, m, fmt);
}

inline void emit_table(const std::string& table, const Common& c) {
    if (!c.output.empty()) write_file(c.output, table);
}

/// Expands --config: its arguments go right after the subcommand name so
/// that later command-line flags take precedence.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::vector<std::string> injected;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file path");
            injected = config_arguments(args[++i]);
        } else if (a.rfind("--config=", 0) == 0) {
            injected = config_arguments(a.substr(9));
        } else {
            out.push_back(a);
        }
    }
    if (!injected.empty()) {
        const auto at = out.empty() ? out.begin() : out.begin() + 1;
        out.insert(at, injected.begin(), injected.end());
    }
    return out;
}

} // namespace cli

/// Runs the command line (without the program name). Returns the exit code:
/// 0 success, 2 usage or parse error, 3 verification failure, 1 otherwise.
inline int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    using namespace cli;
    CLI::App app{"Coresets for multiple-response lp regression", "lpcoreset"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Common c;
    double c_alpha = 1.0, c_beta = 1.0, c_L = 3.0, c_s = 1.0, n_embed_const = 50.0, r_value = 2.0;
    std::size_t k = 1, probes = 200, n = 0, t = 20, d = 0, seeds = 5, multiplicity = 0;
    bool embedding = false;
    std::string coreset_path, mode = "strong", kind = "strong", dims = "100,500",
                sample_sizes = "100,500,1000,5000,10000";

    auto* strong = app.add_subcommand("strong-coreset", "sample a strong coreset for min ||AX - B||_{p,p}");
    add_common(strong, c);
    strong->add_option("--c-alpha", c_alpha, "Lewis-weight oversampling constant")->capture_default_str();
    strong->add_option("--c-beta", c_beta, "residual oversampling constant")->capture_default_str();

    auto* weak = app.add_subcommand("weak-coreset", "sample a B-oblivious weak coreset");
    add_common(weak, c);
    weak->add_option("--c-alpha", c_alpha, "oversampling constant")->capture_default_str();

    auto* pm = app.add_subcommand("power-means", "sublinear Euclidean power-means center");
    add_common(pm, c);
    pm->add_option("--c-L", c_L, "instance-count constant")->capture_default_str();
    pm->add_option("--c-s", c_s, "sample-size constant")->capture_default_str();
    pm->add_option("--n", n, "synthetic rows when no --input");
    pm->add_option("--t", t, "synthetic dimension when no --input")->capture_default_str();

    auto* sub = app.add_subcommand("subspace", "spanning coreset for lp subspace approximation");
    add_common(sub, c);
    sub->add_option("--k", k, "subspace rank")->capture_default_str();
    sub->add_option("--c-alpha", c_alpha, "oversampling constant")->capture_default_str();
    sub->add_flag("--embedding", embedding, "solve through a Gaussian Dvoretzky embedding");
    sub->add_option("--n-embed-const", n_embed_const, "embedding size constant")->capture_default_str();

    auto* ver = app.add_subcommand("verify", "check a coreset table against the full data");
    add_common(ver, c);
    ver->add_option("--coreset", coreset_path, "row,scale table")->required();
    ver->add_option("--mode", mode, "strong or weak")->check(CLI::IsMember({"strong", "weak"}))->capture_default_str();
    ver->add_option("--probes", probes, "strong-mode probe count")->capture_default_str();

    auto* lb = app.add_subcommand("lb-gen", "emit a lower-bound instance");
    add_common(lb, c);
    lb->add_option("--kind", kind, "strong or spanning")->check(CLI::IsMember({"strong", "spanning"}))->capture_default_str();
    lb->add_option("--d", d, "code dimension (strong)");
    lb->add_option("--multiplicity", multiplicity, "group multiplicity override (strong)");
    lb->add_option("--n", n, "rows per block (spanning)");
    lb->add_option("--k", k, "blocks (spanning)")->capture_default_str();
    lb->add_option("--R", r_value, "first-column value (spanning)")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "uniform-sampling power-means sweep (sample size vs relative error)");
    add_common(bench, c);
    bench->add_option("--dims", dims, "comma-separated feature counts m")->capture_default_str();
    bench->add_option("--sample-sizes", sample_sizes, "comma-separated sample sizes")->capture_default_str();
    bench->add_option("--seeds", seeds, "seeds per cell")->capture_default_str();
    bench->add_option("--n", n, "surrogate rows when no --input");

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*strong) {
            detail::require(!c.input.empty() && !c.target.empty(), "strong-coreset needs --input and --target");
            const DenseMatrix a = load_input(c.input, err), b = load_input(c.target, err);
            const StrongCoresetConfig cfg{c.eps, c.delta, c.p, c_alpha, c_beta};
            const StrongCoreset sc = build_strong_coreset(a, b, cfg, c.seed);
            emit_table(coreset_table(sc.S), c);
            out << "kind=strong-coreset n=" << a.rows() << " d=" << a.cols() << " m=" << b.cols()
                << " nnz=" << sc.S.nnz() << " expected_size=" << real(sc.expected_size())
                << " alpha=" << real(sc.alpha) << " beta=" << real(sc.beta) << " gamma=" << real(sc.lewis.gamma)
                << " seed=" << c.seed << "\n";
        } else if (*weak) {
            detail::require(!c.input.empty(), "weak-coreset needs --input");
            const DenseMatrix a = load_input(c.input, err);
            const WeakCoresetConfig cfg{c.eps, c.delta, c.p, c_alpha};
            const LewisResult lw = lewis_weights(a, c.p);
            double alpha = 0.0;
            const WeightVector q = weak_coreset_probabilities(a, cfg, lw, &alpha);
            const SamplingMatrix s = draw_sampling_matrix(q, c.p, c.seed);
            emit_table(coreset_table(s), c);
            out << "kind=weak-coreset n=" << a.rows() << " d=" << a.cols() << " nnz=" << s.nnz()
                << " expected_size=" << real(q.sum()) << " alpha=" << real(alpha) << " gamma=" << real(lw.gamma);
            if (!c.target.empty()) {
                const DenseMatrix b = load_input(c.target, err);
                const CoresetReport rep = verify_weak(a, b, std::nullopt, s, c.p, c.eps);
                out << " ratio=" << real(1.0 + rep.max_rel_error);
            }
            out << " seed=" << c.seed << "\n";
        } else if (*pm) {
            PowerMeansInstance inst;
            if (!c.input.empty()) {
                inst.points = load_input(c.input, err);
            } else {
                inst.points = gaussian_mixture(n ? n : 10000, t, 3, 5.0, 1.0, derive_seed(c.seed, 0x9e11ULL));
            }
            inst.p = c.p;
            PowerMeansOptions opts;
            opts.c_L = c_L;
            opts.c_s = c_s;
            const PowerMeansResult r = solve_power_means(inst, c.eps, c.delta, c.seed, opts);
            emit_matrix(DenseMatrix(Matrix(r.center.transpose())), c, out);
            if (!c.output.empty() || c.format == "csv")
                out << "kind=power-means n=" << inst.points.rows() << " t=" << inst.points.cols()
                    << " samples_used=" << r.samples_used << " sample_size=" << r.sample_size
                    << " instances=" << r.instances_run << " kept=" << r.kept_instances
                    << " estimated_cost=" << real(r.estimated_cost)
                    << " cost=" << real(power_mean_cost(inst, r.center)) << " exact_fallback=" << r.exact_fallback
                    << " seed=" << c.seed << "\n";
        } else if (*sub) {
            detail::require(!c.input.empty(), "subspace needs --input");
            SubspaceProblem prob{load_input(c.input, err), k, c.p};
            SubspaceOptions opts;
            opts.delta = c.delta;
            opts.c_alpha = c_alpha;
            opts.use_embedding = embedding;
            opts.n_embed_const = n_embed_const;
            const SpanningCoreset sc = build_spanning_coreset(prob, c.eps, c.seed, opts);
            emit_matrix(sc.subspace_basis, c, out);
            if (!c.output.empty() || c.format == "csv")
                out << "kind=subspace n=" << prob.A.rows() << " d=" << prob.A.cols() << " k=" << k
                    << " nnz=" << sc.row_indices.size() << " cost=" << real(sc.cost)
                    << " initial_cost=" << real(sc.initial_cost) << " span_residual=" << real(sc.span_residual)
                    << " embedding=" << sc.used_embedding << " seed=" << c.seed << "\n";
        } else if (*ver) {
            detail::require(!c.input.empty() && !c.target.empty(), "verify needs --input and --target");
            const DenseMatrix a = load_input(c.input, err), b = load_input(c.target, err);
            const SamplingMatrix s = read_coreset_table(coreset_path, a.rows(), c.p);
            CoresetReport rep = mode == "strong" ? verify_strong(a, b, s, c.p, c.eps, probes, c.seed)
                                                 : verify_weak(a, b, std::nullopt, s, c.p, c.eps);
            rep.seed = c.seed;
            const std::string rec = to_record(rep);
            emit_table(rec + "\n", c);
            out << rec << "\n";
            if (!rep.passed) return kExitVerifyFailed;
        } else if (*lb) {
            if (kind == "strong") {
                detail::require(d >= 1, "lb-gen --kind strong needs --d");
                const StrongLbInstance inst = strong_lb_instance(d, c.eps, c.p, c.seed, multiplicity);
                emit_matrix(inst.A, c, out);
                if (!c.target.empty()) save_matrix(c.target, inst.B, parse_matrix_format(c.format));
                if (!c.output.empty())
                    out << "kind=lb-strong rows=" << inst.A.rows() << " d=" << d
                        << " code_size=" << inst.code.vectors.rows() << " multiplicity=" << inst.multiplicity
                        << " capped=" << inst.multiplicity_capped
                        << " correlation=" << real(inst.code.max_correlation) << " seed=" << c.seed << "\n";
            } else {
                detail::require(n >= 1, "lb-gen --kind spanning needs --n");
                const DenseMatrix a = spanning_lb_instance(n, k, r_value);
                emit_matrix(a, c, out);
                if (!c.output.empty())
                    out << "kind=lb-spanning rows=" << a.rows() << " cols=" << a.cols()
                        << " upper_bound=" << real(spanning_lb_upper_bound(spanning_lb_instance(n, 1, r_value).values(), c.p))
                        << "\n";
            }
        } else if (*bench) {
            ExperimentConfig cfg;
            cfg.task = Task::Bench;
            cfg.p = c.p;
            cfg.seed = c.seed;
            cfg.dims = parse_size_list(dims, "--dims");
            cfg.sample_sizes = parse_size_list(sample_sizes, "--sample-sizes");
            cfg.seeds = seeds;
            if (n) cfg.n = n;
            std::optional<DenseMatrix> data;
            if (!c.input.empty()) data = load_input(c.input, err);
            const std::string table =
                format_power_means_table(run_power_means_experiment(cfg, data ? &*data : nullptr));
            if (c.output.empty())
                out << table;
            else
                write_file(c.output, table);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, out, err);
}

} // namespace lpcoreset

#endif
