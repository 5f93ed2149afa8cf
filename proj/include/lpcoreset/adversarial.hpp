#ifndef LPCORESET_ADVERSARIAL_HPP
#define LPCORESET_ADVERSARIAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lpcoreset/errors.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

struct CodeSet {
    std::size_t d = 0;
    DenseMatrix vectors; // s x d, entries +-1
    /// max |<s,t>| / sqrt(d) over distinct pairs (0 for fewer than two).
    double max_correlation = 0.0;
    std::size_t target_size = 0;
    std::size_t hadamard_rows = 0;
};

inline bool is_power_of_two(std::size_t v) { return v && !(v & (v - 1)); }

/// Sylvester Hadamard matrix of the given order (a power of two).
inline Matrix hadamard(std::size_t order) {
    detail::require(is_power_of_two(order), "hadamard: order must be a power of two");
    Matrix h = Matrix::Ones(1, 1);
    while (static_cast<std::size_t>(h.rows()) < order) {
        const Eigen::Index r = h.rows();
        Matrix next(2 * r, 2 * r);
        next << h, h, h, -h;
        h = next;
    }
    return h;
}

/// Exhaustive max |<s,t>| / sqrt(d) over distinct rows.
inline double max_pairwise_correlation(const Matrix& v) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = i + 1; j < v.rows(); ++j) worst = std::max(worst, std::fabs(v.row(i).dot(v.row(j))));
    return v.cols() ? worst / std::sqrt(static_cast<double>(v.cols())) : 0.0;
}

/// Sign vectors with pairwise |<s,t>| <= c_corr * sqrt(d). Starts from
/// Hadamard rows when d or d + 1 is a power of two, then adds random
/// candidates greedily. May return fewer than target_size vectors.
inline CodeSet generate_code_set(std::size_t d, std::size_t target_size, double c_corr, std::uint64_t seed,
                                 std::size_t max_tries = 100000) {
    detail::require(d >= 1, "generate_code_set: d must be >= 1");
    detail::require(c_corr >= 0.0, "generate_code_set: c_corr must be nonnegative");
    const double limit = c_corr * std::sqrt(static_cast<double>(d)) + 1e-9;
    std::vector<Vector> kept;
    std::set<std::vector<int>> seen;
    auto key = [](const Vector& v) {
        std::vector<int> k(static_cast<std::size_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) k[static_cast<std::size_t>(i)] = v[i] > 0 ? 1 : -1;
        return k;
    };
    auto try_add = [&](const Vector& v) {
        if (kept.size() >= target_size) return false;
        if (seen.count(key(v))) return false;
        for (const auto& u : kept)
            if (std::fabs(u.dot(v)) > limit) return false;
        kept.push_back(v);
        seen.insert(key(v));
        return true;
    };

    CodeSet out;
    out.d = d;
    out.target_size = target_size;
    if (is_power_of_two(d) || is_power_of_two(d + 1)) {
        const bool drop = !is_power_of_two(d);
        const Matrix h = hadamard(drop ? d + 1 : d);
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
            const Vector row = drop ? Vector(h.row(i).tail(static_cast<Eigen::Index>(d)).transpose())
                                    : Vector(h.row(i).transpose());
            out.hadamard_rows += try_add(row);
        }
    }
    Engine gen(seed);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t t = 0; t < max_tries && kept.size() < target_size; ++t) {
        Vector v(static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = coin(gen) ? 1.0 : -1.0;
        try_add(v);
    }
    Matrix m(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < kept.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = kept[i].transpose();
    out.max_correlation = max_pairwise_correlation(m);
    out.vectors = DenseMatrix(std::move(m));
    return out;
}

/// Desk-scale caps for the strong lower-bound instance.
inline constexpr std::size_t kMaxGroupMultiplicity = 200;
inline constexpr std::size_t kMaxLbRows = 5000;

struct StrongLbInstance {
    DenseMatrix A; // m x d, multiplicity copies of each code vector
    DenseMatrix B; // d * I_m
    CodeSet code;
    std::vector<std::size_t> group; // group number of each row
    std::size_t multiplicity = 0;
    std::size_t uncapped_multiplicity = 0;
    bool multiplicity_capped = false;
    double eps = 0.0;
    double p = 0.0;
    /// C with C^p >= 1 as the construction assumes: max(measured, 1).
    double correlation_constant = 1.0;
};

/// Groups of identical sign rows against B = d I_m. The requested group
/// multiplicity defaults to ceil(eps^{-p}) and is capped at 200; pass a
/// nonzero override (e.g. eps^{1-p} / (2 C^p) for the weak-coreset variant).
inline StrongLbInstance strong_lb_instance(std::size_t d, double eps, double p, std::uint64_t seed,
                                           std::size_t multiplicity_override = 0, double c_corr = 2.0,
                                           std::size_t code_size_override = 0) {
    detail::require(d >= 1, "strong_lb_instance: d must be >= 1");
    detail::require(eps > 0.0 && eps < 1.0, "strong_lb_instance: eps must lie in (0,1)");
    detail::require(p >= 1.0, "strong_lb_instance: p must be >= 1");
    StrongLbInstance out;
    out.eps = eps;
    out.p = p;
    const std::size_t s =
        code_size_override ? code_size_override
                           : static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(d), p / 2.0) - 1e-9));
    out.code = generate_code_set(d, s, c_corr, seed);
    const std::size_t got = out.code.vectors.rows();
    out.uncapped_multiplicity =
        multiplicity_override ? multiplicity_override
                              : static_cast<std::size_t>(std::ceil(std::pow(eps, -p) - 1e-9));
    out.multiplicity = std::min(out.uncapped_multiplicity, kMaxGroupMultiplicity);
    out.multiplicity_capped = out.multiplicity < out.uncapped_multiplicity;
    const std::size_t m = got * out.multiplicity;
    if (m > kMaxLbRows)
        throw UsageError("strong_lb_instance: m = " + std::to_string(m) + " exceeds the desk-scale cap of " +
                         std::to_string(kMaxLbRows) + " rows");
    detail::require(m >= 1, "strong_lb_instance: empty instance");
    Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
    out.group.resize(m);
    for (std::size_t g = 0, r = 0; g < got; ++g)
        for (std::size_t c = 0; c < out.multiplicity; ++c, ++r) {
            a.row(static_cast<Eigen::Index>(r)) = out.code.vectors.values().row(static_cast<Eigen::Index>(g));
            out.group[r] = g;
        }
    out.A = DenseMatrix(std::move(a));
    out.B = DenseMatrix(Matrix(static_cast<double>(d) * Matrix::Identity(static_cast<Eigen::Index>(m),
                                                                         static_cast<Eigen::Index>(m))));
    out.correlation_constant = std::max(1.0, out.code.max_correlation);
    return out;
}

/// X with column j equal to eps * A_j^T for j in T, zero otherwise.
inline DenseMatrix adversarial_query(const StrongLbInstance& inst, const std::vector<std::size_t>& kept) {
    const Matrix& a = inst.A.values();
    Matrix x = Matrix::Zero(a.cols(), a.rows());
    for (std::size_t j : kept) {
        detail::require(j < static_cast<std::size_t>(a.rows()), "adversarial_query: kept index out of range");
        x.col(static_cast<Eigen::Index>(j)) = inst.eps * a.row(static_cast<Eigen::Index>(j)).transpose();
    }
    return DenseMatrix(std::move(x));
}

/// Closed-form cost of row i under the adversarial query, using the actual
/// pairwise inner products for rows of other groups.
inline double adversarial_row_cost(const StrongLbInstance& inst, const std::vector<std::size_t>& kept, std::size_t i) {
    const Matrix& a = inst.A.values();
    const double d = static_cast<double>(a.cols());
    const double eps = inst.eps, p = inst.p;
    bool in_t = false;
    std::size_t same = 0;
    CompensatedSum cross;
    for (std::size_t j : kept) {
        if (j == i) {
            in_t = true;
            continue;
        }
        if (inst.group[j] == inst.group[i])
            ++same;
        else
            cross += abs_pow(eps * a.row(static_cast<Eigen::Index>(i)).dot(a.row(static_cast<Eigen::Index>(j))), p);
    }
    const double diag = in_t ? abs_pow((1.0 - eps) * d, p) : abs_pow(d, p);
    return diag + static_cast<double>(same) * abs_pow(eps * d, p) + cross.value();
}

/// [R 1_n, I_n] repeated k times block-diagonally: kn x k(n+1).
inline DenseMatrix spanning_lb_instance(std::size_t n, std::size_t k, double r) {
    detail::require(r >= 2.0, "spanning_lb_instance: R must be >= 2");
    detail::require(n >= 1 && k >= 1, "spanning_lb_instance: n and k must be >= 1");
    const Eigen::Index nn = static_cast<Eigen::Index>(n);
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(k) * nn, static_cast<Eigen::Index>(k) * (nn + 1));
    for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(k); ++b) {
        m.block(b * nn, b * (nn + 1), nn, 1).setConstant(r);
        m.block(b * nn, b * (nn + 1) + 1, nn, nn).setIdentity();
    }
    return DenseMatrix(std::move(m));
}

/// sum_i ||a_i - P_y a_i||_2^p for the line spanned by y.
inline double rank1_cost(const Matrix& a, const Vector& y, double p) {
    const double yy = y.squaredNorm();
    detail::require(yy > 0.0, "rank1_cost: direction must be nonzero");
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double proj = a.row(i).dot(y);
        const double res2 = std::max(0.0, a.row(i).squaredNorm() - proj * proj / yy);
        acc += abs_pow(std::sqrt(res2), p);
    }
    return acc.value();
}

/// Rank-1 cost bound for the [R 1, I] instance from the direction
/// sum_i eps a_i with eps = 1/n.
inline double spanning_lb_upper_bound(const Matrix& a, double p) {
    const double eps = 1.0 / static_cast<double>(a.rows());
    const Vector y = eps * a.colwise().sum().transpose();
    return rank1_cost(a, y, p);
}

/// Minimum rank-1 cost over lines inside the span of the given rows. One row
/// is exact; two rows use an angle scan plus golden-section refinement;
/// larger subsets use restarted pattern search.
inline double best_rank1_in_span(const Matrix& a, const std::vector<std::size_t>& rows, double p,
                                 std::uint64_t seed = 1) {
    detail::require(!rows.empty(), "best_rank1_in_span: empty subset");
    Matrix basis(static_cast<Eigen::Index>(rows.size()), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) basis.row(static_cast<Eigen::Index>(i)) = a.row(static_cast<Eigen::Index>(rows[i]));
    auto cost_of = [&](const Vector& coef) {
        const Vector y = basis.transpose() * coef;
        return y.squaredNorm() > 0.0 ? rank1_cost(a, y, p) : HUGE_VAL;
    };
    if (rows.size() == 1) return cost_of(Vector::Ones(1));

    auto golden = [&](auto&& f, double lo, double hi) {
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 80; ++it) {
            if (f1 < f2) {
                hi = x2; x2 = x1; f2 = f1; x1 = hi - g * (hi - lo); f1 = f(x1);
            } else {
                lo = x1; x1 = x2; f1 = f2; x2 = lo + g * (hi - lo); f2 = f(x2);
            }
        }
        return std::min(f1, f2);
    };

    if (rows.size() == 2) {
        const int grid = 3600;
        double best = HUGE_VAL;
        int best_k = 0;
        for (int k = 0; k < grid; ++k) {
            const double th = M_PI * k / grid;
            Vector c(2);
            c << std::cos(th), std::sin(th);
            const double v = cost_of(c);
            if (v < best) {
                best = v;
                best_k = k;
            }
        }
        const double step = M_PI / grid;
        const double refined = golden(
            [&](double th) {
                Vector c(2);
                c << std::cos(th), std::sin(th);
                return cost_of(c);
            },
            (best_k - 1) * step, (best_k + 1) * step);
        return std::min(best, refined);
    }

    // Pattern search over coefficients with shrinking steps.
    Engine gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double best = HUGE_VAL;
    const Eigen::Index s = static_cast<Eigen::Index>(rows.size());
    for (int restart = 0; restart < 20; ++restart) {
        Vector c(s);
        for (Eigen::Index i = 0; i < s; ++i) c[i] = restart == 0 ? 1.0 : u(gen);
        double cur = cost_of(c);
        for (double step = 0.5; step > 1e-9;) {
            bool improved = false;
            for (Eigen::Index i = 0; i < s; ++i)
                for (double dir : {1.0, -1.0}) {
                    Vector t = c;
                    t[i] += dir * step;
                    const double v = cost_of(t);
                    if (v < cur) {
                        cur = v;
                        c = t;
                        improved = true;
                    }
                }
            if (!improved) step *= 0.5;
        }
        best = std::min(best, cur);
    }
    return best;
}

} // namespace lpcoreset

#endif
