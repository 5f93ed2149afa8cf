#ifndef LPCORESET_TENSOR_CORE_HPP
#define LPCORESET_TENSOR_CORE_HPP

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lpcoreset/errors.hpp"

namespace lpcoreset {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Whether a norm routine returns ||.|| or ||.||^p.
enum class NormPower { Root, PthPower };

// ---------------------------------------------------------------------------
// Scalar helpers
// ---------------------------------------------------------------------------

/// |x|^p for p > 0, evaluated as exp(p ln|x|) with exact branches for x = 0
/// and small integer exponents.
inline double abs_pow(double x, double p) {
    const double a = std::fabs(x);
    if (a == 0.0) return p == 0.0 ? 1.0 : 0.0;
    if (p == 1.0) return a;
    if (p == 2.0) return a * a;
    if (p == 3.0) return a * a * a;
    if (p == 4.0) {
        const double s = a * a;
        return s * s;
    }
    return std::exp(p * std::log(a));
}

/// x^{∘q} := sign(x)|x|^q, the entrywise signed power.
inline double signed_pow(double x, double q) {
    if (x == 0.0) return 0.0;
    const double m = abs_pow(x, q);
    return x < 0.0 ? -m : m;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double v) {
        add(v);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

namespace detail {

inline void require_norm_order(double p) {
    if (!(p >= 1.0) || !std::isfinite(p))
        throw UsageError("norm order p must be a finite real >= 1, got " + std::to_string(p));
}

inline double finish_norm(double pth, double p, NormPower power) {
    return power == NormPower::PthPower ? pth : std::pow(pth, 1.0 / p);
}

/// Sum of |x|^p over any Eigen expression, compensated.
template <typename Derived>
double sum_abs_pow(const Eigen::DenseBase<Derived>& x, double p) {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double v = x(i, j);
            if (!std::isfinite(v)) throw DomainError("non-finite entry in norm evaluation");
            acc += abs_pow(v, p);
        }
    return acc.value();
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (!std::isfinite(x(i, j))) return false;
    return true;
}

} // namespace detail

// ---------------------------------------------------------------------------
// DenseMatrix
// ---------------------------------------------------------------------------

/// Immutable row-major real matrix whose entries are all finite.
///
/// Holds the design matrix, targets, embeddings and solutions. Every
/// transform produces a new value; the only way to get at the storage is
/// through const accessors.
class DenseMatrix {
public:
    DenseMatrix() = default;

    explicit DenseMatrix(Matrix values) : values_(std::move(values)) {
        if (!detail::all_finite(values_)) throw DomainError("DenseMatrix entries must be finite");
    }

    DenseMatrix(std::size_t rows, std::size_t cols, std::span<const double> row_major) {
        if (row_major.size() != rows * cols)
            throw UsageError("DenseMatrix data length " + std::to_string(row_major.size()) +
                             " does not match shape " + std::to_string(rows) + "x" +
                             std::to_string(cols));
        values_.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        std::copy(row_major.begin(), row_major.end(), values_.data());
        if (!detail::all_finite(values_)) throw DomainError("DenseMatrix entries must be finite");
    }

    static DenseMatrix zeros(std::size_t rows, std::size_t cols) {
        return DenseMatrix(Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
    }
    static DenseMatrix identity(std::size_t n) {
        return DenseMatrix(Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
    }

    std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
    bool empty() const { return values_.size() == 0; }

    double operator()(std::size_t i, std::size_t j) const {
        return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    const Matrix& values() const { return values_; }
    std::span<const double> data() const {
        return {values_.data(), static_cast<std::size_t>(values_.size())};
    }
    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols(), cols()};
    }

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
               a.values_ == b.values_;
    }

private:
    Matrix values_;
};

// ---------------------------------------------------------------------------
// WeightVector
// ---------------------------------------------------------------------------

/// Nonnegative finite per-row weights (Lewis weights, residual fractions,
/// sampling probabilities).
class WeightVector {
public:
    WeightVector() = default;

    explicit WeightVector(Vector values) : values_(std::move(values)) {
        for (Eigen::Index i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i]) || values_[i] < 0.0)
                throw DomainError("WeightVector entries must be finite and nonnegative (index " +
                                  std::to_string(i) + ")");
    }

    explicit WeightVector(std::span<const double> values)
        : WeightVector(Vector(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())))) {}

    WeightVector(std::initializer_list<double> values)
        : WeightVector(std::span<const double>(values.begin(), values.size())) {}

    static WeightVector constant(std::size_t n, double v) {
        return WeightVector(Vector::Constant(static_cast<Eigen::Index>(n), v));
    }

    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
    const Vector& values() const { return values_; }
    double sum() const {
        CompensatedSum s;
        for (Eigen::Index i = 0; i < values_.size(); ++i) s += values_[i];
        return s.value();
    }
    double max() const { return values_.size() ? values_.maxCoeff() : 0.0; }

private:
    Vector values_;
};

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// Entrywise ||M||_{p,p} = (sum_ij |M_ij|^p)^{1/p}.
inline double entrywise_lp_norm(const DenseMatrix& m, double p, NormPower power = NormPower::Root) {
    detail::require_norm_order(p);
    return detail::finish_norm(detail::sum_abs_pow(m.values(), p), p, power);
}

/// ||M||_{p,2}: lp norm of the Euclidean row norms.
inline double row_lp2_norm(const DenseMatrix& m, double p, NormPower power = NormPower::Root) {
    detail::require_norm_order(p);
    CompensatedSum acc;
    const Matrix& v = m.values();
    for (Eigen::Index i = 0; i < v.rows(); ++i) acc += abs_pow(v.row(i).norm(), p);
    return detail::finish_norm(acc.value(), p, power);
}

/// Plain lp norm of a vector.
inline double lp_norm(std::span<const double> y, double p, NormPower power = NormPower::Root) {
    detail::require_norm_order(p);
    CompensatedSum acc;
    for (double v : y) {
        if (!std::isfinite(v)) throw DomainError("non-finite entry in norm evaluation");
        acc += abs_pow(v, p);
    }
    return detail::finish_norm(acc.value(), p, power);
}

/// ||y||_{w,p} = (sum_i w_i |y_i|^p)^{1/p}.
inline double weighted_lp_norm(std::span<const double> y, const WeightVector& w, double p,
                               NormPower power = NormPower::Root) {
    detail::require_norm_order(p);
    if (y.size() != w.size())
        throw UsageError("weighted_lp_norm: vector length " + std::to_string(y.size()) +
                         " != weight length " + std::to_string(w.size()));
    CompensatedSum acc;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i])) throw DomainError("non-finite entry in norm evaluation");
        acc += w[i] * abs_pow(y[i], p);
    }
    return detail::finish_norm(acc.value(), p, power);
}

/// Per-row sums sum_j |M_ij|^p.
template <typename Derived>
Vector row_abs_pow_sums(const Eigen::MatrixBase<Derived>& m, double p) {
    Vector out(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        CompensatedSum acc;
        for (Eigen::Index j = 0; j < m.cols(); ++j) acc += abs_pow(m(i, j), p);
        out[i] = acc.value();
    }
    return out;
}

} // namespace lpcoreset

#endif
