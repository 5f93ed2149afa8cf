#ifndef LPCORESET_ERRORS_HPP
#define LPCORESET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lpcoreset {

/// Caller passed arguments that violate an operation's preconditions
/// (shape mismatch, parameter out of range, ...). The CLI maps this to exit code 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input is well-formed but outside the mathematical domain of the operation
/// (non-finite entries, all-zero weights, undefined gradients).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed matrix or coreset file.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw UsageError(what);
}

} // namespace detail

} // namespace lpcoreset

#endif
