// SPDX-License-Identifier: Apache-2.0

#ifndef PDC_ERRORS_HPP
#define PDC_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdc {

/// Caller broke a documented precondition (dimensions, index ranges, ...).
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Not enough samples for the requested operation (N <= r, N < T, ...).
class InsufficientData : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Normal equations of the dynamics regression are numerically singular.
class IllConditioned : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The fitter could not recover from an ill-conditioned regression.
class FitFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// B = (Qx*)'Qx is singular: the compared subspaces are (nearly) orthogonal.
class DegenerateComparison : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed dataset or model file. line() is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}
}  // namespace detail

}  // namespace pdc

#endif  // PDC_ERRORS_HPP
