#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simopt {

enum class ErrorKind {
  dimension,
  configuration,
  empty_request,
  insufficient_samples,
  invalid_gradient,
  invalid_constraint,
  solver_stall,
  degenerate_pair,
  undefined_metric,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 protected:
  struct Rethrown {};
  // Keeps an already formatted message (used when wrapping another Error).
  Error(Rethrown, const Error& cause) : std::runtime_error(cause.what()), kind_(cause.kind()) {}

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace simopt
