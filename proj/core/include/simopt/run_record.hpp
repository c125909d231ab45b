#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simopt/backend.hpp"
#include "simopt/error.hpp"

namespace simopt {

struct TraceRow {
  std::size_t iteration = 0;  // 1-based global step
  double objective = 0.0;
  std::int64_t elapsed_ns = 0;  // cumulative since the run started
};

struct RunMetadata {
  std::string task;
  std::size_t size = 0;
  std::string backend;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
};

struct RunRecord {
  RunMetadata meta;
  std::vector<TraceRow> rows;
  DenseVector final_iterate;
  std::vector<std::string> warnings;

  double final_objective() const { return rows.empty() ? 0.0 : rows.back().objective; }
  std::int64_t total_elapsed_ns() const { return rows.empty() ? 0 : rows.back().elapsed_ns; }
};

/// Thrown when a run fails part-way; carries the trace recorded so far.
class PartialRunError : public Error {
 public:
  PartialRunError(const Error& cause, RunRecord partial)
      : Error(Rethrown{}, cause), partial_(std::move(partial)) {}

  const RunRecord& partial() const noexcept { return partial_; }

 private:
  RunRecord partial_;
};

}  // namespace simopt
