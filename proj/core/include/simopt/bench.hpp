#pragma once

// Benchmark driver: configuration, problem-instance generation, experiment
// orchestration over sizes x backends x repetitions, RSE/timing summaries and
// CSV/SVG output.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simopt/backend.hpp"
#include "simopt/frank_wolfe.hpp"
#include "simopt/run_record.hpp"
#include "simopt/sqn.hpp"
#include "simopt/tasks.hpp"

namespace simopt::bench {

struct BenchConfig {
  TaskKind task = TaskKind::meanvar;
  std::vector<std::size_t> sizes;  // empty means the task's default
  std::vector<BackendVariant> backends{BackendVariant::sequential, BackendVariant::parallel};
  std::size_t chunk_size = 4096;
  std::size_t workers = 0;
  std::size_t repetitions = 7;
  std::uint64_t seed = 42;
  bool parallel_reps = false;
  FwConfig fw;
  SqnConfig sqn;
  std::filesystem::path out = "bench_out";

  /// Sizes to run, falling back to the task's default.
  std::vector<std::size_t> effective_sizes() const;
  void validate() const;
};

/// Parses flat `key = value` text; `#` starts a comment. Unknown keys,
/// malformed values and inconsistent iteration counts are configuration errors.
BenchConfig parse_config(std::string_view text);
BenchConfig load_config(const std::filesystem::path& path);

/// Applies one `key = value` setting on top of an existing configuration.
void apply_setting(BenchConfig& config, std::string_view key, std::string_view value);

/// Renders a configuration in the format parse_config reads.
std::string render_config(const BenchConfig& config);

// ---------------------------------------------------------------------------
// Instances

MeanVarTask gen_meanvar_instance(std::size_t d, RngStream stream);
NewsvendorTask gen_newsvendor_instance(std::size_t products, RngStream stream);
LogisticTask gen_classification_instance(std::size_t features, RngStream stream,
                                         const Backend& backend = {});
TaskSpec gen_instance(TaskKind kind, std::size_t size, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Metrics

/// ((y_t - y_star) / y_t)^2 * 100; undefined_metric when y_t == 0.
double rse(double y_t, double y_star);

/// RSE of the trace at iteration t against the record's final objective;
/// empty if the trace is shorter than t or y_t == 0.
std::optional<double> rse_at(const RunRecord& record, std::size_t iteration);

inline constexpr std::size_t kRseCheckpoints[] = {50, 100, 500, 1000};

struct MeanCi {
  double mean = 0.0;
  double ci2s = 0.0;  // two sample standard deviations
};

/// Mean and 2 x sample standard deviation; ci2s is 0 for a single value.
MeanCi mean_ci(std::span<const double> values);

struct SummaryRow {
  std::string task;
  std::size_t size = 0;
  std::string backend;
  double mean_time_ns = 0.0;
  double ci2s_ns = 0.0;
  std::map<std::size_t, std::optional<MeanCi>> rse;  // keyed by checkpoint
};

struct Summary {
  std::vector<SummaryRow> rows;
  std::vector<std::string> warnings;
};

/// Groups records by (task, size, backend) in sorted order and summarizes each
/// cell across repetitions.
Summary summarize(const std::vector<RunRecord>& records);

// ---------------------------------------------------------------------------
// Orchestration and I/O

struct BenchOutcome {
  std::vector<RunRecord> records;
  Summary summary;
};

BenchOutcome run_bench(const BenchConfig& config);

/// Runs one cell's optimizer on a prepared instance.
RunRecord run_single(const TaskSpec& task, const BenchConfig& config, const Backend& backend,
                     std::size_t rep);

std::string format_double(double v);

std::string trace_file_name(const RunMetadata& meta);
void write_trace_csv(const std::filesystem::path& path, const RunRecord& record);
std::vector<RunRecord> read_trace_csv(const std::filesystem::path& path);
/// All trace_*.csv files in the directory, in file-name order.
std::vector<RunRecord> read_trace_dir(const std::filesystem::path& dir);

void write_summary_csv(const std::filesystem::path& path, const Summary& summary);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

inline constexpr std::string_view kTraceHeader =
    "task,size,backend,rep,iteration,objective,elapsed_ns";
inline constexpr std::string_view kSummaryHeader =
    "task,size,backend,mean_time_ns,ci2s_ns,rse50,rse50_ci,rse100,rse100_ci,rse500,rse500_ci,"
    "rse1000,rse1000_ci";

/// Reads the traces in `dir`, writes summary.csv there and returns it.
Summary summarize_dir(const std::filesystem::path& dir);

/// Writes rse.svg and timing.svg into `dir` from its traces and summary.
std::vector<std::filesystem::path> plot_dir(const std::filesystem::path& dir);

}  // namespace simopt::bench
