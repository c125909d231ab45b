#include "simopt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <tuple>

namespace simopt::bench {

// ---------------------------------------------------------------------------
// Instances

namespace {

// lo + (hi - lo) u mapped strictly inside (lo, hi).
double uniform_open(double lo, double hi, double u) {
  const double v = lo + (hi - lo) * std::max(u, 0x1.0p-53);
  return std::clamp(v, std::nextafter(lo, hi), std::nextafter(hi, lo));
}

}  // namespace

MeanVarTask gen_meanvar_instance(std::size_t d, RngStream stream) {
  require(d >= 2, ErrorKind::configuration, "portfolio needs at least 2 assets");
  const DenseVector u = uniform01(stream, 2 * d);
  DenseVector mu(d), sd(d);
  for (std::size_t j = 0; j < d; ++j) {
    mu[j] = uniform_open(-1.0, 1.0, u[j]);
    sd[j] = uniform_open(0.0, 0.025, u[d + j]);
  }
  return MeanVarTask{GaussianSpec{std::move(mu), std::move(sd)}};
}

NewsvendorTask gen_newsvendor_instance(std::size_t products, RngStream stream) {
  require(products >= 1, ErrorKind::configuration, "newsvendor needs at least one product");
  const std::size_t n = products;
  const DenseVector u = uniform01(stream, 5 * n);
  NewsvendorTask task;
  task.demand_mean.resize(n);
  task.demand_std.resize(n);
  task.unit_cost.resize(n);
  task.selling_value.resize(n);
  task.holding_cost.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    task.demand_mean[j] = uniform_open(20.0, 50.0, u[j]);
    task.demand_std[j] = uniform_open(10.0, 20.0, u[n + j]);
    task.unit_cost[j] = uniform_open(1.0, 2.0, u[2 * n + j]);
    task.selling_value[j] = uniform_open(3.0, 5.0, u[3 * n + j]);
    task.holding_cost[j] = uniform_open(0.5, 1.0, u[4 * n + j]);
  }
  SingleBudgetSet budget;
  budget.c.assign(n, 1.0);
  budget.budget = 0.5 * sum(Backend::sequential(), task.demand_mean);
  task.constraint = std::move(budget);
  task.validate();
  return task;
}

LogisticTask gen_classification_instance(std::size_t features, RngStream stream,
                                         const Backend& backend) {
  return LogisticTask{synth_classification(features, stream, backend)};
}

TaskSpec gen_instance(TaskKind kind, std::size_t size, std::uint64_t seed) {
  const RngStream stream{seed, kInstanceStream, {}};
  switch (kind) {
    case TaskKind::meanvar: return gen_meanvar_instance(size, stream);
    case TaskKind::newsvendor: return gen_newsvendor_instance(size, stream);
    case TaskKind::classification: return gen_classification_instance(size, stream);
  }
  throw Error(ErrorKind::configuration, "unknown task kind");
}

// ---------------------------------------------------------------------------
// Metrics

double rse(double y_t, double y_star) {
  require(y_t != 0.0, ErrorKind::undefined_metric, "RSE undefined for y_t == 0");
  const double rel = (y_t - y_star) / y_t;
  return rel * rel * 100.0;
}

std::optional<double> rse_at(const RunRecord& record, std::size_t iteration) {
  if (iteration == 0 || iteration > record.rows.size()) return std::nullopt;
  const double y_t = record.rows[iteration - 1].objective;
  if (y_t == 0.0) return std::nullopt;
  return rse(y_t, record.final_objective());
}

MeanCi mean_ci(std::span<const double> values) {
  MeanCi out;
  if (values.empty()) return out;
  double total = 0.0;
  for (double v : values) total += v;
  out.mean = total / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.ci2s = 2.0 * std::sqrt(sq / static_cast<double>(values.size() - 1));
  return out;
}

Summary summarize(const std::vector<RunRecord>& records) {
  using Key = std::tuple<std::string, std::size_t, std::string>;
  std::map<Key, std::vector<const RunRecord*>> cells;
  for (const auto& r : records) cells[{r.meta.task, r.meta.size, r.meta.backend}].push_back(&r);

  Summary summary;
  for (auto& [key, runs] : cells) {
    std::sort(runs.begin(), runs.end(),
              [](const RunRecord* a, const RunRecord* b) { return a->meta.rep < b->meta.rep; });
    SummaryRow row;
    std::tie(row.task, row.size, row.backend) = key;
    if (runs.size() == 1)
      summary.warnings.push_back(row.task + "/" + std::to_string(row.size) + "/" + row.backend +
                                 ": single repetition, confidence half-width reported as 0");

    std::vector<double> times;
    for (const auto* r : runs) times.push_back(static_cast<double>(r->total_elapsed_ns()));
    const MeanCi t = mean_ci(times);
    row.mean_time_ns = t.mean;
    row.ci2s_ns = t.ci2s;

    for (std::size_t checkpoint : kRseCheckpoints) {
      std::vector<double> values;
      for (const auto* r : runs)
        if (auto v = rse_at(*r, checkpoint)) values.push_back(*v);
      row.rse[checkpoint] = values.empty() ? std::nullopt : std::optional(mean_ci(values));
    }
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Orchestration

RunRecord run_single(const TaskSpec& task, const BenchConfig& config, const Backend& backend,
                     std::size_t rep) {
  const RngStream stream{config.seed, repetition_stream(rep), {}};
  RunRecord record;
  if (const auto* logistic = std::get_if<LogisticTask>(&task)) {
    SqnConfig sqn = config.sqn;
    sqn.stream = stream;
    record = sqn_run(*logistic, sqn, backend);
  } else {
    FwConfig fw = config.fw;
    fw.stream = stream;
    record = fw_run(task, fw, backend);
  }
  record.meta.rep = rep;
  record.meta.seed = config.seed;
  return record;
}

BenchOutcome run_bench(const BenchConfig& config) {
  config.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.out, ec);
  require(!ec, ErrorKind::io, "cannot create output directory " + config.out.string());
  fs::remove(config.out / ".done", ec);

  {
    std::ofstream cfg(config.out / "config.txt");
    cfg << render_config(config);
    require(static_cast<bool>(cfg), ErrorKind::io, "cannot write config.txt");
  }

  BenchOutcome outcome;
  for (std::size_t size : config.effective_sizes()) {
    const TaskSpec task = gen_instance(config.task, size, config.seed);
    for (BackendVariant variant : config.backends) {
      const Backend backend(BackendKind{variant, config.chunk_size, config.workers});
      std::vector<RunRecord> cell(config.repetitions);
      if (config.parallel_reps) {
        std::vector<std::future<RunRecord>> jobs;
        for (std::size_t rep = 0; rep < config.repetitions; ++rep)
          jobs.push_back(std::async(std::launch::async, [&, rep] {
            return run_single(task, config, backend, rep);
          }));
        for (std::size_t rep = 0; rep < config.repetitions; ++rep) cell[rep] = jobs[rep].get();
      } else {
        for (std::size_t rep = 0; rep < config.repetitions; ++rep)
          cell[rep] = run_single(task, config, backend, rep);
      }
      for (auto& record : cell) {
        if (config.parallel_reps)
          record.warnings.push_back("repetitions ran concurrently; timing columns unreliable");
        for (const auto& w : record.warnings)
          std::cerr << "warning: " << record.meta.task << "/" << size << "/"
                    << record.meta.backend << "/rep" << record.meta.rep << ": " << w << '\n';
        write_trace_csv(config.out / trace_file_name(record.meta), record);
        outcome.records.push_back(std::move(record));
      }
    }
  }

  outcome.summary = summarize(outcome.records);
  for (const auto& w : outcome.summary.warnings) std::cerr << "warning: " << w << '\n';
  write_summary_csv(config.out / "summary.csv", outcome.summary);
  if (config.parallel_reps) {
    std::ofstream note(config.out / "TIMING_UNRELIABLE");
    note << "repetitions ran concurrently\n";
  }
  std::ofstream done(config.out / ".done");
  require(static_cast<bool>(done), ErrorKind::io, "cannot write .done sentinel");
  return outcome;
}

}  // namespace simopt::bench
