// bench: run, summarize and plot simulation-optimization benchmarks.
//
//   bench run [--config FILE] [--task T] [--sizes a,b] [--backend seq,par] [--reps N]
//             [--seed S] [--out DIR] [--parallel-reps]
//   bench summarize DIR
//   bench plot DIR

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "simopt/bench.hpp"

namespace bench = simopt::bench;

int main(int argc, char** argv) {
  CLI::App app{"Simulation-optimization benchmark driver"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a benchmark configuration");
  std::string config_path;
  std::optional<std::string> task, sizes, backends, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  bool parallel_reps = false;
  run->add_option("--config", config_path, "Flat key = value config file");
  run->add_option("--task", task, "meanvar | newsvendor | classification");
  run->add_option("--sizes", sizes, "Comma-separated problem sizes");
  run->add_option("--backend", backends, "Comma-separated backends: sequential,parallel");
  run->add_option("--reps", reps, "Repetitions per cell");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out, "Output directory");
  run->add_flag("--parallel-reps", parallel_reps,
                "Run repetitions concurrently (timing columns become unreliable)");

  auto* summarize = app.add_subcommand("summarize", "Rebuild summary.csv from trace CSVs");
  std::string summarize_dir;
  summarize->add_option("dir", summarize_dir, "Benchmark output directory")->required();

  auto* plot = app.add_subcommand("plot", "Write SVG charts from a benchmark directory");
  std::string plot_dir;
  plot->add_option("dir", plot_dir, "Benchmark output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      bench::BenchConfig config =
          config_path.empty() ? bench::BenchConfig{} : bench::load_config(config_path);
      if (task) bench::apply_setting(config, "task", *task);
      if (sizes) bench::apply_setting(config, "sizes", *sizes);
      if (backends) bench::apply_setting(config, "backends", *backends);
      if (reps) config.repetitions = *reps;
      if (seed) config.seed = *seed;
      if (out) config.out = *out;
      if (parallel_reps) config.parallel_reps = true;
      config.validate();

      const auto outcome = bench::run_bench(config);
      std::cout << "wrote " << outcome.records.size() << " traces and summary.csv to "
                << config.out.string() << '\n';
      for (const auto& row : outcome.summary.rows) {
        std::cout << row.task << ' ' << row.size << ' ' << row.backend << ": mean "
                  << row.mean_time_ns * 1e-9 << " s (2 sigma " << row.ci2s_ns * 1e-9 << " s)";
        for (const auto& [checkpoint, value] : row.rse)
          if (value) std::cout << ", RSE@" << checkpoint << ' ' << value->mean << '%';
        std::cout << '\n';
      }
    } else if (*summarize) {
      const auto summary = bench::summarize_dir(summarize_dir);
      for (const auto& w : summary.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "wrote " << summary.rows.size() << " rows to "
                << (std::filesystem::path(summarize_dir) / "summary.csv").string() << '\n';
    } else if (*plot) {
      for (const auto& path : bench::plot_dir(plot_dir)) std::cout << "wrote " << path.string() << '\n';
    }
  } catch (const simopt::Error& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return e.kind() == simopt::ErrorKind::configuration ? 2 : 1;
  }
  return 0;
}
