#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "simopt/bench.hpp"

using namespace simopt;
using namespace simopt::bench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("simopt_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Drops the trailing elapsed_ns column from every data line.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

RunRecord fake_record(std::string task, std::size_t rep, std::vector<double> objectives,
                      std::int64_t total_ns) {
  RunRecord r;
  r.meta = {std::move(task), 10, "sequential", rep, 42};
  for (std::size_t i = 0; i < objectives.size(); ++i)
    r.rows.push_back({i + 1, objectives[i],
                      total_ns * static_cast<std::int64_t>(i + 1) /
                          static_cast<std::int64_t>(objectives.size())});
  return r;
}

}  // namespace

TEST_CASE("rse examples") {
  CHECK(rse(3.5, 3.5) == 0.0);
  CHECK(rse(2, 1) == 25.0);
  CHECK(rse(-2, -1) == 25.0);
  try {
    rse(0.0, 1.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::undefined_metric);
  }
  const auto r = fake_record("meanvar", 0, {0.0, 2.0, 1.0}, 30);
  CHECK_FALSE(rse_at(r, 1).has_value());
  CHECK(*rse_at(r, 2) == 25.0);
  CHECK_FALSE(rse_at(r, 4).has_value());
}

TEST_CASE("mean and two-sigma halfwidth") {
  const std::vector<double> same{5, 5, 5};
  CHECK(mean_ci(same).mean == 5.0);
  CHECK(mean_ci(same).ci2s == 0.0);
  const std::vector<double> two{1, 3};
  CHECK(mean_ci(two).mean == 2.0);
  CHECK(mean_ci(two).ci2s == doctest::Approx(2 * std::sqrt(2.0)));
}

TEST_CASE("summarize") {
  std::vector<RunRecord> recs{fake_record("meanvar", 0, {2, 1}, 100),
                              fake_record("meanvar", 1, {2, 1}, 300)};
  auto s = summarize(recs);
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].mean_time_ns == 200.0);
  CHECK(s.rows[0].ci2s_ns == doctest::Approx(2 * std::sqrt(20000.0)));
  CHECK(s.warnings.empty());
  CHECK_FALSE(s.rows[0].rse.at(50).has_value());

  const auto single = summarize({fake_record("meanvar", 0, {2, 1}, 100)});
  CHECK(single.rows[0].ci2s_ns == 0.0);
  CHECK(single.warnings.size() == 1);
}

TEST_CASE("meanvar instance generation") {
  const auto a = gen_meanvar_instance(1000, {42, 0, {}});
  const auto& sd = std::get<DenseVector>(a.spec.scale);
  for (std::size_t j = 0; j < 1000; ++j) {
    CHECK(a.spec.mean[j] > -1.0);
    CHECK(a.spec.mean[j] < 1.0);
    CHECK(sd[j] > 0.0);
    CHECK(sd[j] < 0.025);
  }
  const auto b = gen_meanvar_instance(1000, {42, 0, {}});
  CHECK(a.spec.mean == b.spec.mean);
  CHECK(sd == std::get<DenseVector>(b.spec.scale));
  const auto big = gen_meanvar_instance(100000, {1, 0, {}});
  for (double v : big.spec.mean) CHECK(std::isfinite(v));
  CHECK_THROWS_AS(gen_meanvar_instance(1, {1, 0, {}}), Error);
}

TEST_CASE("newsvendor instance generation") {
  const auto t = gen_newsvendor_instance(500, {42, 0, {}});
  double total = 0;
  for (std::size_t j = 0; j < 500; ++j) {
    CHECK(t.selling_value[j] + t.holding_cost[j] > 0);
    CHECK(t.unit_cost[j] - t.selling_value[j] < 0);
    CHECK(t.demand_mean[j] > 20);
    CHECK(t.demand_mean[j] < 50);
    CHECK(t.demand_std[j] > 10);
    CHECK(t.demand_std[j] < 20);
    total += t.demand_mean[j];
  }
  const auto& budget = std::get<SingleBudgetSet>(t.constraint);
  CHECK(budget.budget == 0.5 * sum(Backend::sequential(), t.demand_mean));
  CHECK(budget.budget == doctest::Approx(0.5 * total));
  CHECK(budget.c == DenseVector(500, 1.0));
  const auto u = gen_newsvendor_instance(500, {42, 0, {}});
  CHECK(u.demand_mean == t.demand_mean);
  CHECK(u.unit_cost == t.unit_cost);
}

TEST_CASE("config parsing") {
  const auto c = parse_config(R"(# comment
task = newsvendor
sizes = 10, 20
backends = sequential
reps = 3
seed = 7
fw.inner_iters = 5
fw.iterations = 50
backend.chunk_size = 128
sqn.beta = 1.5
)");
  CHECK(c.task == TaskKind::newsvendor);
  CHECK(c.sizes == std::vector<std::size_t>{10, 20});
  CHECK(c.backends == std::vector<BackendVariant>{BackendVariant::sequential});
  CHECK(c.repetitions == 3);
  CHECK(c.seed == 7);
  CHECK(c.fw.epochs == 10);
  CHECK(c.fw.total_steps() == 50);
  CHECK(c.chunk_size == 128);
  CHECK(c.sqn.beta == 1.5);

  const auto reparsed = parse_config(render_config(c));
  CHECK(render_config(reparsed) == render_config(c));

  auto kind_of_failure = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::io;
  };
  CHECK(kind_of_failure("colour = red\n") == ErrorKind::configuration);
  CHECK(kind_of_failure("reps = 2\nreps = 3\n") == ErrorKind::configuration);
  CHECK(kind_of_failure("reps = two\n") == ErrorKind::configuration);
  CHECK(kind_of_failure("reps = 0\n") == ErrorKind::configuration);
  CHECK(kind_of_failure("sizes =\n") == ErrorKind::configuration);
  CHECK(kind_of_failure("just words\n") == ErrorKind::configuration);
  CHECK(kind_of_failure("fw.iterations = 101\n") == ErrorKind::configuration);
  CHECK(kind_of_failure("fw.epochs = 3\nfw.iterations = 100\n") == ErrorKind::configuration);
  CHECK(kind_of_failure("backends = gpu\n") == ErrorKind::configuration);
  try {
    load_config("/nonexistent/bench.cfg");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }

  BenchConfig defaults;
  CHECK(defaults.effective_sizes() == std::vector<std::size_t>{500});
  CHECK(defaults.fw.total_steps() == 1500);
  CHECK(defaults.repetitions == 7);
}

TEST_CASE("CSV round trip") {
  const auto dir = scratch("csv");
  fs::create_directories(dir);
  auto r = fake_record("newsvendor", 3, {1.0 / 3.0, -2.5e-300, 7}, 999);
  r.meta.size = 12;
  const auto path = dir / trace_file_name(r.meta);
  CHECK(path.filename() == "trace_newsvendor_12_sequential_rep3.csv");
  write_trace_csv(path, r);
  const auto text = slurp(path);
  CHECK(text.substr(0, text.find('\n')) == kTraceHeader);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  const auto back = read_trace_csv(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[0].rows[i].objective == r.rows[i].objective);
    CHECK(back[0].rows[i].elapsed_ns == r.rows[i].elapsed_ns);
  }

  auto other = fake_record("newsvendor", 4, {1, 2, 3}, 10);
  other.meta.size = 12;
  const auto summary = summarize({r, other});
  write_summary_csv(dir / "summary.csv", summary);
  const auto rows = read_summary_csv(dir / "summary.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean_time_ns == summary.rows[0].mean_time_ns);
  CHECK(slurp(dir / "summary.csv").substr(0, kSummaryHeader.size()) == kSummaryHeader);

  std::ofstream(dir / "trace_bad.csv") << "nope\n";
  CHECK_THROWS_AS(read_trace_csv(dir / "trace_bad.csv"), Error);
  CHECK_THROWS_AS(read_trace_dir(dir / "missing"), Error);
  fs::remove_all(dir);
}

TEST_CASE("run_bench end to end") {
  const auto dir = scratch("run");
  BenchConfig config;
  config.task = TaskKind::meanvar;
  config.sizes = {40, 60};
  config.repetitions = 2;
  config.fw.epochs = 4;
  config.fw.inner_iters = 5;
  config.out = dir;
  const auto outcome = run_bench(config);

  CHECK(outcome.summary.rows.size() == config.sizes.size() * config.backends.size());
  CHECK(outcome.records.size() == 8);
  CHECK(fs::exists(dir / ".done"));
  CHECK(fs::exists(dir / "config.txt"));
  CHECK_FALSE(fs::exists(dir / "TIMING_UNRELIABLE"));
  for (const auto& r : outcome.records) CHECK(r.rows.size() == config.fw.total_steps());

  for (std::size_t size : config.sizes)
    for (std::size_t rep = 0; rep < 2; ++rep) {
      RunMetadata seq_meta{"meanvar", size, "sequential", rep, 0};
      RunMetadata par_meta{"meanvar", size, "parallel", rep, 0};
      const auto a = slurp(dir / trace_file_name(seq_meta));
      const auto b = slurp(dir / trace_file_name(par_meta));
      std::string expected = without_timing(a);
      for (std::size_t pos; (pos = expected.find(",sequential,")) != std::string::npos;)
        expected.replace(pos, 12, ",parallel,");
      CHECK(expected == without_timing(b));
    }

  const auto first = without_timing(slurp(dir / "trace_meanvar_40_sequential_rep1.csv"));
  const auto replay_dir = scratch("replay");
  config.out = replay_dir;
  run_bench(config);
  CHECK(without_timing(slurp(replay_dir / "trace_meanvar_40_sequential_rep1.csv")) == first);

  const auto resummarized = summarize_dir(dir);
  CHECK(resummarized.rows.size() == 4);
  const auto plots = plot_dir(dir);
  CHECK(plots.size() == 2);
  for (const auto& p : plots) CHECK(fs::file_size(p) > 0);
  fs::remove_all(dir);
  fs::remove_all(replay_dir);
}

TEST_CASE("parallel repetitions are flagged") {
  const auto dir = scratch("parreps");
  BenchConfig config;
  config.task = TaskKind::classification;
  config.sizes = {4};
  config.backends = {BackendVariant::sequential};
  config.repetitions = 3;
  config.parallel_reps = true;
  config.sqn.iterations = 30;
  config.sqn.batch = 20;
  config.sqn.hessian_batch = 40;
  config.out = dir;
  const auto outcome = run_bench(config);
  CHECK(fs::exists(dir / "TIMING_UNRELIABLE"));
  CHECK(outcome.records.size() == 3);
  BenchConfig serial = config;
  serial.parallel_reps = false;
  serial.out = scratch("serialreps");
  const auto again = run_bench(serial);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(again.records[i].final_iterate == outcome.records[i].final_iterate);
  fs::remove_all(dir);
  fs::remove_all(serial.out);
}
