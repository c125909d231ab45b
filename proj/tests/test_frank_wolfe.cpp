#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "simopt/frank_wolfe.hpp"

using namespace simopt;

namespace {

const Backend seq = Backend::sequential(32);
const Backend par = Backend::parallel(32, 4);

MeanVarTask random_meanvar(oracle::Random& rng, std::size_t d) {
  return MeanVarTask{GaussianSpec{rng.vector(d, -1, 1), rng.vector(d, 0.05, 0.3)}};
}

// Wraps another problem and fails or misbehaves on request.
class FaultyProblem final : public FwProblem {
 public:
  FaultyProblem(FwProblem& inner, std::size_t fail_at, bool infeasible)
      : inner_(inner), fail_at_(fail_at), infeasible_(infeasible) {}
  std::size_t dimension() const override { return inner_.dimension(); }
  void resample(RngStream& s, std::size_t n) override { inner_.resample(s, n); }
  DenseVector gradient(std::span<const double> x) override {
    if (++calls_ == fail_at_) throw Error(ErrorKind::invalid_gradient, "injected");
    return inner_.gradient(x);
  }
  DenseVector linear_minimizer(std::span<const double> g) const override {
    auto s = inner_.linear_minimizer(g);
    if (infeasible_) s.assign(s.size(), 2.0);
    return s;
  }
  double objective(std::span<const double> x) override { return inner_.objective(x); }
  bool feasible(std::span<const double> x, double tol) const override {
    return inner_.feasible(x, tol);
  }

 private:
  FwProblem& inner_;
  std::size_t fail_at_;
  bool infeasible_;
  std::size_t calls_ = 0;
};

}  // namespace

TEST_CASE("fw_step_size examples") {
  CHECK(fw_step_size(0, 25, 0) == 1.0);
  CHECK(fw_step_size(0, 25, 23) == 2.0 / 25.0);
  CHECK(fw_step_size(2, 25, 0) == 2.0 / 52.0);
  double previous = 2.0;
  for (std::size_t k = 0; k < 10; ++k)
    for (std::size_t m = 0; m < 7; ++m) {
      const double g = fw_step_size(k, 7, m);
      CHECK(g < previous);
      CHECK(g > 0.0);
      CHECK(g <= 1.0);
      previous = g;
    }
}

TEST_CASE("fw_update examples") {
  FwState start{DenseVector{0.3, 0.2}, 0, 0, 4, 0};
  const auto full = fw_update(seq, start, DenseVector{0, 1});
  CHECK(full.iterate == DenseVector{0, 1});
  CHECK(full.inner == 1);
  CHECK(full.global_step == 1);

  FwState mid{DenseVector{0.25, 0.5}, 1, 2, 4, 6};
  CHECK(fw_update(seq, mid, mid.iterate).iterate == mid.iterate);

  FwState half{DenseVector{0, 0}, 0, 2, 4, 2};
  const auto next = fw_update(seq, half, DenseVector{1, 0});
  CHECK(next.iterate == DenseVector{0.5, 0});

  FwState last{DenseVector{0, 0}, 3, 3, 4, 15};
  const auto rolled = fw_update(seq, last, DenseVector{1, 0});
  CHECK(rolled.epoch == 4);
  CHECK(rolled.inner == 0);
  CHECK(rolled.global_step == rolled.epoch * 4 + rolled.inner);

  try {
    fw_update(seq, half, DenseVector{1, 0, 0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
  }
}

TEST_CASE("duality_gap examples") {
  CHECK(duality_gap(seq, DenseVector{3, -1}, DenseVector{0.2, 0.3}, DenseVector{0.2, 0.3}) == 0.0);
  CHECK(duality_gap(seq, DenseVector{-1, 0}, DenseVector{0, 0}, DenseVector{1, 0}) == 1.0);
  CHECK_THROWS_AS(duality_gap(seq, DenseVector{1}, DenseVector{0, 0}, DenseVector{1, 0}), Error);
}

TEST_CASE("one step on a nearly deterministic portfolio") {
  const MeanVarTask task{GaussianSpec{{1.0, 0.5}, DenseVector{1e-12, 1e-12}}};
  FwConfig config;
  config.epochs = 1;
  config.inner_iters = 1;
  config.sample_size = 10;
  const auto r = fw_run(task, config, seq);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.final_iterate == DenseVector{1.0, 0.0});
  CHECK(r.rows[0].objective == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r.rows[0].iteration == 1);
}

TEST_CASE("fw_run trace shape, feasibility and backend equality") {
  oracle::Random rng(40);
  const auto task = random_meanvar(rng, 30);
  FwConfig config;
  config.epochs = 6;
  config.inner_iters = 5;
  config.sample_size = 12;
  const auto a = fw_run(task, config, seq);
  const auto b = fw_run(task, config, par);
  const auto c = fw_run(task, config, seq);
  CHECK(a.rows.size() == 30);
  CHECK(a.meta.task == "meanvar");
  CHECK(b.meta.backend == "parallel");
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].iteration == i + 1);
    CHECK(a.rows[i].objective == b.rows[i].objective);
    CHECK(a.rows[i].objective == c.rows[i].objective);
    if (i) CHECK(a.rows[i].elapsed_ns >= a.rows[i - 1].elapsed_ns);
  }
  CHECK(a.final_iterate == b.final_iterate);
  CHECK(SimplexSlackSet{30}.contains(a.final_iterate, 1e-10));

  FwConfig other = config;
  other.stream.stream_id = 7;
  CHECK(fw_run(task, other, seq).rows.back().objective != a.rows.back().objective);
}

TEST_CASE("sample set is fixed within an epoch") {
  oracle::Random rng(41);
  MeanVarProblem problem(random_meanvar(rng, 8), seq);
  RngStream s{1, 1, {}};
  problem.resample(s, 20);
  const auto x = rng.vector(8, 0, 0.1);
  const auto first = problem.gradient(x);
  problem.gradient(rng.vector(8, 0, 0.1));
  CHECK(problem.gradient(x) == first);
  problem.resample(s, 20);
  CHECK(problem.gradient(x) != first);
}

TEST_CASE("linear sample schedule grows the sample set") {
  FwConfig config;
  config.schedule = SampleSchedule::linear;
  config.sample_size = 4;
  CHECK(config.sample_size_at(0) == 4);
  CHECK(config.sample_size_at(3) == 16);
  CHECK(parse_sample_schedule("linear") == SampleSchedule::linear);
  CHECK_THROWS_AS(parse_sample_schedule("geometric"), Error);
}

TEST_CASE("fw_run on newsvendor with single and multiple resources") {
  oracle::Random rng(42);
  NewsvendorTask task;
  const std::size_t n = 6;
  task.unit_cost = rng.vector(n, 1, 2);
  task.selling_value = rng.vector(n, 3, 5);
  task.holding_cost = rng.vector(n, 0.5, 1);
  task.demand_mean = rng.vector(n, 20, 50);
  task.demand_std = rng.vector(n, 10, 20);
  task.constraint = SingleBudgetSet{DenseVector(n, 1.0), 60};
  FwConfig config;
  config.epochs = 10;
  config.inner_iters = 10;
  config.sample_size = 50;
  const auto single = fw_run(task, config, seq);
  CHECK(single.rows.size() == 100);
  CHECK(task.feasible(single.final_iterate, 1e-10));
  CHECK(single.rows.back().objective < single.rows.front().objective);
  CHECK(single.rows.back().objective == doctest::Approx(nv_objective_exact(seq, single.final_iterate, task)));
  CHECK(fw_run(task, config, par).rows.back().objective == single.rows.back().objective);

  task.constraint = PolytopeSet{rng.matrix(3, n, 0.5, 2), DenseVector{60, 80, 70}};
  const auto multi = fw_run(task, config, seq);
  CHECK(task.feasible(multi.final_iterate, 1e-10));
}

TEST_CASE("deterministic quadratic converges sublinearly") {
  oracle::Random rng(43);
  const GaussianSpec spec{rng.vector(20, -1, 1), rng.vector(20, 0.5, 1.5)};
  ExactMeanVarProblem problem(spec, seq);
  FwConfig config;
  config.epochs = 1;
  config.inner_iters = 1500;
  config.sample_size = 2;
  const auto r = fw_run(problem, config, seq);
  const auto g = problem.gradient(r.final_iterate);
  const auto s = problem.linear_minimizer(g);
  CHECK(duality_gap(seq, g, r.final_iterate, s) <= 1e-3);
  CHECK(duality_gap(seq, g, r.final_iterate, s) >= -1e-12);
}

TEST_CASE("errors flush the partial trace") {
  oracle::Random rng(44);
  MeanVarProblem inner(random_meanvar(rng, 5), seq);
  FaultyProblem faulty(inner, 7, false);
  FwConfig config;
  config.epochs = 3;
  config.inner_iters = 4;
  config.sample_size = 5;
  try {
    fw_run(faulty, config, seq);
    FAIL("expected an error");
  } catch (const PartialRunError& e) {
    CHECK(e.kind() == ErrorKind::invalid_gradient);
    CHECK(e.partial().rows.size() == 6);
    CHECK(std::string(e.what()) == "invalid-gradient error: injected");
  }

  MeanVarProblem inner2(random_meanvar(rng, 5), seq);
  FaultyProblem leaky(inner2, 0, true);
  CHECK_THROWS_AS(fw_run(leaky, config, seq), std::logic_error);
}

TEST_CASE("fw_run rejects bad configurations") {
  oracle::Random rng(45);
  FwConfig config;
  config.sample_size = 1;
  try {
    fw_run(random_meanvar(rng, 3), config, seq);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::configuration);
  }
  config = FwConfig{};
  config.epochs = 0;
  CHECK_THROWS_AS(fw_run(random_meanvar(rng, 3), config, seq), Error);
  RngStream s{1, 0, {}};
  const TaskSpec logistic = LogisticTask{synth_classification(3, s)};
  CHECK_THROWS_AS(fw_run(logistic, FwConfig{}, seq), Error);
}
