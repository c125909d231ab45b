#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "simopt/tasks.hpp"

using namespace simopt;

namespace {

const Backend seq = Backend::sequential(16);
const Backend par = Backend::parallel(16, 4);

MeanVarSampleSet random_samples(oracle::Random& rng, std::size_t n, std::size_t d) {
  return MeanVarSampleSet::from_samples(seq, rng.matrix(n, d, -1, 1));
}

NewsvendorTask small_newsvendor(oracle::Random& rng, std::size_t n) {
  NewsvendorTask t;
  t.unit_cost = rng.vector(n, 1, 2);
  t.selling_value = rng.vector(n, 3, 5);
  t.holding_cost = rng.vector(n, 0.5, 1);
  t.demand_mean = rng.vector(n, 20, 50);
  t.demand_std = rng.vector(n, 10, 20);
  t.constraint = SingleBudgetSet{DenseVector(n, 1.0), 1e6};
  return t;
}

ClassificationData make_data(std::uint64_t seed, std::size_t n) {
  RngStream s{seed, 0, {}};
  return synth_classification(n, s);
}

IndexSet all_rows(std::size_t n) {
  IndexSet idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

TEST_CASE("mean-variance sample set") {
  oracle::Random rng(20);
  const auto ss = random_samples(rng, 50, 7);
  for (std::size_t j = 0; j < ss.dimension(); ++j) {
    double col = 0, avg = 0;
    for (std::size_t i = 0; i < ss.count(); ++i) {
      col += ss.centered(i, j);
      avg += ss.samples(i, j);
    }
    CHECK(std::abs(col) <= 1e-9 * 50);
    CHECK(ss.mean[j] == doctest::Approx(avg / 50).epsilon(1e-12));
  }
  CHECK_THROWS_AS(MeanVarSampleSet::from_samples(seq, DenseMatrix(1, 3)), Error);
}

TEST_CASE("mv_objective examples") {
  oracle::Random rng(21);
  const auto ss = random_samples(rng, 10, 4);
  CHECK(mv_objective(seq, DenseVector(4, 0.0), ss) == 0.0);

  const auto two = MeanVarSampleSet::from_samples(seq, DenseMatrix(2, 1, {0.0, 2.0}));
  CHECK(two.mean == DenseVector{1.0});
  CHECK(mv_objective(seq, DenseVector{1.0}, two) == 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_samples(rng, 50, 20);
    const auto w = rng.vector(20, 0, 0.1);
    CHECK(std::abs(mv_objective(seq, w, s) - oracle::meanvar_explicit(w, s.samples)) < 1e-10);
  }
  CHECK_THROWS_AS(mv_objective(seq, DenseVector(3, 0.0), ss), Error);
}

TEST_CASE("mv_gradient") {
  oracle::Random rng(22);
  const auto ss = random_samples(rng, 30, 10);
  const auto g0 = mv_gradient(seq, DenseVector(10, 0.0), ss);
  for (std::size_t j = 0; j < 10; ++j) CHECK(g0[j] == -ss.mean[j]);

  const auto w = rng.vector(10, 0, 0.2);
  const auto g = mv_gradient(seq, w, ss);
  const auto fd = oracle::finite_difference([&](const DenseVector& x) { return mv_objective(seq, x, ss); }, w);
  for (std::size_t j = 0; j < 10; ++j) CHECK(oracle::relative_error(g[j], fd[j]) < 1e-5);

  const double alpha = 1.7;
  const auto ga = mv_gradient(seq, scale(seq, alpha, w), ss);
  for (std::size_t j = 0; j < 10; ++j)
    CHECK(std::abs((ga[j] + ss.mean[j]) - alpha * (g[j] + ss.mean[j])) < 1e-12);

  const auto both = mv_objective_and_gradient(par, w, ss);
  CHECK(both.gradient == mv_gradient(seq, w, ss));
  CHECK(both.objective == mv_objective(seq, w, ss));
}

TEST_CASE("nv_gradient_hat examples") {
  NewsvendorTask t;
  t.unit_cost = {1};
  t.selling_value = {2};
  t.holding_cost = {0.5};
  t.demand_mean = {2.5};
  t.demand_std = {1};
  t.constraint = SingleBudgetSet{{1.0}, 100};
  const DenseMatrix d(1, 4, {1, 2, 3, 4});
  CHECK(nv_gradient_hat(seq, DenseVector{2}, t, d)[0] == 0.25);
  CHECK(nv_gradient_hat(seq, DenseVector{0.5}, t, d)[0] == 1.0 - 2.0);
  CHECK(nv_gradient_hat(seq, DenseVector{9}, t, d)[0] == 1.0 + 0.5);
  try {
    nv_gradient_hat(seq, DenseVector{2}, t, DenseMatrix(1, 0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_samples);
  }
}

TEST_CASE("nv_gradient_hat is monotone in x") {
  oracle::Random rng(23);
  auto t = small_newsvendor(rng, 5);
  RngStream s{1, 1, {}};
  const auto d = sample_demands(t.demand_mean, t.demand_std, 200, s);
  DenseVector x(5, 0.0), prev;
  for (int step = 0; step < 100; ++step) {
    const auto g = nv_gradient_hat(seq, x, t, d);
    if (!prev.empty())
      for (std::size_t j = 0; j < 5; ++j) CHECK(g[j] >= prev[j]);
    prev = g;
    for (double& v : x) v += 1.0;
  }
}

TEST_CASE("nv exact gradient and objective") {
  oracle::Random rng(24);
  const auto t = small_newsvendor(rng, 6);
  const auto g_mu = nv_gradient_exact(seq, t.demand_mean, t);
  for (std::size_t j = 0; j < 6; ++j)
    CHECK(g_mu[j] == doctest::Approx(t.unit_cost[j] - t.selling_value[j] +
                                     0.5 * (t.holding_cost[j] + t.selling_value[j])));
  const auto g_low = nv_gradient_exact(seq, DenseVector(6, -1e6), t);
  for (std::size_t j = 0; j < 6; ++j) CHECK(g_low[j] == t.unit_cost[j] - t.selling_value[j]);

  // At the mean both partial expectations equal sigma phi(0).
  NewsvendorTask one;
  one.unit_cost = {0};
  one.selling_value = {1};
  one.holding_cost = {1};
  one.demand_mean = {30};
  one.demand_std = {7};
  one.constraint = SingleBudgetSet{{1.0}, 100};
  CHECK(nv_objective_exact(seq, DenseVector{30}, one) ==
        doctest::Approx(2 * 7 / std::sqrt(2 * M_PI)).epsilon(1e-14));

  const auto x = rng.vector(6, 10, 60);
  const auto fd = oracle::finite_difference([&](const DenseVector& v) { return nv_objective_exact(seq, v, t); }, x);
  const auto g = nv_gradient_exact(seq, x, t);
  for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(g[j] - fd[j]) < 1e-6);

  // Monte-Carlo estimate of the expected cost.
  RngStream s{4, 1, {}};
  const std::size_t draws = 1000000;
  const auto z = standard_normal(s, draws * 6, par);
  double mc = 0;
  for (std::size_t j = 0; j < 6; ++j) {
    double acc = 0;
    for (std::size_t i = 0; i < draws; ++i) {
      const double xi = t.demand_mean[j] + t.demand_std[j] * z[j * draws + i];
      acc += t.unit_cost[j] * x[j] + t.holding_cost[j] * std::max(x[j] - xi, 0.0) +
             t.selling_value[j] * std::max(xi - x[j], 0.0);
    }
    mc += acc / draws;
  }
  CHECK(std::abs(nv_objective_exact(seq, x, t) - mc) / std::abs(mc) < 0.005);
  CHECK(nv_objective_exact(seq, x, t) == nv_objective_exact(par, x, t));
}

TEST_CASE("nv_gradient_hat converges to the exact gradient") {
  oracle::Random rng(25);
  const auto t = small_newsvendor(rng, 4);
  RngStream s{5, 1, {}};
  const auto d = sample_demands(t.demand_mean, t.demand_std, 1000000, s, par);
  const auto hat = nv_gradient_hat(seq, t.demand_mean, t, d);
  const auto exact = nv_gradient_exact(seq, t.demand_mean, t);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(std::abs(hat[j] - exact[j]) <= 0.005 * (t.holding_cost[j] + t.selling_value[j]));
}

TEST_CASE("newsvendor task validation") {
  oracle::Random rng(26);
  auto t = small_newsvendor(rng, 3);
  CHECK_NOTHROW(t.validate());
  t.unit_cost[1] = 10;
  CHECK_THROWS_AS(t.validate(), Error);
  t = small_newsvendor(rng, 3);
  t.holding_cost[0] = -10;
  CHECK_THROWS_AS(t.validate(), Error);
  t = small_newsvendor(rng, 3);
  t.holding_cost[0] = -1;  // scrap value is allowed while v + h > 0
  CHECK_NOTHROW(t.validate());
  t.constraint = PolytopeSet{DenseMatrix(2, 3, 1.0), DenseVector{5, 6}};
  CHECK_NOTHROW(t.validate());
  CHECK(t.feasible(DenseVector{1, 1, 1}, 0));
  CHECK_FALSE(t.feasible(DenseVector{3, 3, 0}, 1e-10));
}

TEST_CASE("logistic loss") {
  const auto data = make_data(30, 6);
  const auto idx = all_rows(data.samples());
  CHECK(logistic_loss(seq, DenseVector(6, 0.0), data, idx) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  ClassificationData one{DenseMatrix(1, 1, {1.0}), {1}, {1.0}};
  CHECK(logistic_loss(seq, DenseVector{800}, one, {0}) < 1e-300);
  CHECK(logistic_loss(seq, DenseVector{40}, one, {0}) < 1e-17);
  CHECK(logistic_loss(seq, DenseVector{-800}, one, {0}) == doctest::Approx(800));

  oracle::Random rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto w = rng.vector(6, -10.0 / 6, 10.0 / 6);
    CHECK(std::abs(logistic_loss(seq, w, data, idx) - oracle::logistic_loss_naive(w, data, idx)) < 1e-12);
  }
  try {
    logistic_loss(seq, DenseVector(6, 0.0), data, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::configuration);
  }
  const auto w = rng.vector(6, -1, 1);
  CHECK(logistic_loss_full(par, w, data) == logistic_loss_full(seq, w, data));
  CHECK(logistic_loss_full(seq, w, data) == logistic_loss(seq, w, data, idx));
}

TEST_CASE("logistic gradient") {
  const auto data = make_data(32, 10);
  const auto idx = all_rows(data.samples());
  const auto g0 = logistic_gradient(seq, DenseVector(10, 0.0), data, idx);
  for (std::size_t j = 0; j < 10; ++j) {
    double want = 0;
    for (std::size_t i = 0; i < data.samples(); ++i)
      want += (0.5 - data.labels[i]) * data.features(i, j);
    CHECK(g0[j] == doctest::Approx(want / data.samples()).epsilon(1e-13));
  }

  oracle::Random rng(33);
  IndexSet first30(30);
  for (std::size_t i = 0; i < 30; ++i) first30[i] = i;
  const auto w = rng.vector(10, -0.5, 0.5);
  const auto g = logistic_gradient(seq, w, data, first30);
  const auto fd = oracle::finite_difference(
      [&](const DenseVector& x) { return logistic_loss(seq, x, data, first30); }, w);
  for (std::size_t j = 0; j < 10; ++j) CHECK(oracle::relative_error(g[j], fd[j]) < 1e-5);
  CHECK(logistic_gradient(seq, w, data, idx) == logistic_gradient(par, w, data, idx));

  // Separable toy data: the gradient vanishes as the separator is scaled up.
  ClassificationData sep{DenseMatrix(2, 2, {1, 0, 0, 1}), {1, 0}, {1, -1}};
  double previous = 1e300;
  for (double t : {1.0, 5.0, 20.0}) {
    const auto gs = logistic_gradient(seq, DenseVector{t, -t}, sep, {0, 1});
    const double norm = std::sqrt(oracle::naive_dot(gs, gs));
    CHECK(norm < previous);
    previous = norm;
  }
  CHECK(previous < 1e-8);
}

TEST_CASE("logistic Hessian-vector product") {
  const auto data = make_data(34, 5);
  const auto idx = all_rows(data.samples());
  oracle::Random rng(35);
  const auto w = rng.vector(5, -1, 1);
  CHECK(logistic_hvp(seq, w, DenseVector(5, 0.0), data, idx) == DenseVector(5, 0.0));

  const auto h = oracle::logistic_hessian_explicit(w, data, idx);
  for (int trial = 0; trial < 10; ++trial) {
    const auto v = rng.vector(5, -1, 1), u = rng.vector(5, -1, 1);
    const auto hv = logistic_hvp(seq, w, v, data, idx);
    const auto want = oracle::naive_matvec(h, v);
    for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(hv[j] - want[j]) < 1e-12);
    const auto hu = logistic_hvp(seq, w, u, data, idx);
    CHECK(std::abs(oracle::naive_dot(u, hv) - oracle::naive_dot(v, hu)) < 1e-12);
    CHECK(oracle::naive_dot(v, hv) >= 0.0);
    CHECK(hv == logistic_hvp(par, w, v, data, idx));
  }
}

TEST_CASE("task kinds") {
  CHECK(parse_task_kind("meanvar") == TaskKind::meanvar);
  CHECK(parse_task_kind("newsvendor") == TaskKind::newsvendor);
  CHECK(parse_task_kind("classification") == TaskKind::classification);
  CHECK(to_string(TaskKind::newsvendor) == "newsvendor");
  CHECK_THROWS_AS(parse_task_kind("portfolio"), Error);
}
