#include "simopt/frank_wolfe.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

namespace simopt {

SampleSchedule parse_sample_schedule(std::string_view name) {
  if (name == "constant") return SampleSchedule::constant;
  if (name == "linear") return SampleSchedule::linear;
  throw Error(ErrorKind::configuration, "unknown sample schedule '" + std::string(name) + "'");
}

std::string_view to_string(SampleSchedule schedule) noexcept {
  return schedule == SampleSchedule::constant ? "constant" : "linear";
}

std::size_t FwConfig::sample_size_at(std::size_t epoch) const noexcept {
  return schedule == SampleSchedule::constant ? sample_size : sample_size * (epoch + 1);
}

void FwConfig::validate(std::size_t min_sample_size) const {
  require(epochs >= 1, ErrorKind::configuration, "epochs must be >= 1");
  require(inner_iters >= 1, ErrorKind::configuration, "inner iterations must be >= 1");
  require(sample_size >= min_sample_size, ErrorKind::configuration,
          "sample size must be >= " + std::to_string(min_sample_size));
}

double fw_step_size(std::size_t epoch, std::size_t inner_iters, std::size_t inner) {
  return 2.0 / static_cast<double>(epoch * inner_iters + inner + 2);
}

FwState fw_update(const Backend& backend, const FwState& state, std::span<const double> s) {
  require(s.size() == state.iterate.size(), ErrorKind::dimension,
          "vertex length differs from iterate length");
  const double gamma = fw_step_size(state.epoch, state.inner_iters, state.inner);
  FwState next = state;
  if (gamma == 1.0) {
    next.iterate.assign(s.begin(), s.end());
  } else {
    const DenseVector direction = axpy(backend, -1.0, state.iterate, s);
    next.iterate = axpy(backend, gamma, direction, state.iterate);
  }
  ++next.global_step;
  if (++next.inner == next.inner_iters) {
    next.inner = 0;
    ++next.epoch;
  }
  return next;
}

double duality_gap(const Backend& backend, std::span<const double> g, std::span<const double> x,
                   std::span<const double> s) {
  require(g.size() == x.size() && x.size() == s.size(), ErrorKind::dimension,
          "duality gap: dimension mismatch");
  return dot(backend, g, axpy(backend, -1.0, s, x));
}

// ---------------------------------------------------------------------------
// Problems

MeanVarProblem::MeanVarProblem(MeanVarTask task, Backend backend)
    : task_(std::move(task)), backend_(std::move(backend)) {
  task_.spec.validate();
}

void MeanVarProblem::resample(RngStream& stream, std::size_t sample_size) {
  samples_ = MeanVarSampleSet::from_samples(
      backend_, sample_returns(task_.spec, sample_size, stream, backend_));
  cached_.reset();
}

const ObjectiveAndGradient& MeanVarProblem::evaluate(std::span<const double> x) {
  if (!cached_ || !std::equal(x.begin(), x.end(), cached_x_.begin(), cached_x_.end())) {
    cached_ = mv_objective_and_gradient(backend_, x, samples_);
    cached_x_.assign(x.begin(), x.end());
  }
  return *cached_;
}

DenseVector MeanVarProblem::gradient(std::span<const double> x) { return evaluate(x).gradient; }

double MeanVarProblem::objective(std::span<const double> x) { return evaluate(x).objective; }

DenseVector MeanVarProblem::linear_minimizer(std::span<const double> g) const {
  return lmo_simplex_slack(g);
}

bool MeanVarProblem::feasible(std::span<const double> x, double tol) const {
  return SimplexSlackSet{dimension()}.contains(x, tol);
}

ExactMeanVarProblem::ExactMeanVarProblem(GaussianSpec spec, Backend backend)
    : spec_(std::move(spec)), backend_(std::move(backend)) {
  spec_.validate();
}

DenseVector ExactMeanVarProblem::covariance_times(std::span<const double> x) const {
  require(x.size() == dimension(), ErrorKind::dimension, "iterate length differs from dimension");
  if (const auto* sd = std::get_if<DenseVector>(&spec_.scale)) {
    DenseVector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (*sd)[j] * (*sd)[j] * x[j];
    return out;
  }
  const auto& l = std::get<DenseMatrix>(spec_.scale);
  return matvec(backend_, l, matvec_t(backend_, l, x));
}

DenseVector ExactMeanVarProblem::gradient(std::span<const double> x) {
  const DenseVector neg_mean = map_kernel(backend_, Kernel::negate, spec_.mean);
  return axpy(backend_, 1.0, covariance_times(x), neg_mean);
}

double ExactMeanVarProblem::objective(std::span<const double> x) {
  return 0.5 * dot(backend_, x, covariance_times(x)) - dot(backend_, x, spec_.mean);
}

DenseVector ExactMeanVarProblem::linear_minimizer(std::span<const double> g) const {
  return lmo_simplex_slack(g);
}

bool ExactMeanVarProblem::feasible(std::span<const double> x, double tol) const {
  return SimplexSlackSet{dimension()}.contains(x, tol);
}

NewsvendorProblem::NewsvendorProblem(NewsvendorTask task, Backend backend)
    : task_(std::move(task)), backend_(std::move(backend)) {
  task_.validate();
}

void NewsvendorProblem::resample(RngStream& stream, std::size_t sample_size) {
  demands_ = sample_demands(task_.demand_mean, task_.demand_std, sample_size, stream, backend_);
}

DenseVector NewsvendorProblem::gradient(std::span<const double> x) {
  return nv_gradient_hat(backend_, x, task_, demands_);
}

DenseVector NewsvendorProblem::linear_minimizer(std::span<const double> g) const {
  return task_.linear_minimizer(g);
}

double NewsvendorProblem::objective(std::span<const double> x) {
  return nv_objective_exact(backend_, x, task_);
}

bool NewsvendorProblem::feasible(std::span<const double> x, double tol) const {
  return task_.feasible(x, tol);
}

// ---------------------------------------------------------------------------
// Engine

namespace {

constexpr double kFeasibilityTol = 1e-10;

RunRecord run_engine(FwProblem& problem, const FwConfig& config, const Backend& backend) {
  config.validate(problem.min_sample_size());
  RunRecord record;
  record.meta.size = problem.dimension();
  record.meta.backend = std::string(to_string(backend.kind().variant));
  record.meta.seed = config.stream.seed;
  record.rows.reserve(config.total_steps());

  FwState state;
  state.iterate.assign(problem.dimension(), 0.0);
  state.inner_iters = config.inner_iters;
  RngStream stream = config.stream;

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  try {
    for (std::size_t k = 0; k < config.epochs; ++k) {
      problem.resample(stream, config.sample_size_at(k));
      for (std::size_t m = 0; m < config.inner_iters; ++m) {
        const DenseVector g = problem.gradient(state.iterate);
        const DenseVector s = problem.linear_minimizer(g);
        state = fw_update(backend, state, s);
        if (!problem.feasible(state.iterate, kFeasibilityTol))
          throw std::logic_error("Frank-Wolfe iterate left the feasible set at step " +
                                 std::to_string(state.global_step));
        const double objective = problem.objective(state.iterate);
        const auto elapsed =
            std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
        record.rows.push_back({state.global_step, objective, static_cast<std::int64_t>(elapsed)});
      }
    }
  } catch (const Error& e) {
    record.final_iterate = state.iterate;
    throw PartialRunError(e, std::move(record));
  }
  record.final_iterate = std::move(state.iterate);
  return record;
}

}  // namespace

RunRecord fw_run(FwProblem& problem, const FwConfig& config, const Backend& backend) {
  return run_engine(problem, config, backend);
}

RunRecord fw_run(const TaskSpec& task, const FwConfig& config, const Backend& backend) {
  RunRecord record;
  if (const auto* mv = std::get_if<MeanVarTask>(&task)) {
    MeanVarProblem problem(*mv, backend);
    record = run_engine(problem, config, backend);
  } else if (const auto* nv = std::get_if<NewsvendorTask>(&task)) {
    NewsvendorProblem problem(*nv, backend);
    record = run_engine(problem, config, backend);
  } else {
    throw Error(ErrorKind::configuration, "Frank-Wolfe runs only portfolio and newsvendor tasks");
  }
  record.meta.task = std::string(to_string(kind_of(task)));
  return record;
}

}  // namespace simopt
