#pragma once

// Stochastic Frank-Wolfe: K resampling epochs of M inner iterations each,
// step size 2 / (kM + m + 2), linear-minimization step, convex-combination
// update. Problems plug in through FwProblem.

#include <cstddef>
#include <optional>

#include "simopt/backend.hpp"
#include "simopt/rng.hpp"
#include "simopt/run_record.hpp"
#include "simopt/tasks.hpp"

namespace simopt {

enum class SampleSchedule { constant, linear };

SampleSchedule parse_sample_schedule(std::string_view name);
std::string_view to_string(SampleSchedule schedule) noexcept;

struct FwConfig {
  std::size_t epochs = 60;       // K
  std::size_t inner_iters = 25;  // M
  std::size_t sample_size = 25;  // N for portfolios, S per product for newsvendor
  SampleSchedule schedule = SampleSchedule::constant;
  RngStream stream{42, kOptimizerStream, {}};

  std::size_t total_steps() const noexcept { return epochs * inner_iters; }
  /// Sample size used in epoch k.
  std::size_t sample_size_at(std::size_t epoch) const noexcept;
  void validate(std::size_t min_sample_size) const;
};

struct FwState {
  DenseVector iterate;
  std::size_t epoch = 0;
  std::size_t inner = 0;
  std::size_t inner_iters = 1;
  std::size_t global_step = 0;
};

double fw_step_size(std::size_t epoch, std::size_t inner_iters, std::size_t inner);

/// (1 - gamma) x + gamma s, then advance the counters.
FwState fw_update(const Backend& backend, const FwState& state, std::span<const double> s);

/// g^T (x - s)
double duality_gap(const Backend& backend, std::span<const double> g, std::span<const double> x,
                   std::span<const double> s);

/// Interface the engine drives. `resample` is called at the start of every
/// epoch; `gradient` and `objective` see the current epoch's samples.
class FwProblem {
 public:
  virtual ~FwProblem() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::size_t min_sample_size() const { return 1; }
  virtual void resample(RngStream& stream, std::size_t sample_size) = 0;
  virtual DenseVector gradient(std::span<const double> x) = 0;
  virtual DenseVector linear_minimizer(std::span<const double> g) const = 0;
  virtual double objective(std::span<const double> x) = 0;
  virtual bool feasible(std::span<const double> x, double tol) const = 0;
};

/// Sampled portfolio objective; gradient and objective use the epoch's samples.
class MeanVarProblem final : public FwProblem {
 public:
  MeanVarProblem(MeanVarTask task, Backend backend);

  std::size_t dimension() const override { return task_.dimension(); }
  std::size_t min_sample_size() const override { return 2; }
  void resample(RngStream& stream, std::size_t sample_size) override;
  DenseVector gradient(std::span<const double> x) override;
  DenseVector linear_minimizer(std::span<const double> g) const override;
  double objective(std::span<const double> x) override;
  bool feasible(std::span<const double> x, double tol) const override;

  const MeanVarSampleSet& samples() const { return samples_; }

 private:
  const ObjectiveAndGradient& evaluate(std::span<const double> x);

  MeanVarTask task_;
  Backend backend_;
  MeanVarSampleSet samples_;
  DenseVector cached_x_;
  std::optional<ObjectiveAndGradient> cached_;
};

/// Portfolio objective with exact moments (no sampling): 1/2 w^T Sigma w - w^T mu.
class ExactMeanVarProblem final : public FwProblem {
 public:
  ExactMeanVarProblem(GaussianSpec spec, Backend backend);

  std::size_t dimension() const override { return spec_.dimension(); }
  void resample(RngStream&, std::size_t) override {}
  DenseVector gradient(std::span<const double> x) override;
  DenseVector linear_minimizer(std::span<const double> g) const override;
  double objective(std::span<const double> x) override;
  bool feasible(std::span<const double> x, double tol) const override;

 private:
  DenseVector covariance_times(std::span<const double> x) const;

  GaussianSpec spec_;
  Backend backend_;
};

/// Monte-Carlo newsvendor gradient; objective is the exact Gaussian expected cost.
class NewsvendorProblem final : public FwProblem {
 public:
  NewsvendorProblem(NewsvendorTask task, Backend backend);

  std::size_t dimension() const override { return task_.dimension(); }
  void resample(RngStream& stream, std::size_t sample_size) override;
  DenseVector gradient(std::span<const double> x) override;
  DenseVector linear_minimizer(std::span<const double> g) const override;
  double objective(std::span<const double> x) override;
  bool feasible(std::span<const double> x, double tol) const override;

  const DenseMatrix& demands() const { return demands_; }

 private:
  NewsvendorTask task_;
  Backend backend_;
  DenseMatrix demands_;
};

/// Runs config.epochs * config.inner_iters steps from the zero vector.
RunRecord fw_run(FwProblem& problem, const FwConfig& config, const Backend& backend = {});

/// Builds the matching problem for a portfolio or newsvendor task.
RunRecord fw_run(const TaskSpec& task, const FwConfig& config, const Backend& backend);

}  // namespace simopt
