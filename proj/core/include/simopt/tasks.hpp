#pragma once

// Problem definitions: mean-variance portfolio selection, the multi-product
// constrained newsvendor, and logistic-regression binary classification.

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>

#include "simopt/backend.hpp"
#include "simopt/lmo.hpp"
#include "simopt/sampling.hpp"

namespace simopt {

// ---------------------------------------------------------------------------
// Mean-variance portfolio

struct MeanVarTask {
  GaussianSpec spec;

  std::size_t dimension() const noexcept { return spec.dimension(); }
};

/// Samples R_1..R_N held fixed for one resampling epoch, with their column
/// mean and the centered rows R_i - mean.
struct MeanVarSampleSet {
  DenseMatrix samples;
  DenseVector mean;
  DenseMatrix centered;

  std::size_t count() const noexcept { return samples.rows(); }
  std::size_t dimension() const noexcept { return samples.cols(); }

  static MeanVarSampleSet from_samples(const Backend& backend, DenseMatrix samples);
};

/// 1/2 w^T S w - w^T mean, with S the unbiased sample covariance, evaluated as
/// ||X_c w||^2 / (2 (N-1)) without forming S.
double mv_objective(const Backend& backend, std::span<const double> w, const MeanVarSampleSet& ss);

/// S w - mean, as X_c^T (X_c w) / (N-1) - mean.
DenseVector mv_gradient(const Backend& backend, std::span<const double> w,
                        const MeanVarSampleSet& ss);

struct ObjectiveAndGradient {
  double objective = 0.0;
  DenseVector gradient;
};

/// Both of the above sharing the X_c w product.
ObjectiveAndGradient mv_objective_and_gradient(const Backend& backend, std::span<const double> w,
                                               const MeanVarSampleSet& ss);

// ---------------------------------------------------------------------------
// Newsvendor

struct NewsvendorTask {
  DenseVector unit_cost;     // k
  DenseVector holding_cost;  // h, negative means scrap value
  DenseVector selling_value; // v
  DenseVector demand_mean;
  DenseVector demand_std;
  std::variant<SingleBudgetSet, PolytopeSet> constraint;

  std::size_t dimension() const noexcept { return demand_mean.size(); }
  void validate() const;
  bool feasible(std::span<const double> x, double tol) const;
  DenseVector linear_minimizer(std::span<const double> g) const;
};

/// k - v + (h + v) * F_hat(x), with F_hat the empirical CDF of the sorted
/// per-product samples (rows of `demands`).
DenseVector nv_gradient_hat(const Backend& backend, std::span<const double> x,
                            const NewsvendorTask& task, const DenseMatrix& demands);

/// k - v + (h + v) * Phi((x - mu) / sigma)
DenseVector nv_gradient_exact(const Backend& backend, std::span<const double> x,
                              const NewsvendorTask& task);

/// Expected cost under Gaussian demand:
/// sum_j k x + h E[(x - D)^+] + v E[(D - x)^+].
double nv_objective_exact(const Backend& backend, std::span<const double> x,
                          const NewsvendorTask& task);

double standard_normal_cdf(double z) noexcept;
double standard_normal_pdf(double z) noexcept;

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticTask {
  ClassificationData data;

  std::size_t dimension() const noexcept { return data.features_count(); }
};

/// Mean negative log-likelihood over `indices`.
double logistic_loss(const Backend& backend, std::span<const double> w,
                     const ClassificationData& data, const IndexSet& indices);

/// Mean negative log-likelihood over the whole dataset.
double logistic_loss_full(const Backend& backend, std::span<const double> w,
                          const ClassificationData& data);

/// (1/b) sum_{i in S} (c(w; x_i) - z_i) x_i
DenseVector logistic_gradient(const Backend& backend, std::span<const double> w,
                              const ClassificationData& data, const IndexSet& indices);

/// Sub-sampled Hessian-vector product (1/b_H) sum c_i (1 - c_i) (x_i^T v) x_i.
DenseVector logistic_hvp(const Backend& backend, std::span<const double> w,
                         std::span<const double> v, const ClassificationData& data,
                         const IndexSet& indices);

// ---------------------------------------------------------------------------

using TaskSpec = std::variant<MeanVarTask, NewsvendorTask, LogisticTask>;

enum class TaskKind { meanvar, newsvendor, classification };

std::string_view to_string(TaskKind kind) noexcept;
TaskKind parse_task_kind(std::string_view name);
TaskKind kind_of(const TaskSpec& task) noexcept;

}  // namespace simopt
