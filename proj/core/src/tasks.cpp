#include "simopt/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace simopt {

// ---------------------------------------------------------------------------
// Mean-variance

MeanVarSampleSet MeanVarSampleSet::from_samples(const Backend& backend, DenseMatrix samples) {
  const std::size_t n = samples.rows();
  const std::size_t d = samples.cols();
  require(n >= 2, ErrorKind::insufficient_samples, "sample covariance needs N >= 2");
  MeanVarSampleSet ss;
  const DenseVector ones(n, 1.0);
  ss.mean = matvec_t(backend, samples, ones);
  for (double& m : ss.mean) m /= static_cast<double>(n);
  ss.centered = DenseMatrix(n, d);
  backend.run_tasks(n, [&](std::size_t i) {
    auto src = samples.row(i);
    auto dst = ss.centered.row(i);
    for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] - ss.mean[j];
  });
  ss.samples = std::move(samples);
  return ss;
}

namespace {

void check_mv(std::span<const double> w, const MeanVarSampleSet& ss) {
  require(w.size() == ss.dimension(), ErrorKind::dimension,
          "weights have length " + std::to_string(w.size()) + ", samples have dimension " +
              std::to_string(ss.dimension()));
  require(ss.count() >= 2, ErrorKind::insufficient_samples, "sample covariance needs N >= 2");
}

}  // namespace

double mv_objective(const Backend& backend, std::span<const double> w, const MeanVarSampleSet& ss) {
  return mv_objective_and_gradient(backend, w, ss).objective;
}

DenseVector mv_gradient(const Backend& backend, std::span<const double> w,
                        const MeanVarSampleSet& ss) {
  check_mv(w, ss);
  const DenseVector q = matvec(backend, ss.centered, w);
  const DenseVector sq = matvec_t(backend, ss.centered, q);
  const DenseVector neg_mean = map_kernel(backend, Kernel::negate, ss.mean);
  return axpy(backend, 1.0 / static_cast<double>(ss.count() - 1), sq, neg_mean);
}

ObjectiveAndGradient mv_objective_and_gradient(const Backend& backend, std::span<const double> w,
                                               const MeanVarSampleSet& ss) {
  check_mv(w, ss);
  const double inv = 1.0 / static_cast<double>(ss.count() - 1);
  const DenseVector q = matvec(backend, ss.centered, w);
  ObjectiveAndGradient out;
  out.objective = 0.5 * inv * dot(backend, q, q) - dot(backend, w, ss.mean);
  const DenseVector sq = matvec_t(backend, ss.centered, q);
  const DenseVector neg_mean = map_kernel(backend, Kernel::negate, ss.mean);
  out.gradient = axpy(backend, inv, sq, neg_mean);
  return out;
}

// ---------------------------------------------------------------------------
// Newsvendor

double standard_normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double standard_normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

void NewsvendorTask::validate() const {
  const std::size_t n = dimension();
  require(n >= 1, ErrorKind::configuration, "newsvendor needs at least one product");
  for (const auto* v : {&unit_cost, &holding_cost, &selling_value, &demand_std})
    require(v->size() == n, ErrorKind::dimension, "newsvendor parameter vectors differ in length");
  for (std::size_t j = 0; j < n; ++j) {
    require(selling_value[j] + holding_cost[j] > 0.0, ErrorKind::configuration,
            "v + h must be positive for product " + std::to_string(j));
    require(unit_cost[j] - selling_value[j] < 0.0, ErrorKind::configuration,
            "k - v must be negative for product " + std::to_string(j));
    require(demand_std[j] > 0.0, ErrorKind::configuration, "demand sigma must be positive");
  }
  std::visit(
      [&](const auto& set) {
        set.validate();
        if constexpr (std::is_same_v<std::decay_t<decltype(set)>, SingleBudgetSet>)
          require(set.c.size() == n, ErrorKind::dimension, "budget weights differ in length");
        else
          require(set.a.cols() == n, ErrorKind::dimension, "technology matrix columns differ");
      },
      constraint);
}

bool NewsvendorTask::feasible(std::span<const double> x, double tol) const {
  return std::visit([&](const auto& set) { return set.contains(x, tol); }, constraint);
}

DenseVector NewsvendorTask::linear_minimizer(std::span<const double> g) const {
  if (const auto* budget = std::get_if<SingleBudgetSet>(&constraint))
    return lmo_single_budget(g, budget->c, budget->budget);
  return lmo_general(g, std::get<PolytopeSet>(constraint));
}

DenseVector nv_gradient_hat(const Backend& backend, std::span<const double> x,
                            const NewsvendorTask& task, const DenseMatrix& demands) {
  const std::size_t n = task.dimension();
  require(x.size() == n && demands.rows() == n, ErrorKind::dimension,
          "newsvendor gradient: dimension mismatch");
  require(demands.cols() >= 1, ErrorKind::insufficient_samples, "empty demand sample array");
  const double per = static_cast<double>(demands.cols());
  DenseVector g(n);
  backend.run_tasks(1 + (n - 1) / 4096, [&](std::size_t t) {
    const std::size_t end = std::min(n, (t + 1) * 4096);
    for (std::size_t j = t * 4096; j < end; ++j) {
      auto row = demands.row(j);
      const auto below = std::upper_bound(row.begin(), row.end(), x[j]) - row.begin();
      g[j] = task.unit_cost[j] - task.selling_value[j] +
             (task.holding_cost[j] + task.selling_value[j]) * (static_cast<double>(below) / per);
    }
  });
  return g;
}

DenseVector nv_gradient_exact(const Backend& backend, std::span<const double> x,
                              const NewsvendorTask& task) {
  const std::size_t n = task.dimension();
  require(x.size() == n, ErrorKind::dimension, "newsvendor gradient: dimension mismatch");
  DenseVector g(n);
  backend.run_tasks(1 + (n - 1) / 4096, [&](std::size_t t) {
    const std::size_t end = std::min(n, (t + 1) * 4096);
    for (std::size_t j = t * 4096; j < end; ++j) {
      const double z = (x[j] - task.demand_mean[j]) / task.demand_std[j];
      g[j] = task.unit_cost[j] - task.selling_value[j] +
             (task.holding_cost[j] + task.selling_value[j]) * standard_normal_cdf(z);
    }
  });
  return g;
}

double nv_objective_exact(const Backend& backend, std::span<const double> x,
                          const NewsvendorTask& task) {
  const std::size_t n = task.dimension();
  require(x.size() == n, ErrorKind::dimension, "newsvendor objective: dimension mismatch");
  DenseVector cost(n);
  backend.run_tasks(1 + (n - 1) / 4096, [&](std::size_t t) {
    const std::size_t end = std::min(n, (t + 1) * 4096);
    for (std::size_t j = t * 4096; j < end; ++j) {
      const double sigma = task.demand_std[j];
      const double z = (x[j] - task.demand_mean[j]) / sigma;
      const double pdf = standard_normal_pdf(z);
      const double overage = sigma * (z * standard_normal_cdf(z) + pdf);
      const double underage = sigma * (pdf - z * standard_normal_cdf(-z));
      cost[j] = task.unit_cost[j] * x[j] + task.holding_cost[j] * overage +
                task.selling_value[j] * underage;
    }
  });
  return sum(backend, cost);
}

// ---------------------------------------------------------------------------
// Logistic regression

namespace {

void check_batch(std::span<const double> w, const ClassificationData& data,
                 const IndexSet& indices) {
  require(!indices.empty(), ErrorKind::configuration, "empty index set");
  require(w.size() == data.features_count(), ErrorKind::dimension,
          "weights have length " + std::to_string(w.size()) + ", data has " +
              std::to_string(data.features_count()) + " features");
  for (std::size_t i : indices)
    require(i < data.samples(), ErrorKind::configuration,
            "index " + std::to_string(i) + " out of range");
}

DenseMatrix gather_rows(const DenseMatrix& m, const IndexSet& indices) {
  DenseMatrix out(indices.size(), m.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto src = m.row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

// log(1 + e^u) without overflow.
double softplus(double u) noexcept { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

double mean_nll(const Backend& backend, const DenseMatrix& rows, std::span<const double> w,
                std::span<const std::uint8_t> labels) {
  const DenseVector t = matvec(backend, rows, w);
  DenseVector losses(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    losses[i] = labels[i] ? softplus(-t[i]) : softplus(t[i]);
  return sum(backend, losses) / static_cast<double>(t.size());
}

std::vector<std::uint8_t> gather_labels(const ClassificationData& data, const IndexSet& indices) {
  std::vector<std::uint8_t> out(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) out[r] = data.labels[indices[r]];
  return out;
}

}  // namespace

double logistic_loss(const Backend& backend, std::span<const double> w,
                     const ClassificationData& data, const IndexSet& indices) {
  check_batch(w, data, indices);
  return mean_nll(backend, gather_rows(data.features, indices), w, gather_labels(data, indices));
}

double logistic_loss_full(const Backend& backend, std::span<const double> w,
                          const ClassificationData& data) {
  require(data.samples() >= 1, ErrorKind::configuration, "empty dataset");
  require(w.size() == data.features_count(), ErrorKind::dimension,
          "weights length differs from feature count");
  return mean_nll(backend, data.features, w, data.labels);
}

DenseVector logistic_gradient(const Backend& backend, std::span<const double> w,
                              const ClassificationData& data, const IndexSet& indices) {
  check_batch(w, data, indices);
  const DenseMatrix rows = gather_rows(data.features, indices);
  DenseVector residual = map_kernel(backend, Kernel::sigmoid, matvec(backend, rows, w));
  for (std::size_t r = 0; r < indices.size(); ++r)
    residual[r] -= static_cast<double>(data.labels[indices[r]]);
  return scale(backend, 1.0 / static_cast<double>(indices.size()),
               matvec_t(backend, rows, residual));
}

DenseVector logistic_hvp(const Backend& backend, std::span<const double> w,
                         std::span<const double> v, const ClassificationData& data,
                         const IndexSet& indices) {
  check_batch(w, data, indices);
  require(v.size() == w.size(), ErrorKind::dimension, "hvp direction length differs");
  const DenseMatrix rows = gather_rows(data.features, indices);
  const DenseVector c = map_kernel(backend, Kernel::sigmoid, matvec(backend, rows, w));
  DenseVector weighted = matvec(backend, rows, v);
  for (std::size_t r = 0; r < weighted.size(); ++r) weighted[r] *= c[r] * (1.0 - c[r]);
  return scale(backend, 1.0 / static_cast<double>(indices.size()),
               matvec_t(backend, rows, weighted));
}

// ---------------------------------------------------------------------------

std::string_view to_string(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::meanvar: return "meanvar";
    case TaskKind::newsvendor: return "newsvendor";
    case TaskKind::classification: return "classification";
  }
  return "unknown";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "meanvar") return TaskKind::meanvar;
  if (name == "newsvendor") return TaskKind::newsvendor;
  if (name == "classification") return TaskKind::classification;
  throw Error(ErrorKind::configuration, "unknown task '" + std::string(name) + "'");
}

TaskKind kind_of(const TaskSpec& task) noexcept { return static_cast<TaskKind>(task.index()); }

}  // namespace simopt
