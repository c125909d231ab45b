#pragma once

// Stochastic quasi-Newton for logistic regression: mini-batch gradient steps
// with step length beta / k, scaled by a dense BFGS inverse-Hessian
// approximation built from correction pairs of averaged iterates. A pair is
// formed every L iterations from a sub-sampled Hessian-vector product.

#include <cstddef>
#include <functional>
#include <span>

#include "simopt/backend.hpp"
#include "simopt/rng.hpp"
#include "simopt/run_record.hpp"
#include "simopt/tasks.hpp"

namespace simopt {

struct SqnConfig {
  std::size_t pair_interval = 10;  // L
  std::size_t memory = 25;         // M
  double beta = 2.0;
  std::size_t batch = 50;           // b
  std::size_t hessian_batch = 300;  // b_H
  std::size_t iterations = 2000;    // K
  RngStream stream{42, kOptimizerStream, {}};

  void validate(std::size_t samples) const;
};

// Dense H is formed explicitly; beyond this many features it gets too large.
inline constexpr std::size_t kMaxDenseHessianDim = 8192;

struct CorrectionPair {
  DenseVector s;
  DenseVector y;
  double curvature = 0.0;  // y^T s
};

/// Inverse-Hessian approximation from the most recent min(pairs.size(), memory)
/// pairs, oldest first: H0 = (s^T y / y^T y) I from the newest pair, then
/// H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T for each pair in order.
DenseMatrix hessian_update(const Backend& backend, std::span<const CorrectionPair> pairs,
                           std::size_t memory);

/// Per-iteration hooks, mainly for tests and diagnostics.
struct SqnObserver {
  // Called after each step with the iteration k, the mini-batch gradient and
  // the direction that was subtracted (scaled by beta / k).
  std::function<void(std::size_t k, std::span<const double> gradient,
                     std::span<const double> direction, bool hessian_scaled)>
      on_step;
  // Called when a correction pair is formed at iteration k.
  std::function<void(std::size_t k, const CorrectionPair& pair, bool stored,
                     std::size_t stored_count)>
      on_pair;
  // Called whenever a new H is built.
  std::function<void(const DenseMatrix& h, const CorrectionPair& newest)> on_hessian;
};

RunRecord sqn_run(const LogisticTask& task, const SqnConfig& config, const Backend& backend,
                  const SqnObserver* observer = nullptr);

}  // namespace simopt
