#include "simopt/sqn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <string>

namespace simopt {

void SqnConfig::validate(std::size_t samples) const {
  require(pair_interval >= 1, ErrorKind::configuration, "L must be >= 1");
  require(memory >= 1, ErrorKind::configuration, "memory must be >= 1");
  require(beta > 0.0, ErrorKind::configuration, "beta must be positive");
  require(batch >= 1 && batch <= samples, ErrorKind::configuration,
          "gradient batch must lie in [1, N]");
  require(hessian_batch >= 1 && hessian_batch <= samples, ErrorKind::configuration,
          "Hessian batch must lie in [1, N]");
  require(iterations >= 1, ErrorKind::configuration, "iterations must be >= 1");
}

DenseMatrix hessian_update(const Backend& backend, std::span<const CorrectionPair> pairs,
                           std::size_t memory) {
  require(!pairs.empty(), ErrorKind::degenerate_pair, "no correction pairs");
  require(memory >= 1, ErrorKind::configuration, "memory must be >= 1");
  const std::size_t used = std::min(pairs.size(), memory);
  const auto window = pairs.subspan(pairs.size() - used);
  const std::size_t n = window.back().s.size();

  for (const auto& p : window) {
    require(p.s.size() == n && p.y.size() == n, ErrorKind::dimension,
            "correction pair dimension mismatch");
    require(std::any_of(p.y.begin(), p.y.end(), [](double v) { return v != 0.0; }),
            ErrorKind::degenerate_pair, "correction pair with zero y");
  }

  const auto& newest = window.back();
  const double init = dot(backend, newest.s, newest.y) / dot(backend, newest.y, newest.y);
  DenseMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i) h(i, i) = init;

  for (const auto& p : window) {
    const double ys = dot(backend, p.y, p.s);
    require(ys > 0.0, ErrorKind::degenerate_pair, "correction pair with nonpositive curvature");
    const double rho = 1.0 / ys;
    const DenseVector hy = matvec(backend, h, p.y);
    const double yhy = dot(backend, p.y, hy);
    const double ss_coef = rho * rho * yhy + rho;
    // Expanded form of (I - rho s y^T) H (I - rho y s^T) + rho s s^T for
    // symmetric H; the upper triangle is computed and mirrored.
    backend.run_tasks(n, [&](std::size_t a) {
      const double sa = p.s[a];
      const double hya = hy[a];
      for (std::size_t b = a; b < n; ++b)
        h(a, b) = h(a, b) - rho * (sa * hy[b] + hya * p.s[b]) + ss_coef * sa * p.s[b];
    });
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) h(b, a) = h(a, b);
  }
  return h;
}

RunRecord sqn_run(const LogisticTask& task, const SqnConfig& config, const Backend& backend,
                  const SqnObserver* observer) {
  const auto& data = task.data;
  const std::size_t n = data.features_count();
  const std::size_t samples = data.samples();
  config.validate(samples);
  require(n <= kMaxDenseHessianDim, ErrorKind::configuration,
          "dense Hessian approximation limited to " + std::to_string(kMaxDenseHessianDim) +
              " features");

  RunRecord record;
  record.meta.task = "classification";
  record.meta.size = n;
  record.meta.backend = std::string(to_string(backend.kind().variant));
  record.meta.seed = config.stream.seed;
  record.rows.reserve(config.iterations);

  RngStream stream = config.stream;
  const std::size_t interval = config.pair_interval;

  DenseVector w(n, 0.0);
  DenseVector accum(n, 0.0);
  DenseVector previous_average;
  long long t = -1;
  std::deque<CorrectionPair> pairs;
  DenseMatrix h;
  bool h_stale = true;
  bool warned_identity = false;

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  try {
    for (std::size_t k = 1; k <= config.iterations; ++k) {
      const IndexSet batch = sample_indices(samples, config.batch, stream);
      const DenseVector g = logistic_gradient(backend, w, data, batch);
      accum = axpy(backend, 1.0, w, accum);
      const double alpha = config.beta / static_cast<double>(k);

      bool scaled = false;
      DenseVector direction;
      if (k <= 2 * interval || pairs.empty()) {
        if (k > 2 * interval && !warned_identity) {
          record.warnings.push_back("iteration " + std::to_string(k) +
                                    ": no stored correction pairs, using unscaled gradient");
          warned_identity = true;
        }
        direction = g;
      } else {
        if (h_stale) {
          const std::vector<CorrectionPair> window(pairs.begin(), pairs.end());
          h = hessian_update(backend, window, config.memory);
          h_stale = false;
          if (observer && observer->on_hessian) observer->on_hessian(h, window.back());
        }
        direction = matvec(backend, h, g);
        scaled = true;
      }
      w = axpy(backend, -alpha, direction, w);
      if (observer && observer->on_step) observer->on_step(k, g, direction, scaled);

      if (k % interval == 0) {
        ++t;
        DenseVector average = scale(backend, 1.0 / static_cast<double>(interval), accum);
        if (t > 0) {
          const IndexSet hessian_batch = sample_indices(samples, config.hessian_batch, stream);
          CorrectionPair pair;
          pair.s = axpy(backend, -1.0, previous_average, average);
          pair.y = logistic_hvp(backend, average, pair.s, data, hessian_batch);
          pair.curvature = dot(backend, pair.y, pair.s);
          const double threshold = 1e-10 * std::sqrt(dot(backend, pair.s, pair.s)) *
                                   std::sqrt(dot(backend, pair.y, pair.y));
          const bool stored = pair.curvature > threshold;
          if (stored) {
            pairs.push_back(pair);
            if (pairs.size() > config.memory) pairs.pop_front();
            h_stale = true;
          } else {
            record.warnings.push_back("iteration " + std::to_string(k) +
                                      ": skipped correction pair with curvature " +
                                      std::to_string(pair.curvature));
          }
          if (observer && observer->on_pair) observer->on_pair(k, pair, stored, pairs.size());
        }
        previous_average = std::move(average);
        std::fill(accum.begin(), accum.end(), 0.0);
      }

      const double objective = logistic_loss_full(backend, w, data);
      const auto elapsed =
          std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
      record.rows.push_back({k, objective, static_cast<std::int64_t>(elapsed)});
    }
  } catch (const Error& e) {
    record.final_iterate = w;
    throw PartialRunError(e, std::move(record));
  }
  record.final_iterate = std::move(w);
  return record;
}

}  // namespace simopt
