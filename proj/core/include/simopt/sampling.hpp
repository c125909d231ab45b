#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "simopt/backend.hpp"
#include "simopt/rng.hpp"

namespace simopt {

using IndexSet = std::vector<std::size_t>;

/// N(mean, Sigma) with Sigma either diagonal (per-coordinate std) or given by a
/// lower-triangular Cholesky factor L, Sigma = L L^T.
struct GaussianSpec {
  DenseVector mean;
  std::variant<DenseVector, DenseMatrix> scale;

  std::size_t dimension() const noexcept { return mean.size(); }
  bool is_diagonal() const noexcept { return std::holds_alternative<DenseVector>(scale); }
  void validate() const;
};

struct ClassificationData {
  DenseMatrix features;  // N x n, entries 0.0 or 1.0
  std::vector<std::uint8_t> labels;
  DenseVector true_weights;

  std::size_t samples() const noexcept { return features.rows(); }
  std::size_t features_count() const noexcept { return features.cols(); }
  void validate() const;
};

// All samplers are pure functions of the incoming stream state and advance
// the stream's counter by the number of blocks consumed. Results do not
// depend on the backend.

DenseVector uniform01(RngStream& stream, std::size_t n, const Backend& backend = {});

/// Box-Muller on consecutive uniform pairs; a block of four uniforms yields
/// four normals.
DenseVector standard_normal(RngStream& stream, std::size_t n, const Backend& backend = {});

/// N x d matrix whose rows are i.i.d. draws from `spec`.
DenseMatrix sample_returns(const GaussianSpec& spec, std::size_t n_samples, RngStream& stream,
                           const Backend& backend = {});

/// Row j holds `per_product` draws from N(mu_j, sigma_j^2), sorted ascending.
DenseMatrix sample_demands(std::span<const double> mu, std::span<const double> sigma,
                           std::size_t per_product, RngStream& stream,
                           const Backend& backend = {});

/// Synthetic binary-feature dataset with N = 30 n rows and exactly floor(N/10)
/// flipped labels. Clean labels split the scores x_i^T w_true at their median.
ClassificationData synth_classification(std::size_t n, RngStream& stream,
                                        const Backend& backend = {});

/// b distinct indices from [0, N), uniformly without replacement (partial
/// Fisher-Yates).
IndexSet sample_indices(std::size_t n, std::size_t b, RngStream& stream);

}  // namespace simopt
