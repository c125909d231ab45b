#include "simopt/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

namespace simopt {

// ---------------------------------------------------------------------------
// Philox4x64-10

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kPhiloxW0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kPhiloxW1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  __extension__ using u128 = unsigned __int128;
  const u128 p = static_cast<u128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

inline PhiloxBlock philox_round(const PhiloxBlock& c, const PhiloxKey& k) {
  std::uint64_t hi0, lo0, hi1, lo1;
  mulhilo(kPhiloxM0, c[0], hi0, lo0);
  mulhilo(kPhiloxM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

PhiloxBlock philox4x64_10(PhiloxBlock counter, PhiloxKey key) noexcept {
  counter = philox_round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
    counter = philox_round(counter, key);
  }
  return counter;
}

PhiloxBlock stream_block(const RngStream& stream, std::uint64_t offset) noexcept {
  const Counter128 c = stream.counter.plus(offset);
  return philox4x64_10({c.lo, c.hi, 0, 0}, {stream.seed, stream.stream_id});
}

// ---------------------------------------------------------------------------
// Distribution validation

void GaussianSpec::validate() const {
  const std::size_t d = mean.size();
  require(d >= 1, ErrorKind::configuration, "gaussian spec has empty mean");
  if (const auto* sd = std::get_if<DenseVector>(&scale)) {
    require(sd->size() == d, ErrorKind::dimension, "diag_std length differs from mean length");
    for (double s : *sd)
      require(s > 0.0 && std::isfinite(s), ErrorKind::configuration,
              "diag_std entries must be positive and finite");
  } else {
    const auto& l = std::get<DenseMatrix>(scale);
    require(l.rows() == d && l.cols() == d, ErrorKind::dimension,
            "chol_factor must be square with the mean's dimension");
    for (std::size_t i = 0; i < d; ++i) {
      require(l(i, i) > 0.0, ErrorKind::configuration, "chol_factor diagonal must be positive");
      for (std::size_t j = i + 1; j < d; ++j)
        require(l(i, j) == 0.0, ErrorKind::configuration, "chol_factor must be lower-triangular");
    }
  }
}

void ClassificationData::validate() const {
  require(labels.size() == features.rows(), ErrorKind::dimension,
          "label count differs from feature rows");
  for (double v : features.values())
    require(v == 0.0 || v == 1.0, ErrorKind::configuration, "features must be binary");
  for (auto z : labels) require(z <= 1, ErrorKind::configuration, "labels must be 0 or 1");
}

// ---------------------------------------------------------------------------
// Samplers

namespace {

constexpr std::size_t kBlocksPerTask = 1024;

std::uint64_t blocks_for(std::size_t n) { return (n + 3) / 4; }

// Fills out[i] = transform(block i/4)[i%4] for i in [0, n), in parallel over
// block ranges.
template <class BlockFn>
void fill_from_blocks(const RngStream& stream, std::span<double> out, const Backend& backend,
                      BlockFn&& block_fn) {
  const std::size_t n = out.size();
  const std::uint64_t blocks = blocks_for(n);
  const std::size_t tasks = backend.is_parallel() ? (blocks + kBlocksPerTask - 1) / kBlocksPerTask : 1;
  const std::uint64_t per_task = (blocks + tasks - 1) / tasks;
  backend.run_tasks(tasks, [&](std::size_t t) {
    const std::uint64_t b0 = t * per_task;
    const std::uint64_t b1 = std::min(blocks, b0 + per_task);
    for (std::uint64_t b = b0; b < b1; ++b) {
      const std::array<double, 4> vals = block_fn(stream_block(stream, b));
      for (std::size_t lane = 0; lane < 4; ++lane) {
        const std::size_t i = static_cast<std::size_t>(b) * 4 + lane;
        if (i < n) out[i] = vals[lane];
      }
    }
  });
}

std::array<double, 4> uniform_block(const PhiloxBlock& bits) {
  return {to_unit_interval(bits[0]), to_unit_interval(bits[1]), to_unit_interval(bits[2]),
          to_unit_interval(bits[3])};
}

std::array<double, 4> normal_block(const PhiloxBlock& bits) {
  std::array<double, 4> out{};
  for (std::size_t p = 0; p < 2; ++p) {
    const double u1 = to_unit_interval(bits[2 * p]);
    const double u2 = to_unit_interval(bits[2 * p + 1]);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out[2 * p] = r * std::cos(theta);
    out[2 * p + 1] = r * std::sin(theta);
  }
  return out;
}

}  // namespace

DenseVector uniform01(RngStream& stream, std::size_t n, const Backend& backend) {
  require(n >= 1, ErrorKind::empty_request, "uniform01 called with n == 0");
  DenseVector out(n);
  fill_from_blocks(stream, out, backend, uniform_block);
  stream.advance(blocks_for(n));
  return out;
}

DenseVector standard_normal(RngStream& stream, std::size_t n, const Backend& backend) {
  require(n >= 1, ErrorKind::empty_request, "standard_normal called with n == 0");
  DenseVector out(n);
  fill_from_blocks(stream, out, backend, normal_block);
  stream.advance(blocks_for(n));
  return out;
}

DenseMatrix sample_returns(const GaussianSpec& spec, std::size_t n_samples, RngStream& stream,
                           const Backend& backend) {
  require(n_samples >= 2, ErrorKind::insufficient_samples,
          "sample covariance needs at least 2 samples, got " + std::to_string(n_samples));
  spec.validate();
  const std::size_t d = spec.dimension();
  DenseMatrix out(n_samples, d, standard_normal(stream, n_samples * d, backend));
  const auto& mu = spec.mean;

  if (const auto* sd = std::get_if<DenseVector>(&spec.scale)) {
    backend.run_tasks(n_samples, [&](std::size_t i) {
      auto row = out.row(i);
      for (std::size_t j = 0; j < d; ++j) row[j] = mu[j] + (*sd)[j] * row[j];
    });
  } else {
    const auto& l = std::get<DenseMatrix>(spec.scale);
    backend.run_tasks(n_samples, [&](std::size_t i) {
      auto row = out.row(i);
      // In place from the last coordinate down: entry r only needs z_0..z_r.
      for (std::size_t r = d; r-- > 0;) {
        double acc = 0.0;
        for (std::size_t c = 0; c <= r; ++c) acc += l(r, c) * row[c];
        row[r] = mu[r] + acc;
      }
    });
  }
  return out;
}

DenseMatrix sample_demands(std::span<const double> mu, std::span<const double> sigma,
                           std::size_t per_product, RngStream& stream, const Backend& backend) {
  require(mu.size() == sigma.size(), ErrorKind::dimension, "mu and sigma lengths differ");
  require(per_product >= 1, ErrorKind::empty_request, "need at least one demand sample");
  for (double s : sigma)
    require(s > 0.0, ErrorKind::configuration, "demand sigma must be positive");
  const std::size_t products = mu.size();
  DenseMatrix out(products, per_product, standard_normal(stream, products * per_product, backend));
  backend.run_tasks(products, [&](std::size_t j) {
    auto row = out.row(j);
    for (double& v : row) v = mu[j] + sigma[j] * v;
    std::sort(row.begin(), row.end());
  });
  return out;
}

ClassificationData synth_classification(std::size_t n, RngStream& stream, const Backend& backend) {
  require(n >= 2, ErrorKind::configuration, "need at least 2 features");
  const std::size_t rows = 30 * n;

  DenseVector bits = uniform01(stream, rows * n, backend);
  for (double& v : bits) v = v < 0.5 ? 1.0 : 0.0;
  ClassificationData data;
  data.features = DenseMatrix(rows, n, std::move(bits));
  data.true_weights = standard_normal(stream, n, backend);

  const DenseVector scores = matvec(backend, data.features, data.true_weights);
  DenseVector sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  const double median = rows % 2 == 1 ? sorted[rows / 2]
                                      : 0.5 * (sorted[rows / 2 - 1] + sorted[rows / 2]);
  data.labels.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) data.labels[i] = scores[i] > median ? 1 : 0;

  const std::size_t flips = rows / 10;
  if (flips > 0)
    for (std::size_t i : sample_indices(rows, flips, stream)) data.labels[i] ^= 1;
  return data;
}

IndexSet sample_indices(std::size_t n, std::size_t b, RngStream& stream) {
  require(b >= 1, ErrorKind::configuration, "batch size must be >= 1");
  require(b <= n, ErrorKind::configuration,
          "batch size " + std::to_string(b) + " exceeds population " + std::to_string(n));
  const DenseVector u = uniform01(stream, b);
  // Sparse view of the permutation array: absent keys map to themselves.
  std::unordered_map<std::size_t, std::size_t> swapped;
  swapped.reserve(2 * b);
  auto at = [&](std::size_t k) {
    auto it = swapped.find(k);
    return it == swapped.end() ? k : it->second;
  };
  IndexSet out(b);
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t span = n - i;
    const std::size_t offset =
        std::min(static_cast<std::size_t>(u[i] * static_cast<double>(span)), span - 1);
    const std::size_t j = i + offset;
    const std::size_t vi = at(i);
    const std::size_t vj = at(j);
    swapped[i] = vj;
    swapped[j] = vi;
    out[i] = vj;
  }
  return out;
}

}  // namespace simopt
