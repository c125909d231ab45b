#pragma once

// Dense vector/matrix types and the numerical kernels shared by every
// optimizer. Two interchangeable backends are provided: a sequential one and
// a data-parallel one backed by a worker pool. Both evaluate reductions with
// the same fixed tree (chunk-local sequential sums, then pairwise combination
// of chunk sums in index order), so their results are bit-identical.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simopt/error.hpp"

namespace simopt {

using DenseVector = std::vector<double>;

/// Row-major dense matrix of 64-bit floats.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  DenseMatrix transpose() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

enum class BackendVariant { sequential, parallel };

struct BackendKind {
  BackendVariant variant = BackendVariant::sequential;
  std::size_t chunk_size = 4096;
  // Worker threads for the parallel variant; 0 means one per hardware thread.
  std::size_t workers = 0;
};

std::string_view to_string(BackendVariant variant) noexcept;
BackendVariant parse_backend_variant(std::string_view name);

class WorkerPool;

/// Execution context for kernels. Copies share the same worker pool.
class Backend {
 public:
  Backend() : Backend(BackendKind{}) {}
  explicit Backend(BackendKind kind);

  static Backend sequential(std::size_t chunk_size = 4096);
  static Backend parallel(std::size_t chunk_size = 4096, std::size_t workers = 0);

  const BackendKind& kind() const noexcept { return kind_; }
  std::size_t chunk_size() const noexcept { return kind_.chunk_size; }
  bool is_parallel() const noexcept { return kind_.variant == BackendVariant::parallel; }
  std::size_t concurrency() const noexcept;

  // Calls task(i) for every i in [0, n_tasks) and returns once all calls have
  // finished. Tasks must write disjoint outputs. The first exception thrown by
  // any task is rethrown on the calling thread.
  void run_tasks(std::size_t n_tasks, const std::function<void(std::size_t)>& task) const;

 private:
  BackendKind kind_;
  std::shared_ptr<WorkerPool> pool_;
};

// Pairwise combination of partial sums in index order: (0,1),(2,3),... until
// one value remains; an odd trailing element is carried to the next level.
double combine_pairwise(std::vector<double> partials);

double sum(const Backend& backend, std::span<const double> x);
double dot(const Backend& backend, std::span<const double> x, std::span<const double> y);

/// Ax, each row evaluated as dot(row_i, x) on the fixed tree.
DenseVector matvec(const Backend& backend, const DenseMatrix& a, std::span<const double> x);

/// A^T x; column sums use the fixed tree over rows.
DenseVector matvec_t(const Backend& backend, const DenseMatrix& a, std::span<const double> x);

/// alpha * x + y
DenseVector axpy(const Backend& backend, double alpha, std::span<const double> x,
                 std::span<const double> y);

DenseVector scale(const Backend& backend, double alpha, std::span<const double> x);

enum class Kernel { sigmoid, negate, exp };

Kernel parse_kernel(std::string_view name);

DenseVector map_kernel(const Backend& backend, Kernel kernel, std::span<const double> x);

double stable_sigmoid(double t) noexcept;

}  // namespace simopt
