#include "simopt/backend.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>

namespace simopt {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::empty_request: return "empty-request";
    case ErrorKind::insufficient_samples: return "insufficient-samples";
    case ErrorKind::invalid_gradient: return "invalid-gradient";
    case ErrorKind::invalid_constraint: return "invalid-constraint";
    case ErrorKind::solver_stall: return "solver-stall";
    case ErrorKind::degenerate_pair: return "degenerate-pair";
    case ErrorKind::undefined_metric: return "undefined-metric";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  require(values_.size() == rows * cols, ErrorKind::dimension,
          "matrix storage holds " + std::to_string(values_.size()) + " values, expected " +
              std::to_string(rows * cols));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

// ---------------------------------------------------------------------------
// Worker pool

class WorkerPool {
 public:
  explicit WorkerPool(std::size_t threads) {
    threads_.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) threads_.emplace_back([this] { worker_loop(); });
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t threads() const noexcept { return threads_.size(); }

  void run(std::size_t n, const std::function<void(std::size_t)>& task) {
    auto job = std::make_shared<Job>(task, n);
    {
      std::lock_guard lock(mutex_);
      jobs_.push_back(job);
    }
    cv_.notify_all();

    drain(*job);
    {
      std::unique_lock lock(job->mutex);
      job->finished.wait(lock, [&] { return job->done.load() == job->n; });
    }
    {
      std::lock_guard lock(mutex_);
      std::erase(jobs_, job);
    }
    if (job->error) std::rethrow_exception(job->error);
  }

 private:
  struct Job {
    Job(const std::function<void(std::size_t)>& t, std::size_t count) : task(&t), n(count) {}
    const std::function<void(std::size_t)>* task;
    std::size_t n;
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex mutex;
    std::condition_variable finished;
    std::exception_ptr error;
  };

  static void drain(Job& job) {
    for (;;) {
      const std::size_t i = job.next.fetch_add(1);
      if (i >= job.n) return;
      try {
        (*job.task)(i);
      } catch (...) {
        std::lock_guard lock(job.mutex);
        if (!job.error) job.error = std::current_exception();
      }
      if (job.done.fetch_add(1) + 1 == job.n) {
        { std::lock_guard lock(job.mutex); }
        job.finished.notify_all();
      }
    }
  }

  void worker_loop() {
    for (;;) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stop_ || !jobs_.empty(); });
        if (stop_) return;
        job = jobs_.front();
        if (job->next.load() >= job->n) {
          jobs_.pop_front();
          continue;
        }
      }
      drain(*job);
    }
  }

  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::shared_ptr<Job>> jobs_;
  bool stop_ = false;
  std::vector<std::thread> threads_;
};

// ---------------------------------------------------------------------------
// Backend

std::string_view to_string(BackendVariant variant) noexcept {
  return variant == BackendVariant::sequential ? "sequential" : "parallel";
}

BackendVariant parse_backend_variant(std::string_view name) {
  if (name == "sequential") return BackendVariant::sequential;
  if (name == "parallel") return BackendVariant::parallel;
  throw Error(ErrorKind::configuration, "unknown backend '" + std::string(name) + "'");
}

Backend::Backend(BackendKind kind) : kind_(kind) {
  require(kind_.chunk_size >= 1, ErrorKind::configuration, "chunk_size must be >= 1");
  if (kind_.variant == BackendVariant::parallel) {
    std::size_t total = kind_.workers;
    if (total == 0) total = std::max(1u, std::thread::hardware_concurrency());
    pool_ = std::make_shared<WorkerPool>(total - 1);
  }
}

Backend Backend::sequential(std::size_t chunk_size) {
  return Backend(BackendKind{BackendVariant::sequential, chunk_size, 0});
}

Backend Backend::parallel(std::size_t chunk_size, std::size_t workers) {
  return Backend(BackendKind{BackendVariant::parallel, chunk_size, workers});
}

std::size_t Backend::concurrency() const noexcept { return pool_ ? pool_->threads() + 1 : 1; }

void Backend::run_tasks(std::size_t n_tasks, const std::function<void(std::size_t)>& task) const {
  if (n_tasks == 0) return;
  if (!pool_ || pool_->threads() == 0 || n_tasks == 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  pool_->run(n_tasks, task);
}

// ---------------------------------------------------------------------------
// Kernels

namespace {

// Splits [0, n) into contiguous blocks and runs fn(begin, end) on each. Block
// boundaries only affect scheduling; every kernel computes each output element
// identically whatever the split.
template <class Fn>
void for_blocks(const Backend& backend, std::size_t n, std::size_t min_block, Fn&& fn) {
  if (n == 0) return;
  std::size_t blocks = 1;
  if (backend.is_parallel() && backend.concurrency() > 1) {
    blocks = std::min(n / std::max<std::size_t>(min_block, 1), 4 * backend.concurrency());
    blocks = std::max<std::size_t>(blocks, 1);
  }
  const std::size_t step = (n + blocks - 1) / blocks;
  backend.run_tasks(blocks, [&](std::size_t b) {
    const std::size_t begin = b * step;
    const std::size_t end = std::min(n, begin + step);
    if (begin < end) fn(begin, end);
  });
}

double tree_reduce(std::span<double> partials) {
  if (partials.empty()) return 0.0;
  std::size_t count = partials.size();
  while (count > 1) {
    std::size_t out = 0;
    for (std::size_t i = 0; i + 1 < count; i += 2) partials[out++] = partials[i] + partials[i + 1];
    if (count % 2 == 1) partials[out++] = partials[count - 1];
    count = out;
  }
  return partials[0];
}

double chunk_dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double chunk_sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

// Dot product of two contiguous ranges on the fixed tree, single-threaded.
double tree_dot(const double* x, const double* y, std::size_t n, std::size_t cs,
                std::vector<double>& scratch) {
  const std::size_t chunks = (n + cs - 1) / cs;
  scratch.resize(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = c * cs;
    scratch[c] = chunk_dot(x + begin, y + begin, std::min(cs, n - begin));
  }
  return tree_reduce(scratch);
}

void check_same_length(std::span<const double> x, std::span<const double> y, const char* op) {
  require(x.size() == y.size(), ErrorKind::dimension,
          std::string(op) + ": length " + std::to_string(x.size()) + " vs " +
              std::to_string(y.size()));
}

constexpr std::size_t kElementwiseGrain = 2048;

}  // namespace

double combine_pairwise(std::vector<double> partials) { return tree_reduce(partials); }

template <class ChunkFn>
static double reduce_chunks(const Backend& backend, std::size_t n, ChunkFn&& chunk_fn) {
  if (n == 0) return 0.0;
  const std::size_t cs = backend.chunk_size();
  const std::size_t chunks = (n + cs - 1) / cs;
  std::vector<double> partials(chunks);
  for_blocks(backend, chunks, 1, [&](std::size_t c0, std::size_t c1) {
    for (std::size_t c = c0; c < c1; ++c) {
      const std::size_t begin = c * cs;
      partials[c] = chunk_fn(begin, std::min(cs, n - begin));
    }
  });
  return tree_reduce(partials);
}

double sum(const Backend& backend, std::span<const double> x) {
  return reduce_chunks(backend, x.size(), [&](std::size_t begin, std::size_t len) {
    return chunk_sum(x.data() + begin, len);
  });
}

double dot(const Backend& backend, std::span<const double> x, std::span<const double> y) {
  check_same_length(x, y, "dot");
  return reduce_chunks(backend, x.size(), [&](std::size_t begin, std::size_t len) {
    return chunk_dot(x.data() + begin, y.data() + begin, len);
  });
}

DenseVector matvec(const Backend& backend, const DenseMatrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), ErrorKind::dimension,
          "matvec: matrix has " + std::to_string(a.cols()) + " columns, vector length " +
              std::to_string(x.size()));
  DenseVector out(a.rows());
  const std::size_t cs = backend.chunk_size();
  const std::size_t min_rows = std::max<std::size_t>(1, kElementwiseGrain / std::max<std::size_t>(a.cols(), 1));
  for_blocks(backend, a.rows(), min_rows, [&](std::size_t r0, std::size_t r1) {
    std::vector<double> scratch;
    for (std::size_t i = r0; i < r1; ++i)
      out[i] = tree_dot(a.row(i).data(), x.data(), a.cols(), cs, scratch);
  });
  return out;
}

DenseVector matvec_t(const Backend& backend, const DenseMatrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), ErrorKind::dimension,
          "matvec_t: matrix has " + std::to_string(a.rows()) + " rows, vector length " +
              std::to_string(x.size()));
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  DenseVector out(cols, 0.0);
  if (rows == 0) return out;
  const std::size_t cs = backend.chunk_size();
  const std::size_t row_chunks = (rows + cs - 1) / cs;

  // Columns are independent; each column sum runs over the rows on the fixed
  // tree: sequential within a chunk of rows, pairwise across row chunks.
  for_blocks(backend, cols, 256, [&](std::size_t c0, std::size_t c1) {
    const std::size_t width = c1 - c0;
    std::vector<double> partial(row_chunks * width, 0.0);
    for (std::size_t rc = 0; rc < row_chunks; ++rc) {
      double* acc = partial.data() + rc * width;
      const std::size_t i_end = std::min(rows, (rc + 1) * cs);
      for (std::size_t i = rc * cs; i < i_end; ++i) {
        const double xi = x[i];
        const double* row = a.row(i).data() + c0;
        for (std::size_t j = 0; j < width; ++j) acc[j] += row[j] * xi;
      }
    }
    std::vector<double> column(row_chunks);
    for (std::size_t j = 0; j < width; ++j) {
      for (std::size_t rc = 0; rc < row_chunks; ++rc) column[rc] = partial[rc * width + j];
      out[c0 + j] = tree_reduce(column);
    }
  });
  return out;
}

DenseVector axpy(const Backend& backend, double alpha, std::span<const double> x,
                 std::span<const double> y) {
  check_same_length(x, y, "axpy");
  DenseVector out(x.size());
  for_blocks(backend, x.size(), kElementwiseGrain, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = alpha * x[i] + y[i];
  });
  return out;
}

DenseVector scale(const Backend& backend, double alpha, std::span<const double> x) {
  DenseVector out(x.size());
  for_blocks(backend, x.size(), kElementwiseGrain, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = alpha * x[i];
  });
  return out;
}

Kernel parse_kernel(std::string_view name) {
  if (name == "sigmoid") return Kernel::sigmoid;
  if (name == "negate") return Kernel::negate;
  if (name == "exp") return Kernel::exp;
  throw Error(ErrorKind::configuration, "unknown kernel '" + std::string(name) + "'");
}

double stable_sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

DenseVector map_kernel(const Backend& backend, Kernel kernel, std::span<const double> x) {
  double (*fn)(double) = nullptr;
  switch (kernel) {
    case Kernel::sigmoid: fn = [](double t) { return stable_sigmoid(t); }; break;
    case Kernel::negate: fn = [](double t) { return -t; }; break;
    case Kernel::exp: fn = [](double t) { return std::exp(t); }; break;
  }
  require(fn != nullptr, ErrorKind::configuration,
          "unknown kernel id " + std::to_string(static_cast<int>(kernel)));
  DenseVector out(x.size());
  for_blocks(backend, x.size(), kElementwiseGrain, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = fn(x[i]);
  });
  return out;
}

}  // namespace simopt
