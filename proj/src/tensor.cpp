#include "egs/tensor.hpp"

#include <cmath>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>

#include "egs/error.hpp"

namespace egs {

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  Tensor t;
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  t.shape = std::move(shape);
  t.data.assign(n, 0.0);
  return t;
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  Tensor t = zeros(std::move(shape));
  for (double& x : t.data) x = v;
  return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols) { return zeros({rows, cols}); }

Tensor Tensor::row(std::vector<double> values) {
  Tensor t;
  t.shape = {1, values.size()};
  t.data = std::move(values);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.shape = {1, 1};
  t.data = {v};
  return t;
}

std::string Tensor::shape_str() const {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  s += ")";
  return s;
}

void check_finite(const Tensor& t, const char* op) {
  for (double v : t.data) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + ": non-finite value in result tensor " +
                         t.shape_str());
    }
  }
}

namespace {

// One persistent helper thread for splitting matmul kernels by output rows.
// Each output element is produced by exactly one thread with the same serial
// inner-loop order, so threaded and serial results are bit-identical.
class HelperThread {
 public:
  static HelperThread& instance() {
    static HelperThread helper;
    return helper;
  }

  bool available() const { return available_; }

  // Runs `job` on the helper while the caller does its own half; returns after
  // both halves finish. Only one caller can own the helper at a time; a busy
  // helper makes try_acquire fail and the caller computes serially instead,
  // which yields the same bits.
  bool try_acquire() { return available_ && owner_.try_lock(); }

  void run(const std::function<void()>& job, const std::function<void()>& own_half) {
    {
      std::lock_guard lock(mutex_);
      job_ = &job;
      done_ = false;
    }
    cv_.notify_all();
    own_half();
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [&] { return done_; });
    }
    owner_.unlock();
  }

 private:
  HelperThread() {
    available_ = std::thread::hardware_concurrency() >= 2;
    if (available_) thread_ = std::thread([this] { loop(); });
  }

  ~HelperThread() {
    if (!available_) return;
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }

  void loop() {
    for (;;) {
      const std::function<void()>* job = nullptr;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return job_ != nullptr || stop_; });
        if (stop_) return;
        job = job_;
        job_ = nullptr;
      }
      (*job)();
      {
        std::lock_guard lock(mutex_);
        done_ = true;
      }
      cv_.notify_all();
    }
  }

  std::thread thread_;
  std::mutex mutex_;
  std::mutex owner_;
  std::condition_variable cv_;
  const std::function<void()>* job_{nullptr};
  bool done_{true};
  bool stop_{false};
  bool available_{false};
};

constexpr std::size_t kSplitThreshold = 200'000;  // multiply-adds

void nn_rows(const double* pa, const double* pb, double* pc, std::size_t i0,
             std::size_t i1, std::size_t k, std::size_t n) {
  for (std::size_t i = i0; i < i1; ++i) {
    double* ci = pc + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    const double* ai = pa + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const double av = ai[l];
      const double* bl = pb + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

void nt_rows(const double* pa, const double* pb, double* pc, std::size_t i0,
             std::size_t i1, std::size_t k, std::size_t n) {
  for (std::size_t i = i0; i < i1; ++i) {
    const double* ai = pa + i * k;
    double* ci = pc + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = pb + j * k;
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += ai[l] * bj[l];
      ci[j] += acc;
    }
  }
}

// Accumulates A^T(rows l0..l1) @ B into C rows l0..l1.
void tn_rows(const double* pa, const double* pb, double* pc, std::size_t l0,
             std::size_t l1, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = pa + i * k;
    const double* bi = pb + i * n;
    for (std::size_t l = l0; l < l1; ++l) {
      const double av = ai[l];
      double* cl = pc + l * n;
      for (std::size_t j = 0; j < n; ++j) cl[j] += av * bi[j];
    }
  }
}

template <typename RowFn>
void run_split(std::size_t rows, std::size_t work, const RowFn& run_range) {
  HelperThread& helper = HelperThread::instance();
  if (rows < 2 || work < kSplitThreshold || !helper.try_acquire()) {
    run_range(0, rows);
    return;
  }
  const std::size_t mid = rows / 2;
  const std::function<void()> top = [&] { run_range(0, mid); };
  helper.run(top, [&] { run_range(mid, rows); });
}

}  // namespace

void matmul_nn(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* pc = c.data.data();
  run_split(m, m * k * n, [&](std::size_t i0, std::size_t i1) {
    nn_rows(pa, pb, pc, i0, i1, k, n);
  });
}

void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* pc = c.data.data();
  run_split(m, m * k * n, [&](std::size_t i0, std::size_t i1) {
    nt_rows(pa, pb, pc, i0, i1, k, n);
  });
}

void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* pc = c.data.data();
  run_split(k, m * k * n, [&](std::size_t l0, std::size_t l1) {
    tn_rows(pa, pb, pc, l0, l1, m, k, n);
  });
}

}  // namespace egs
