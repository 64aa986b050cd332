#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace devrate {

/// Largest state dimension supported by point-wise evaluators (Langevin with d = 3 needs 6).
inline constexpr int kMaxDim = 6;

/// Points and small vectors live on the stack; evaluators are called in tight loops.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

/// Mesh-sized vectors (samples of a field, measures, eigenvectors).
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Worker count: explicit value if positive, else DEVRATE_THREADS, else 1.
inline int resolve_threads(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DEVRATE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

/// Static block partition of [0, n) over workers. Results must be written per index so the
/// outcome does not depend on scheduling. The first exception thrown by a worker is rethrown.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      pool.emplace_back([begin, end, &fn, &error, &error_mutex] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

/// Radical-inverse Halton point in [0,1)^d, used for deterministic quasi-random probing.
inline Vec halton_point(std::size_t index, int dim) {
  static constexpr int primes[kMaxDim] = {2, 3, 5, 7, 11, 13};
  Vec u(dim);
  for (int k = 0; k < dim; ++k) {
    double f = 1.0, r = 0.0;
    std::size_t i = index + 1;
    const int b = primes[k];
    while (i > 0) {
      f /= b;
      r += f * static_cast<double>(i % b);
      i /= b;
    }
    u[k] = r;
  }
  return u;
}

/// Quasi-random probes in the box [lo, hi]^d.
inline std::vector<Vec> box_probes(int dim, double lo, double hi, std::size_t count) {
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec u = halton_point(i, dim);
    out.push_back((lo + (hi - lo) * u.array()).matrix());
  }
  return out;
}

}  // namespace devrate
