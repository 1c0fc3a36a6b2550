#include "alphactl/parallel.hpp"

#include <omp.h>

#include <exception>
#include <mutex>

namespace alphactl {

int resolve_workers(const ExecPolicy& policy) {
  if (policy.mode == Exec::serial) return 1;
  return policy.workers > 0 ? policy.workers : omp_get_max_threads();
}

void for_each_index_serial(std::size_t n, const std::function<void(std::size_t, int)>& body) {
  for (std::size_t i = 0; i < n; ++i) body(i, 0);
}

void for_each_index_omp(std::size_t n, int workers, const std::function<void(std::size_t, int)>& body) {
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i), omp_get_thread_num());
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void for_each_index(const ExecPolicy& policy, std::size_t n, const std::function<void(std::size_t, int)>& body) {
  if (policy.mode == Exec::serial) {
    for_each_index_serial(n, body);
  } else {
    for_each_index_omp(n, resolve_workers(policy), body);
  }
}

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

}  // namespace alphactl
