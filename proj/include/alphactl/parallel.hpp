#pragma once

// Path-level data parallelism. Every kernel that loops over independent
// sample paths has a serial reference loop and an OpenMP loop; both write
// results into per-path slots and reduce in a fixed order, so the output is
// bit-identical for any worker count.

#include <cstddef>
#include <functional>
#include <span>

namespace alphactl {

enum class Exec { serial, parallel };

struct ExecPolicy {
  Exec mode = Exec::parallel;
  int workers = 0;  // 0 = runtime default

  static ExecPolicy serial() { return {Exec::serial, 1}; }
};

/// Number of workers the parallel loop will use.
int resolve_workers(const ExecPolicy& policy);

/// body(index, worker) for index in [0, n). `worker` is in
/// [0, resolve_workers(policy)) and identifies per-worker scratch.
void for_each_index_serial(std::size_t n, const std::function<void(std::size_t, int)>& body);
void for_each_index_omp(std::size_t n, int workers, const std::function<void(std::size_t, int)>& body);
void for_each_index(const ExecPolicy& policy, std::size_t n, const std::function<void(std::size_t, int)>& body);

/// Pairwise (tree) summation in index order.
double pairwise_sum(std::span<const double> x);

}  // namespace alphactl
