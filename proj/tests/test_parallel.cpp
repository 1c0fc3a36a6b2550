#include "alphactl/parallel.hpp"
#include "doctest.h"

#include <numeric>
#include <stdexcept>
#include <vector>

using namespace alphactl;

TEST_CASE("pairwise sum is exact on integers and stable on ill-conditioned data") {
  std::vector<double> x(1001);
  std::iota(x.begin(), x.end(), 0.0);
  CHECK(pairwise_sum(x) == 500500.0);
  CHECK(pairwise_sum(std::span<const double>()) == 0.0);
  std::vector<double> tiny(1 << 20, 0.1);
  CHECK(pairwise_sum(tiny) == doctest::Approx(0.1 * (1 << 20)).epsilon(1e-14));
}

TEST_CASE("serial and threaded loops visit every index once") {
  for (const ExecPolicy p : {ExecPolicy::serial(), ExecPolicy{Exec::parallel, 3}, ExecPolicy{Exec::parallel, 0}}) {
    std::vector<int> hits(257, 0);
    for_each_index(p, hits.size(), [&](std::size_t i, int w) {
      CHECK(w >= 0);
      CHECK(w < resolve_workers(p));
      hits[i] += 1;
    });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  CHECK(resolve_workers(ExecPolicy::serial()) == 1);
  CHECK(resolve_workers(ExecPolicy{Exec::parallel, 3}) == 3);
}

TEST_CASE("exceptions inside the threaded loop reach the caller") {
  auto body = [](std::size_t i, int) {
    if (i == 17) throw std::runtime_error("boom");
  };
  CHECK_THROWS_WITH_AS(for_each_index(ExecPolicy{Exec::parallel, 2}, 40, body), "boom", std::runtime_error);
  CHECK_THROWS_AS(for_each_index(ExecPolicy::serial(), 40, body), std::runtime_error);
}
