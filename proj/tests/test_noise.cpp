#include "alphactl/noise.hpp"
#include "doctest.h"
#include "helpers.hpp"

#include <set>

using namespace alphactl;

TEST_CASE("sampled paths are reproducible and have the right scale") {
  const WienerPath a = sample_path(42, 200, 0.01, 3), b = sample_path(42, 200, 0.01, 3);
  CHECK(a.increments == b.increments);
  CHECK_FALSE(sample_path(43, 200, 0.01, 3).increments == a.increments);
  CHECK(a.increments.rows() == 200);
  CHECK(a.increments.cols() == 3);
  const double var = a.increments.squaredNorm() / 600.0;
  CHECK(var == doctest::Approx(0.01).epsilon(0.2));

  const WienerPath r = sample_path(7, 10, 0.04, 2, true);
  CHECK((r.increments.cwiseAbs().array() - 0.2).abs().maxCoeff() < 1e-15);
}

TEST_CASE("path arguments are validated") {
  CHECK_THROWS_AS(sample_path(1, 0, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_path(1, 4, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_path(1, 12, 0.1, 2, true), std::invalid_argument);
  CHECK_THROWS_AS(ScenarioTree(12, 0.1, 2), std::invalid_argument);
  CHECK_NOTHROW(ScenarioTree(11, 0.1, 2));
}

TEST_CASE("scenario tree enumerates every sign pattern once in block order") {
  const ScenarioTree tree(3, 0.25, 2);
  CHECK(tree.size() == 64);
  CHECK(tree.block_size(1) == 16);
  CHECK(tree.nodes(2) == 16);
  std::set<std::vector<int>> seen;
  for (std::size_t s = 0; s < tree.size(); ++s) {
    const WienerPath p = tree.scenario(s);
    std::vector<int> signs;
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 2; ++l) signs.push_back(p.increments(k, l) > 0 ? 1 : -1);
    seen.insert(signs);
    // paths in one level-k node share their first k increments
    for (int k = 1; k <= 3; ++k) {
      const std::size_t first = tree.node_of(s, k) * tree.block_size(k);
      const WienerPath q = tree.scenario(first);
      CHECK(q.increments.topRows(k) == p.increments.topRows(k));
    }
  }
  CHECK(seen.size() == 64);

  const Ensemble e = Ensemble::from_tree(tree);
  CHECK(e.size() == 64);
  double w = 0;
  for (double x : e.weights) w += x;
  CHECK(w == doctest::Approx(1.0));
  // increments are centred with variance dt at every step
  for (int k = 0; k < 3; ++k) {
    double m1 = 0, m2 = 0;
    for (std::size_t s = 0; s < e.size(); ++s) {
      m1 += e.weights[s] * e.paths[s].increments(k, 1);
      m2 += e.weights[s] * e.paths[s].increments(k, 1) * e.paths[s].increments(k, 1);
    }
    CHECK(std::abs(m1) < 1e-15);
    CHECK(m2 == doctest::Approx(0.25));
  }
}

TEST_CASE("monte carlo ensembles use distinct reproducible seeds") {
  const Ensemble a = Ensemble::monte_carlo(5, 10, 4, 0.1, 1), b = Ensemble::monte_carlo(5, 10, 4, 0.1, 1);
  CHECK(a.seeds() == b.seeds());
  const auto s = a.seeds();
  CHECK(std::set<std::uint64_t>(s.begin(), s.end()).size() == 10);
  CHECK_FALSE(a.is_tree());
  CHECK(a.weights[3] == doctest::Approx(0.1));
}

namespace {

DiffusionSpec make_spec(const Band& band, DiffusionFamily f, std::mt19937_64& rng) {
  DiffusionSpec s;
  s.family = f;
  s.gain = 0.7;
  s.saturation_level = 0.5;
  s.anchors = {testutil::random_field(band, rng), testutil::random_field(band, rng)};
  return s;
}

}  // namespace

TEST_CASE("diffusion families evaluate as documented") {
  const Band band{2, 0.1};
  std::mt19937_64 rng(21);
  const auto y = testutil::random_field(band, rng);
  const DiffusionSpec add = make_spec(band, DiffusionFamily::additive, rng);
  const auto g = eval_G(add, 0.0, y);
  CHECK(testutil::max_abs((g[1] - 0.7 * add.anchors[1]).coeffs()) < 1e-15);
  DiffusionSpec lin = add;
  lin.family = DiffusionFamily::linear;
  const auto gl = eval_G(lin, 0.0, y);
  for (int i = 0; i < band.size(); ++i) CHECK(gl[0][i] == doctest::Approx(0.7 * add.anchors[0][i] * y[i]));
  CHECK(DiffusionSpec::none(band, 2).is_zero());
  CHECK(diffusion_family_from_string(to_string(DiffusionFamily::saturated_linear)) ==
        DiffusionFamily::saturated_linear);
  CHECK_THROWS(diffusion_family_from_string("cubic"));
}

TEST_CASE("saturated diffusion stays inside its ball") {
  const Band band{2, 0.1};
  std::mt19937_64 rng(22);
  const DiffusionSpec s = make_spec(band, DiffusionFamily::saturated_linear, rng);
  const auto big = testutil::random_field(band, rng, 10.0);
  CHECK(tuple_norm_squared(eval_G(s, 0.0, big)) == doctest::Approx(0.5));
  const auto tiny = testutil::random_field(band, rng, 1e-3);
  DiffusionSpec lin = s;
  lin.family = DiffusionFamily::linear;
  CHECK(tuple_norm_squared(eval_G(s, 0.0, tiny)) == doctest::Approx(tuple_norm_squared(eval_G(lin, 0.0, tiny))));
}

TEST_CASE("diffusion derivative matches finite differences and its adjoint pairing") {
  const Band band{3, 0.2};
  std::mt19937_64 rng(23);
  for (auto f : {DiffusionFamily::additive, DiffusionFamily::linear, DiffusionFamily::saturated_linear}) {
    const DiffusionSpec s = make_spec(band, f, rng);
    const auto y = testutil::random_field(band, rng, f == DiffusionFamily::saturated_linear ? 3.0 : 1.0);
    const auto v = testutil::random_field(band, rng);
    const double eps = 1e-6;
    const auto gp = eval_G(s, 0.0, y + eps * v), gm = eval_G(s, 0.0, y - (eps * v));
    const auto d = eval_dG(s, 0.0, y, v);
    for (int l = 0; l < 2; ++l) {
      const Eigen::VectorXd fd = (gp[l] - gm[l]).coeffs() / (2 * eps);
      CHECK((fd - d.value[l].coeffs()).cwiseAbs().maxCoeff() < 1e-7);
    }
    const std::vector<SpectralField> q{testutil::random_field(band, rng), testutil::random_field(band, rng)};
    const double lhs = d.value[0].coeffs().dot(q[0].coeffs()) + d.value[1].coeffs().dot(q[1].coeffs());
    const double rhs = v.coeffs().dot(eval_dG_adjoint(s, 0.0, y, q).coeffs());
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("lipschitz constant bounds difference quotients") {
  const Band band{3, 0.2};
  std::mt19937_64 rng(24);
  for (auto f : {DiffusionFamily::additive, DiffusionFamily::linear, DiffusionFamily::saturated_linear}) {
    const DiffusionSpec s = make_spec(band, f, rng);
    const double K = lipschitz_constant(s);
    for (int t = 0; t < 50; ++t) {
      const auto a = testutil::random_field(band, rng), b = testutil::random_field(band, rng);
      const auto ga = eval_G(s, 0.0, a), gb = eval_G(s, 0.0, b);
      std::vector<SpectralField> diff{ga[0] - gb[0], ga[1] - gb[1]};
      CHECK(std::sqrt(tuple_norm_squared(diff)) <= K * norm(a - b, NormKind::V) * (1 + 1e-12));
    }
  }
}

TEST_CASE("diffusion validation rejects foreign anchors") {
  DiffusionSpec s = DiffusionSpec::none(Band{2, 0.1}, 1);
  CHECK_THROWS_AS(s.validate(Band{3, 0.1}), std::invalid_argument);
  s.gain = std::nan("");
  CHECK_THROWS_AS(s.validate(Band{2, 0.1}), std::invalid_argument);
}
