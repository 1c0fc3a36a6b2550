#include "alphactl/nonlinear.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace alphactl;

namespace {

// (curl sigma(c) x a, h_i) from pointwise third derivatives. In the plane
// curl w x a = (-omega a_y, omega a_x) with omega = d_x w_y - d_y w_x.
Eigen::VectorXd direct_curl_cross(const SpectralGrid& g, const SpectralField& a, const SpectralField& c) {
  const double al = a.band().alpha;
  auto dsig = [&](int comp, int dx, int dy) -> Eigen::MatrixXd {
    return g.evaluate(c.coeffs(), comp, dx, dy) -
           al * (g.evaluate(c.coeffs(), comp, dx + 2, dy) + g.evaluate(c.coeffs(), comp, dx, dy + 2));
  };
  const Eigen::MatrixXd omega = dsig(1, 1, 0) - dsig(0, 0, 1);
  const Eigen::MatrixXd ax = g.evaluate(a.coeffs(), 0), ay = g.evaluate(a.coeffs(), 1);
  const Eigen::MatrixXd fx = -omega.cwiseProduct(ay), fy = omega.cwiseProduct(ax);
  return g.project(fx, 0) + g.project(fy, 1);
}

}  // namespace

TEST_CASE("trilinear form is antisymmetric and the drift is energy neutral") {
  const Band band{4, 0.1};
  const PairingWorkspace ws(band, 13);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto u = testutil::random_field(band, rng), v = testutil::random_field(band, rng),
               w = testutil::random_field(band, rng);
    const double s = std::abs(ws.trilinear_b(u, v, w));
    CHECK(std::abs(ws.trilinear_b(u, v, w) + ws.trilinear_b(u, w, v)) <= 1e-11 * (1 + s));
    CHECK(std::abs(ws.trilinear_b(u, v, v)) < 1e-10);
    const double scale = norm(u, NormKind::V) * norm(u, NormKind::Wtilde);
    CHECK(std::abs(ws.state_nonlinearity(u).dot(u.coeffs())) / scale < 1e-12);
  }
}

TEST_CASE("curl-cross pairing matches a third-derivative evaluation") {
  for (const double alpha : {0.0, 0.1, 0.7}) {
    const Band band{3, alpha};
    const PairingWorkspace ws(band, 10);
    std::mt19937_64 rng(12);
    const auto a = testutil::random_field(band, rng), c = testutil::random_field(band, rng);
    const Eigen::VectorXd want = direct_curl_cross(ws.grid(), a, c);
    const Eigen::VectorXd got = ws.curl_sigma_cross(a, c);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-10 * (1 + want.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("a single mode does not advect itself") {
  const Band band{3, 0.2};
  const PairingWorkspace ws(band, 10);
  CHECK(testutil::max_abs(ws.state_nonlinearity(SpectralField::mode(band, {2, 1}))) < 1e-11);
}

TEST_CASE("linearized drift equals a central difference of the quadratic drift") {
  const Band band{3, 0.1};
  const PairingWorkspace ws(band, 10);
  std::mt19937_64 rng(13);
  const auto Y = testutil::random_field(band, rng), Z = testutil::random_field(band, rng);
  const double eps = 1e-3;
  const Eigen::VectorXd fd =
      (ws.state_nonlinearity(Y + eps * Z) - ws.state_nonlinearity(Y - (eps * Z))) / (2 * eps);
  const Eigen::VectorXd lin = ws.linearized_terms(Y, Z);
  // the drift is exactly quadratic, so only roundoff separates them
  CHECK((fd - lin).cwiseAbs().maxCoeff() <= 1e-8 * (1 + lin.cwiseAbs().maxCoeff()));
  CHECK((ws.linearized_matrix(Y) * Z.coeffs() - lin).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("transpose operators are consistent") {
  const Band band{3, 0.3};
  const PairingWorkspace ws(band, 10);
  std::mt19937_64 rng(14);
  const auto Y = testutil::random_field(band, rng), p = testutil::random_field(band, rng);
  const Eigen::MatrixXd J = ws.linearized_matrix(Y), Jt = ws.linearized_transpose_matrix(Y);
  CHECK((J.transpose() - Jt).cwiseAbs().maxCoeff() <= 1e-10 * (1 + J.cwiseAbs().maxCoeff()));
  const Eigen::VectorXd a = ws.adjoint_transport(Y, p), b = ws.adjoint_transport_expanded(Y, p);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9 * (1 + a.cwiseAbs().maxCoeff()));
  CHECK(ws.curl_cross_identity_check(Y, p) < 1e-9);
}

TEST_CASE("pairing workspace rejects coarse grids and foreign bands") {
  CHECK_THROWS_AS(PairingWorkspace(Band{3, 0.1}, 9), std::invalid_argument);
  const PairingWorkspace ws(Band{2, 0.1}, 7);
  const SpectralField f(Band{3, 0.1});
  CHECK_THROWS_AS(ws.state_nonlinearity(f), std::invalid_argument);
}
