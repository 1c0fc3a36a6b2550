#include "alphactl/nonlinear.hpp"

#include <string>

namespace alphactl {

namespace {

using Grid = Eigen::MatrixXd;

}  // namespace

double trilinear_grid(const GridField& u, const GridField& v, const GridField& w, double weight) {
  // sum_{a,b} u_a d_a v_b w_b
  Grid acc = Grid::Zero(u.val[0].rows(), u.val[0].cols());
  for (int b = 0; b < 2; ++b) {
    acc.array() += (u.val[0].array() * v.grad[b][0].array() + u.val[1].array() * v.grad[b][1].array()) * w.val[b].array();
  }
  return acc.sum() * weight;
}

PairingWorkspace::PairingWorkspace(const Band& band, int Q) : grid_(band, Q), sigma_(sigma_weights(band)) {
  if (Q < 3 * band.N + 1) {
    throw std::invalid_argument("trilinear pairings need Q >= 3N+1 (got Q=" + std::to_string(Q) +
                                ", N=" + std::to_string(band.N) + ")");
  }
}

void PairingWorkspace::require_band(const SpectralField& f) const {
  if (!(f.band() == band())) throw std::invalid_argument("field band does not match the pairing workspace");
}

GridField PairingWorkspace::sample(const Eigen::VectorXd& c, int dx, int dy) const {
  GridField g;
  for (int comp = 0; comp < 2; ++comp) {
    g.val[comp] = grid_.evaluate(c, comp, dx, dy);
    g.grad[comp][0] = grid_.evaluate(c, comp, dx + 1, dy);
    g.grad[comp][1] = grid_.evaluate(c, comp, dx, dy + 1);
  }
  return g;
}

double PairingWorkspace::trilinear_b(const SpectralField& u, const SpectralField& v, const SpectralField& w) const {
  require_band(u);
  require_band(v);
  require_band(w);
  return trilinear_grid(sample(u.coeffs()), sample(v.coeffs()), sample(w.coeffs()), grid_.weight());
}

DualVector PairingWorkspace::project_vector(const Grid& fx, const Grid& fy) const {
  return grid_.project(fx, 0) + grid_.project(fy, 1);
}

DualVector PairingWorkspace::project_gradient(const std::array<std::array<Grid, 2>, 2>& T) const {
  DualVector out = DualVector::Zero(band().size());
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) out += grid_.project(T[a][b], b, a == 0 ? 1 : 0, a == 1 ? 1 : 0);
  }
  return out;
}

DualVector PairingWorkspace::curl_sigma_cross(const SpectralField& a, const SpectralField& c) const {
  require_band(a);
  require_band(c);
  const GridField ga = sample(a.coeffs());
  const Eigen::VectorXd sc = c.coeffs().cwiseProduct(sigma_);
  const Grid s0 = grid_.evaluate(sc, 0), s1 = grid_.evaluate(sc, 1);

  // b(h_i, a, S) = (h_i, F) with F_d = sum_b d_d a_b S_b
  const Grid fx = ga.grad[0][0].cwiseProduct(s0) + ga.grad[1][0].cwiseProduct(s1);
  const Grid fy = ga.grad[0][1].cwiseProduct(s0) + ga.grad[1][1].cwiseProduct(s1);

  // b(a, h_i, S) = sum_{d,b} (a_d S_b, d_d h_i,b)
  std::array<std::array<Grid, 2>, 2> T;
  const std::array<const Grid*, 2> S{&s0, &s1};
  for (int d = 0; d < 2; ++d)
    for (int b = 0; b < 2; ++b) T[d][b] = ga.val[d].cwiseProduct(*S[b]);

  return project_vector(fx, fy) - project_gradient(T);
}

DualVector PairingWorkspace::state_nonlinearity(const SpectralField& Y) const { return curl_sigma_cross(Y, Y); }

DualVector PairingWorkspace::linearized_terms(const SpectralField& Y, const SpectralField& Z) const {
  return curl_sigma_cross(Y, Z) + curl_sigma_cross(Z, Y);
}

DualVector PairingWorkspace::adjoint_transport(const SpectralField& Y, const SpectralField& p) const {
  require_band(Y);
  require_band(p);
  const GridField gy = sample(Y.coeffs());
  const GridField gp = sample(p.coeffs());
  // b(p, Y, sigma h_i) - b(Y, p, sigma h_i) = (1 + alpha lambda_i) (p . grad Y - Y . grad p, h_i)
  std::array<Grid, 2> f;
  for (int b = 0; b < 2; ++b) {
    f[b] = gp.val[0].cwiseProduct(gy.grad[b][0]) + gp.val[1].cwiseProduct(gy.grad[b][1]) -
           gy.val[0].cwiseProduct(gp.grad[b][0]) - gy.val[1].cwiseProduct(gp.grad[b][1]);
  }
  return project_vector(f[0], f[1]).cwiseProduct(sigma_);
}

DualVector PairingWorkspace::adjoint_transport_expanded(const SpectralField& Y, const SpectralField& p) const {
  require_band(Y);
  require_band(p);
  const double alpha = band().alpha;
  const GridField u = sample(Y.coeffs());
  const GridField v = sample(p.coeffs());
  const GridField su = sample(Y.coeffs().cwiseProduct(sigma_));
  const GridField sv = sample(p.coeffs().cwiseProduct(sigma_));

  // (X . grad Z, phi) for all phi: accumulate the vector X . grad Z.
  std::array<Grid, 2> f{Grid::Zero(grid_.Q(), grid_.Q()), Grid::Zero(grid_.Q(), grid_.Q())};
  auto add_transport = [&f](const GridField& X, const GridField& Z, double s) {
    for (int b = 0; b < 2; ++b) {
      f[b] += s * (X.val[0].cwiseProduct(Z.grad[b][0]) + X.val[1].cwiseProduct(Z.grad[b][1]));
    }
  };

  add_transport(sv, u, 1.0);   //  b(sigma v, u, phi)
  add_transport(su, v, -1.0);  // -b(sigma u, v, phi)
  add_transport(v, su, 1.0);   //  b(v, sigma u, phi)
  add_transport(u, v, 1.0);    //  b(u, v, phi)
  add_transport(v, u, -1.0);   // -b(v, u, phi)
  for (int d = 0; d < 2; ++d) {
    const GridField du = sample(Y.coeffs(), d == 0 ? 1 : 0, d == 1 ? 1 : 0);
    const GridField dv = sample(p.coeffs(), d == 0 ? 1 : 0, d == 1 ? 1 : 0);
    add_transport(dv, du, -2.0 * alpha);  // -2 alpha b(d_i v, d_i u, phi)
    add_transport(du, dv, 2.0 * alpha);   // +2 alpha b(d_i u, d_i v, phi)
  }

  // b(u, phi, sigma v) = sum_{d,b} (u_d (sigma v)_b, d_d phi_b)
  std::array<std::array<Grid, 2>, 2> T;
  for (int d = 0; d < 2; ++d)
    for (int b = 0; b < 2; ++b) T[d][b] = u.val[d].cwiseProduct(sv.val[b]);

  return project_vector(f[0], f[1]) + project_gradient(T);
}

DualVector PairingWorkspace::linearized_transpose(const SpectralField& Y, const SpectralField& p) const {
  return adjoint_transport(Y, p) - curl_sigma_cross(p, Y);
}

Eigen::MatrixXd PairingWorkspace::linearized_matrix(const SpectralField& Y) const {
  const int n = band().size();
  Eigen::MatrixXd J(n, n);
  for (int c = 0; c < n; ++c) J.col(c) = linearized_terms(Y, SpectralField::mode(band(), band().wave(c)));
  return J;
}

Eigen::MatrixXd PairingWorkspace::linearized_transpose_matrix(const SpectralField& Y) const {
  const int n = band().size();
  Eigen::MatrixXd Jt(n, n);
  for (int c = 0; c < n; ++c) Jt.col(c) = linearized_transpose(Y, SpectralField::mode(band(), band().wave(c)));
  return Jt;
}

double PairingWorkspace::curl_cross_identity_check(const SpectralField& phi, const SpectralField& psi) const {
  require_band(phi);
  require_band(psi);
  const GridField a = sample(phi.coeffs());
  const GridField b = sample(psi.coeffs());
  // s = a_0 b_1 - a_1 b_0, ds/dd by the product rule
  std::array<Grid, 2> ds;
  for (int d = 0; d < 2; ++d) {
    ds[d] = a.grad[0][d].cwiseProduct(b.val[1]) + a.val[0].cwiseProduct(b.grad[1][d]) -
            a.grad[1][d].cwiseProduct(b.val[0]) - a.val[1].cwiseProduct(b.grad[0][d]);
  }
  const std::array<Grid, 2> curl{ds[1], -ds[0]};
  double worst = 0.0;
  for (int c = 0; c < 2; ++c) {
    const Grid rhs = b.val[0].cwiseProduct(a.grad[c][0]) + b.val[1].cwiseProduct(a.grad[c][1]) -
                     a.val[0].cwiseProduct(b.grad[c][0]) - a.val[1].cwiseProduct(b.grad[c][1]);
    worst = std::max(worst, (curl[c] - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace alphactl
