#pragma once

// Transport pairings of the second-grade model. All of them reduce to the
// trilinear form b(u, v, w) = (u . grad v, w) evaluated by exact midpoint
// quadrature; curl sigma(.) is never formed explicitly.

#include "alphactl/spectral.hpp"

#include <array>

namespace alphactl {

/// Coefficient vector of pairings against every basis field: entry i is
/// (F, h_i). Because the basis is L2-orthonormal this is also the
/// coefficient vector of the L2 projection of F.
using DualVector = Eigen::VectorXd;

/// Values and first derivatives of a vector field on the quadrature grid.
struct GridField {
  std::array<Eigen::MatrixXd, 2> val;
  std::array<std::array<Eigen::MatrixXd, 2>, 2> grad;  // grad[component][direction]
};

/// b(u, v, w) from sampled fields (uses u.val, v.grad, w.val).
double trilinear_grid(const GridField& u, const GridField& v, const GridField& w, double weight);

/// Scratch and quadrature for the trilinear pairings. One per worker.
class PairingWorkspace {
 public:
  /// Throws std::invalid_argument when Q < 3N + 1.
  PairingWorkspace(const Band& band, int Q);

  const Band& band() const { return grid_.band(); }
  const SpectralGrid& grid() const { return grid_; }

  /// Samples d^dx/dx d^dy/dy of the field (a divergence-free derivative
  /// field when dx + dy > 0) together with its gradient.
  GridField sample(const Eigen::VectorXd& c, int dx = 0, int dy = 0) const;

  double trilinear_b(const SpectralField& u, const SpectralField& v, const SpectralField& w) const;

  /// (curl sigma(c) x a, h_i) = b(h_i, a, sigma c) - b(a, h_i, sigma c).
  DualVector curl_sigma_cross(const SpectralField& a, const SpectralField& c) const;

  /// (curl sigma(Y) x Y, h_i).
  DualVector state_nonlinearity(const SpectralField& Y) const;

  /// (curl sigma(Z) x Y + curl sigma(Y) x Z, h_i): the first variation of
  /// state_nonlinearity at Y in direction Z.
  DualVector linearized_terms(const SpectralField& Y, const SpectralField& Z) const;

  /// (curl sigma(Y x p), h_i) = b(p, Y, sigma h_i) - b(Y, p, sigma h_i).
  DualVector adjoint_transport(const SpectralField& Y, const SpectralField& p) const;

  /// Same quantity through the pointwise expansion of curl sigma(u x v):
  ///   b(sigma v, u, phi) + b(u, phi, sigma v) - b(sigma u, v, phi)
  ///   + b(v, sigma u, phi) + b(u, v, phi) - b(v, u, phi)
  ///   - 2 alpha sum_i [ b(d_i v, d_i u, phi) - b(d_i u, d_i v, phi) ]
  /// with u = Y, v = p and phi = h_i.
  DualVector adjoint_transport_expanded(const SpectralField& Y, const SpectralField& p) const;

  /// Transpose of the linearized drift applied to p:
  /// J(Y)^T p = adjoint_transport(Y, p) - curl_sigma_cross(p, Y).
  DualVector linearized_transpose(const SpectralField& Y, const SpectralField& p) const;

  /// Dense Galerkin matrices, column c = action on basis field c.
  Eigen::MatrixXd linearized_matrix(const SpectralField& Y) const;
  Eigen::MatrixXd linearized_transpose_matrix(const SpectralField& Y) const;

  /// max over the grid of |curl(phi x psi) - (psi . grad phi - phi . grad psi)|
  /// where curl of the scalar s = phi x psi is (d_y s, -d_x s).
  double curl_cross_identity_check(const SpectralField& phi, const SpectralField& psi) const;

 private:
  void require_band(const SpectralField& f) const;
  // sum_b (F_b, h_i,b) for a vector F on the grid
  DualVector project_vector(const Eigen::MatrixXd& fx, const Eigen::MatrixXd& fy) const;
  // sum_{a,b} (T_ab, d_a h_i,b)
  DualVector project_gradient(const std::array<std::array<Eigen::MatrixXd, 2>, 2>& T) const;

  SpectralGrid grid_;
  Eigen::VectorXd sigma_;
};

}  // namespace alphactl
