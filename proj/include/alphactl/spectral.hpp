#pragma once

// Slip-compatible divergence-free spectral basis on the unit square.
//
// Every field is v = sum_i c_i h_i with
//   h_i = (2 / sqrt(lambda_i)) * curl_perp(sin(j pi x) sin(k pi y)),
//   curl_perp psi = (d psi / dy, -d psi / dx),
// so the h_i are L2-orthonormal, divergence free, tangent to each side, and
// satisfy curl h_i = 0 and (n . D h_i) . tau = 0 on the boundary. They are
// also eigenfunctions of the vector Laplacian: -Delta h_i = lambda_i h_i with
// lambda_i = pi^2 (j^2 + k^2). All operators of the form f(-Delta) are
// therefore diagonal in the coefficients.

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace alphactl {

struct WaveIndex {
  int j = 1;
  int k = 1;
  bool operator==(const WaveIndex&) const = default;
};

struct BasisEigenvalues {
  double lambda;  // Laplacian eigenvalue pi^2 (j^2 + k^2)
  double mu;      // W-versus-V Rayleigh quotient, 2 + alpha * lambda
};

/// Eigenvalues of the basis field indexed by `index`.
///
/// For an L2-normalised h with sigma(h) = (1 + alpha lambda) h,
///   (h, h)_V = 1 + alpha lambda,
///   (h, h)_W = (1 + alpha lambda)^2 + (1 + alpha lambda),
/// hence mu = (h, h)_W / (h, h)_V = 2 + alpha lambda. Since the basis is
/// orthogonal in both inner products, these are exactly the generalized
/// eigenvalues of the W-versus-V Gram pencil. Throws std::domain_error for
/// j < 1 or k < 1.
BasisEigenvalues basis_eigenvalues(WaveIndex index, double alpha);

/// Mode cutoff and material modulus shared by all fields in a computation.
struct Band {
  int N = 1;
  double alpha = 0.0;

  int size() const { return N * N; }
  int index(WaveIndex w) const { return (w.j - 1) * N + (w.k - 1); }
  WaveIndex wave(int i) const { return {i / N + 1, i % N + 1}; }
  double lambda(int i) const;
  bool operator==(const Band&) const = default;

  void validate() const;
};

class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const Band& band);
  SpectralField(const Band& band, Eigen::VectorXd coeffs);

  static SpectralField mode(const Band& band, WaveIndex w, double c = 1.0);

  const Band& band() const { return band_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }
  int size() const { return static_cast<int>(coeffs_.size()); }
  double operator[](int i) const { return coeffs_[i]; }
  double& operator[](int i) { return coeffs_[i]; }
  bool all_finite() const { return coeffs_.allFinite(); }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);

 private:
  Band band_;
  Eigen::VectorXd coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Diagonal of sigma = I - alpha Delta: 1 + alpha lambda_i.
Eigen::VectorXd sigma_weights(const Band& band);
/// Diagonal of -Delta on the band.
Eigen::VectorXd laplacian_eigenvalues(const Band& band);

SpectralField sigma_apply(const SpectralField& v);
/// (I - alpha Delta)^{-1}; the pressure of the modified Stokes problem is
/// identically zero on the divergence-free band.
SpectralField sigma_inverse(const SpectralField& f);

enum class NormKind { L2, V, W, Wtilde, H1, H2, H3 };

std::string to_string(NormKind kind);

/// Diagonal weights w_i such that ||v||^2 = sum_i w_i c_i^2.
///
///   L2      1
///   V       1 + alpha lambda                 (= ||v||^2 + 2 alpha ||Dv||^2)
///   W       (1 + alpha lambda)^2 + (1 + alpha lambda)
///   Wtilde  (1 + alpha lambda)^2 lambda + (1 + alpha lambda)
///   H^s     1 + lambda + ... + lambda^s      (sum of all derivatives up to s)
Eigen::VectorXd norm_weights(const Band& band, NormKind kind);
double norm_squared(const SpectralField& v, NormKind kind);
double norm(const SpectralField& v, NormKind kind);
double inner(const SpectralField& a, const SpectralField& b, NormKind kind);

/// ||u||_**^2 = 2 alpha ||Du||^2 + ||curl sigma(u)||^2.
double star_norm_squared(const SpectralField& v);
double strain_norm_squared(const SpectralField& v);       // ||Dv||_2^2
double curl_sigma_norm_squared(const SpectralField& v);   // ||curl sigma(v)||_2^2

/// Norm-equivalence constants over the band. Every norm is diagonal in the
/// basis, so the extreme Rayleigh quotients are attained on basis fields.
struct BandConstants {
  double C_star;      // sup ||u||_H1^2 / ||u||_V^2
  double K_star;      // sup ||u||_H1^2 / ||Du||_2^2
  double C_starstar;  // inf ||u||_**^2 / ||u||_Wtilde^2
  double C_H2_W;      // sup ||u||_H2^2 / ||u||_W^2
  double C_H3_Wt;     // sup ||u||_H3^2 / ||u||_Wtilde^2
};
BandConstants band_constants(const Band& band);

/// Tensor-product midpoint rule on [0,1]^2 with Q nodes per direction plus
/// the 1D trigonometric tables of the basis. The midpoint sum of
/// cos(m pi x) vanishes for every integer m not divisible by 2Q, so all
/// parity-balanced products of band fields up to total frequency 2Q - 1 are
/// integrated exactly.
class SpectralGrid {
 public:
  /// Throws std::invalid_argument when Q < 2N + 1.
  SpectralGrid(const Band& band, int Q);

  const Band& band() const { return band_; }
  int Q() const { return Q_; }
  double node(int q) const { return (q + 0.5) / Q_; }
  double weight() const { return 1.0 / (static_cast<double>(Q_) * Q_); }

  /// Q x N table of d^order/dx^order of sin(j pi x) (sine = true) or
  /// cos(j pi x) at the nodes.
  const Eigen::MatrixXd& table(bool sine, int order) const;

  /// Derivative d^dx/dx^dx d^dy/dy^dy of velocity component `comp` (0 or 1)
  /// of the field with coefficients `c`, sampled on the grid (Q x Q, row =
  /// x node, column = y node).
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& c, int comp, int dx = 0, int dy = 0) const;

  /// Quadrature of f against d^dx d^dy of component `comp` of every basis
  /// field: out_i = sum_nodes w f (d^dx d^dy h_i,comp). This is the
  /// transpose of evaluate().
  Eigen::VectorXd project(const Eigen::MatrixXd& f, int comp, int dx = 0, int dy = 0) const;

 private:
  Band band_;
  int Q_;
  // tables_[sine][order], order 0..4
  std::vector<std::vector<Eigen::MatrixXd>> tables_;
  Eigen::MatrixXd amp_u_;  // N x N amplitude of component 0: c_norm * k pi
  Eigen::MatrixXd amp_v_;  // N x N amplitude of component 1: -c_norm * j pi
};

/// Velocity samples on the Q x Q midpoint grid.
struct PhysicalField {
  int Q = 0;
  Eigen::MatrixXd u;  // x-component
  Eigen::MatrixXd v;  // y-component
};

/// Evaluates v on the grid. Requires the grid's band to match the field.
PhysicalField to_physical(const SpectralField& v, const SpectralGrid& grid);
/// L2 projection of the sampled field onto the band.
SpectralField to_spectral(const PhysicalField& w, const SpectralGrid& grid);
/// Helmholtz/Leray projection restricted to the band: the L2-orthogonal
/// projection onto span{h_i}. Gradient fields are annihilated exactly by the
/// midpoint rule since each basis component carries a cosine factor.
SpectralField leray_project(const PhysicalField& w, const SpectralGrid& grid);

/// Velocity and its gradient at one point.
struct PointSample {
  double u = 0, v = 0;
  double ux = 0, uy = 0, vx = 0, vy = 0;
};
using VelocitySampler = std::function<PointSample(double x, double y)>;

PointSample sample_point(const SpectralField& f, double x, double y);

struct BoundaryReport {
  double normal_max = 0;  // max |v . n|
  double shear_max = 0;   // max |(n . Dv) . tau|
  double curl_max = 0;    // max |curl v|
  double max() const;
};

BoundaryReport boundary_diagnostics(const VelocitySampler& sampler, int samples_per_side = 64);
BoundaryReport boundary_diagnostics(const SpectralField& v, int samples_per_side = 64);

}  // namespace alphactl
