#include "alphactl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace alphactl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxOrder = 4;

double trig_derivative(bool sine, int order, double arg) {
  // d^order of sin / cos, up to the (j pi)^order factor.
  const int phase = ((sine ? 0 : 1) + order) % 4;
  switch (phase) {
    case 0: return std::sin(arg);
    case 1: return std::cos(arg);
    case 2: return -std::sin(arg);
    default: return -std::cos(arg);
  }
}

void require_same_band(const SpectralField& a, const SpectralField& b) {
  if (!(a.band() == b.band())) throw std::invalid_argument("spectral fields live on different bands");
}

Eigen::MatrixXd as_mode_matrix(const Eigen::VectorXd& c, int N) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(c.data(), N, N);
}

}  // namespace

BasisEigenvalues basis_eigenvalues(WaveIndex index, double alpha) {
  if (index.j < 1 || index.k < 1) throw std::domain_error("wave index components must be >= 1");
  const double lambda = kPi * kPi * (static_cast<double>(index.j) * index.j + static_cast<double>(index.k) * index.k);
  return {lambda, 2.0 + alpha * lambda};
}

double Band::lambda(int i) const {
  const WaveIndex w = wave(i);
  return kPi * kPi * (static_cast<double>(w.j) * w.j + static_cast<double>(w.k) * w.k);
}

void Band::validate() const {
  if (N < 1) throw std::invalid_argument("band cutoff N must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite and >= 0");
}

SpectralField::SpectralField(const Band& band) : band_(band), coeffs_(Eigen::VectorXd::Zero(band.size())) {}

SpectralField::SpectralField(const Band& band, Eigen::VectorXd coeffs) : band_(band), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != band_.size()) throw std::invalid_argument("coefficient vector does not match the band size");
}

SpectralField SpectralField::mode(const Band& band, WaveIndex w, double c) {
  if (w.j < 1 || w.k < 1 || w.j > band.N || w.k > band.N) throw std::domain_error("wave index outside the band");
  SpectralField f(band);
  f[band.index(w)] = c;
  return f;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_band(*this, o);
  coeffs_ += o.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_band(*this, o);
  coeffs_ -= o.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

Eigen::VectorXd laplacian_eigenvalues(const Band& band) {
  Eigen::VectorXd l(band.size());
  for (int i = 0; i < band.size(); ++i) l[i] = band.lambda(i);
  return l;
}

Eigen::VectorXd sigma_weights(const Band& band) {
  return (1.0 + band.alpha * laplacian_eigenvalues(band).array()).matrix();
}

SpectralField sigma_apply(const SpectralField& v) {
  return SpectralField(v.band(), (v.coeffs().array() * sigma_weights(v.band()).array()).matrix());
}

SpectralField sigma_inverse(const SpectralField& f) {
  return SpectralField(f.band(), (f.coeffs().array() / sigma_weights(f.band()).array()).matrix());
}

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::L2: return "L2";
    case NormKind::V: return "V";
    case NormKind::W: return "W";
    case NormKind::Wtilde: return "Wtilde";
    case NormKind::H1: return "H1";
    case NormKind::H2: return "H2";
    case NormKind::H3: return "H3";
  }
  return "?";
}

Eigen::VectorXd norm_weights(const Band& band, NormKind kind) {
  const Eigen::ArrayXd l = laplacian_eigenvalues(band).array();
  const Eigen::ArrayXd s = 1.0 + band.alpha * l;
  switch (kind) {
    case NormKind::L2: return Eigen::VectorXd::Ones(band.size());
    case NormKind::V: return s.matrix();
    case NormKind::W: return (s * s + s).matrix();
    case NormKind::Wtilde: return (s * s * l + s).matrix();
    case NormKind::H1: return (1.0 + l).matrix();
    case NormKind::H2: return (1.0 + l + l * l).matrix();
    case NormKind::H3: return (1.0 + l + l * l + l * l * l).matrix();
  }
  throw std::invalid_argument("unknown norm kind");
}

double norm_squared(const SpectralField& v, NormKind kind) {
  return (norm_weights(v.band(), kind).array() * v.coeffs().array().square()).sum();
}

double norm(const SpectralField& v, NormKind kind) { return std::sqrt(norm_squared(v, kind)); }

double inner(const SpectralField& a, const SpectralField& b, NormKind kind) {
  require_same_band(a, b);
  return (norm_weights(a.band(), kind).array() * a.coeffs().array() * b.coeffs().array()).sum();
}

double strain_norm_squared(const SpectralField& v) {
  // 2 ||Dv||^2 = ||grad v||^2 = sum lambda c^2 for tangent divergence-free fields.
  return 0.5 * (laplacian_eigenvalues(v.band()).array() * v.coeffs().array().square()).sum();
}

double curl_sigma_norm_squared(const SpectralField& v) {
  const Eigen::ArrayXd l = laplacian_eigenvalues(v.band()).array();
  const Eigen::ArrayXd s = 1.0 + v.band().alpha * l;
  return (s * s * l * v.coeffs().array().square()).sum();
}

double star_norm_squared(const SpectralField& v) {
  return 2.0 * v.band().alpha * strain_norm_squared(v) + curl_sigma_norm_squared(v);
}

BandConstants band_constants(const Band& band) {
  BandConstants out{0.0, 0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0};
  const double a = band.alpha;
  for (int i = 0; i < band.size(); ++i) {
    const double l = band.lambda(i);
    const double s = 1.0 + a * l;
    const double h1 = 1.0 + l;
    out.C_star = std::max(out.C_star, h1 / s);
    out.K_star = std::max(out.K_star, h1 / (0.5 * l));
    out.C_starstar = std::min(out.C_starstar, (a * l + s * s * l) / (s * s * l + s));
    out.C_H2_W = std::max(out.C_H2_W, (1.0 + l + l * l) / (s * s + s));
    out.C_H3_Wt = std::max(out.C_H3_Wt, (1.0 + l + l * l + l * l * l) / (s * s * l + s));
  }
  return out;
}

SpectralGrid::SpectralGrid(const Band& band, int Q) : band_(band), Q_(Q) {
  band_.validate();
  if (Q < 2 * band.N + 1) {
    throw std::invalid_argument("quadrature resolution Q=" + std::to_string(Q) + " is below 2N+1=" +
                                std::to_string(2 * band.N + 1));
  }
  const int N = band.N;
  tables_.assign(2, std::vector<Eigen::MatrixXd>(kMaxOrder + 1));
  for (int sine = 0; sine < 2; ++sine) {
    for (int order = 0; order <= kMaxOrder; ++order) {
      Eigen::MatrixXd t(Q, N);
      for (int q = 0; q < Q; ++q) {
        for (int j = 1; j <= N; ++j) {
          const double f = j * kPi;
          t(q, j - 1) = std::pow(f, order) * trig_derivative(sine == 1, order, f * node(q));
        }
      }
      tables_[sine][order] = std::move(t);
    }
  }
  amp_u_.resize(N, N);
  amp_v_.resize(N, N);
  for (int j = 1; j <= N; ++j) {
    for (int k = 1; k <= N; ++k) {
      const double a = 2.0 / std::sqrt(band.lambda(band.index({j, k})));
      amp_u_(j - 1, k - 1) = a * k * kPi;
      amp_v_(j - 1, k - 1) = -a * j * kPi;
    }
  }
}

const Eigen::MatrixXd& SpectralGrid::table(bool sine, int order) const {
  if (order < 0 || order > kMaxOrder) throw std::out_of_range("derivative order outside the table range");
  return tables_[sine ? 1 : 0][order];
}

Eigen::MatrixXd SpectralGrid::evaluate(const Eigen::VectorXd& c, int comp, int dx, int dy) const {
  const bool x_sine = comp == 0;
  const Eigen::MatrixXd C = as_mode_matrix(c, band_.N).cwiseProduct(comp == 0 ? amp_u_ : amp_v_);
  return table(x_sine, dx) * C * table(!x_sine, dy).transpose();
}

Eigen::VectorXd SpectralGrid::project(const Eigen::MatrixXd& f, int comp, int dx, int dy) const {
  const bool x_sine = comp == 0;
  const Eigen::MatrixXd P =
      (table(x_sine, dx).transpose() * f * table(!x_sine, dy)).cwiseProduct(comp == 0 ? amp_u_ : amp_v_) * weight();
  Eigen::VectorXd out(band_.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out.data(), band_.N, band_.N) = P;
  return out;
}

PhysicalField to_physical(const SpectralField& v, const SpectralGrid& grid) {
  if (!(v.band().N == grid.band().N)) throw std::invalid_argument("field band does not match the grid band");
  return {grid.Q(), grid.evaluate(v.coeffs(), 0), grid.evaluate(v.coeffs(), 1)};
}

SpectralField to_spectral(const PhysicalField& w, const SpectralGrid& grid) {
  if (w.Q != grid.Q() || w.u.rows() != grid.Q() || w.u.cols() != grid.Q() || w.v.rows() != grid.Q() ||
      w.v.cols() != grid.Q()) {
    throw std::invalid_argument("physical field resolution does not match the grid");
  }
  return SpectralField(grid.band(), grid.project(w.u, 0) + grid.project(w.v, 1));
}

SpectralField leray_project(const PhysicalField& w, const SpectralGrid& grid) { return to_spectral(w, grid); }

PointSample sample_point(const SpectralField& f, double x, double y) {
  const Band& band = f.band();
  PointSample s;
  for (int i = 0; i < band.size(); ++i) {
    const double c = f[i];
    if (c == 0.0) continue;
    const WaveIndex w = band.wave(i);
    const double a = 2.0 / std::sqrt(band.lambda(i)) * c;
    const double jp = w.j * kPi, kp = w.k * kPi;
    const double sx = std::sin(jp * x), cx = std::cos(jp * x);
    const double sy = std::sin(kp * y), cy = std::cos(kp * y);
    // u = a kp sx cy, v = -a jp cx sy
    s.u += a * kp * sx * cy;
    s.v += -a * jp * cx * sy;
    s.ux += a * kp * jp * cx * cy;
    s.uy += -a * kp * kp * sx * sy;
    s.vx += a * jp * jp * sx * sy;
    s.vy += -a * jp * kp * cx * cy;
  }
  return s;
}

double BoundaryReport::max() const { return std::max({normal_max, shear_max, curl_max}); }

BoundaryReport boundary_diagnostics(const VelocitySampler& sampler, int samples_per_side) {
  BoundaryReport r;
  auto visit = [&](double x, double y, bool vertical_side) {
    const PointSample s = sampler(x, y);
    r.normal_max = std::max(r.normal_max, std::abs(vertical_side ? s.u : s.v));
    // On every side of the square (n . Dv) . tau = +-D_12.
    r.shear_max = std::max(r.shear_max, std::abs(0.5 * (s.uy + s.vx)));
    r.curl_max = std::max(r.curl_max, std::abs(s.vx - s.uy));
  };
  for (int i = 0; i < samples_per_side; ++i) {
    const double t = (i + 0.5) / samples_per_side;
    visit(0.0, t, true);
    visit(1.0, t, true);
    visit(t, 0.0, false);
    visit(t, 1.0, false);
  }
  return r;
}

BoundaryReport boundary_diagnostics(const SpectralField& v, int samples_per_side) {
  return boundary_diagnostics([&v](double x, double y) { return sample_point(v, x, y); }, samples_per_side);
}

}  // namespace alphactl
