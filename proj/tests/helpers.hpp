#pragma once

#include "alphactl/spectral.hpp"

#include <cmath>
#include <random>

namespace testutil {

inline alphactl::SpectralField random_field(const alphactl::Band& band, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal;
  alphactl::SpectralField f(band);
  for (int i = 0; i < f.size(); ++i) f[i] = scale * normal(rng);
  return f;
}

inline double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

inline const double kPi = std::acos(-1.0);

}  // namespace testutil
