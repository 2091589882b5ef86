#pragma once

// Exponential integrals on a unit segment, written so that small and large
// rates are both handled without cancellation.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace rpde::expint {

/// (1 - e^{-z}) / z, with value 1 at z = 0.
inline double phi1(double z) {
  if (std::abs(z) < 1e-300) return 1.0;
  return -std::expm1(-z) / z;
}

/// int_0^1 e^{-z u} u^k du for k = 0, 1, 2 and z >= 0.
inline double moment(int k, double z) {
  if (z < 2.0) {
    // alternating series, terms bounded by 2^n / n!
    double term = 1.0, sum = 0.0;
    for (int n = 0; n < 60; ++n) {
      const double add = term / static_cast<double>(n + k + 1);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
      term *= -z / static_cast<double>(n + 1);
    }
    return sum;
  }
  const double ez = std::exp(-z);
  double j = -std::expm1(-z) / z;
  for (int i = 1; i <= k; ++i) j = (static_cast<double>(i) * j - ez) / z;
  return j;
}

/// int_0^1 e^{-a u - b (1 - u)} du; symmetric in (a, b).
inline double psi(double a, double b) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  return std::exp(-lo) * phi1(hi - lo);
}

/// int over 0 <= q <= u <= 1 of e^{-b q} e^{-a (1 - u)} dq du.
///
/// The (0, 2) entry of exp of the bidiagonal matrix with diagonal (-b, 0, -a).
inline double chi(double a, double b) {
  if (a == 0.0 && b == 0.0) return 0.5;
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(0, 0) = -b;
  m(2, 2) = -a;
  m(0, 1) = 1.0;
  m(1, 2) = 1.0;
  const Eigen::Matrix3d e = m.exp();
  return e(0, 2);
}

}  // namespace rpde::expint
