#pragma once

#include <cmath>
#include <span>

namespace edchrom {

inline constexpr double kDefaultWenoEpsilon = 1e-6;

/// Fifth-order WENO (Jiang-Shu weights, power 2) reconstruction at the right
/// face of the centre cell from the cell averages f[0..4] of cells j-2..j+2.
inline double weno5_left(std::span<const double, 5> f, double epsilon = kDefaultWenoEpsilon) {
  const double q0 = (2.0 * f[0] - 7.0 * f[1] + 11.0 * f[2]) / 6.0;
  const double q1 = (-f[1] + 5.0 * f[2] + 2.0 * f[3]) / 6.0;
  const double q2 = (2.0 * f[2] + 5.0 * f[3] - f[4]) / 6.0;

  const double d0 = f[0] - 2.0 * f[1] + f[2];
  const double e0 = f[0] - 4.0 * f[1] + 3.0 * f[2];
  const double d1 = f[1] - 2.0 * f[2] + f[3];
  const double e1 = f[1] - f[3];
  const double d2 = f[2] - 2.0 * f[3] + f[4];
  const double e2 = 3.0 * f[2] - 4.0 * f[3] + f[4];
  const double beta0 = 13.0 / 12.0 * d0 * d0 + 0.25 * e0 * e0;
  const double beta1 = 13.0 / 12.0 * d1 * d1 + 0.25 * e1 * e1;
  const double beta2 = 13.0 / 12.0 * d2 * d2 + 0.25 * e2 * e2;

  const double s0 = epsilon + beta0;
  const double s1 = epsilon + beta1;
  const double s2 = epsilon + beta2;
  const double a0 = 0.1 / (s0 * s0);
  const double a1 = 0.6 / (s1 * s1);
  const double a2 = 0.3 / (s2 * s2);
  return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2);
}

/// Mirror image of weno5_left: weno5_right(x1..x5) = weno5_left(x5..x1).
/// Reconstructs at the left face of the centre cell.
inline double weno5_right(std::span<const double, 5> f, double epsilon = kDefaultWenoEpsilon) {
  const double mirrored[5] = {f[4], f[3], f[2], f[1], f[0]};
  return weno5_left(std::span<const double, 5>(mirrored), epsilon);
}

inline double minmod(double a, double b) {
  const double sa = (a > 0.0) - (a < 0.0);
  const double sb = (b > 0.0) - (b < 0.0);
  return 0.5 * (sa + sb) * std::min(std::abs(a), std::abs(b));
}

}  // namespace edchrom
