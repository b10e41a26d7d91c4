#pragma once

#include <cmath>
#include <stdexcept>

#include "galins/common.hpp"

namespace galins {

// Angle below which the trigonometric coefficients switch to their Taylor
// expansions to avoid catastrophic cancellation.
constexpr double kSmallAngle = 1e-6;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

inline Vec3 unskew(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

inline Mat3 so3Exp(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 w = skew(theta);
  double a, b;
  if (angle < kSmallAngle) {
    const double s = angle * angle;
    a = 1.0 - s / 6.0;
    b = 0.5 - s / 24.0;
  } else {
    a = std::sin(angle) / angle;
    b = (1.0 - std::cos(angle)) / (angle * angle);
  }
  return Mat3::Identity() + a * w + b * w * w;
}

/// Rotation-vector logarithm. Rejects rotations close to the branch cut at
/// angle pi where the axis is not recoverable to working precision.
inline Vec3 so3Log(const Mat3& r) {
  const double cosAngle = 0.5 * (r.trace() - 1.0);
  const double c = std::min(1.0, std::max(-1.0, cosAngle));
  const double angle = std::acos(c);
  if (angle > M_PI - 1e-5) {
    throw std::domain_error("so3Log: rotation angle within 1e-5 of pi, branch ambiguous");
  }
  const Vec3 w = unskew(r - r.transpose());
  if (angle < kSmallAngle) {
    // R - R^T = 2 sin(angle) axis^, and sin(angle)/angle ~ 1.
    return 0.5 * (1.0 + angle * angle / 6.0) * w;
  }
  return (0.5 * angle / std::sin(angle)) * w;
}

inline Mat3 so3LeftJacobian(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 w = skew(theta);
  double a, b;
  if (angle < kSmallAngle) {
    const double s = angle * angle;
    a = 0.5 - s / 24.0;
    b = 1.0 / 6.0 - s / 120.0;
  } else {
    const double s = angle * angle;
    a = (1.0 - std::cos(angle)) / s;
    b = (angle - std::sin(angle)) / (s * angle);
  }
  return Mat3::Identity() + a * w + b * w * w;
}

inline Mat3 so3LeftJacobianInv(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 w = skew(theta);
  double b;
  if (angle < kSmallAngle) {
    b = 1.0 / 12.0 + angle * angle / 720.0;
  } else {
    b = 1.0 / (angle * angle) -
        0.5 * (1.0 + std::cos(angle)) / (angle * std::sin(angle));
  }
  return Mat3::Identity() - 0.5 * w + b * w * w;
}

/// Second-order integral coefficient matrix, the series sum_k W^k / (k+2)!.
/// Shows up when a velocity-like column is dragged through a rotating frame.
inline Mat3 so3Gamma(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 w = skew(theta);
  double a, b;
  if (angle < kSmallAngle) {
    const double s = angle * angle;
    a = 1.0 / 6.0 - s / 120.0;
    b = 1.0 / 24.0 - s / 720.0;
  } else {
    const double s = angle * angle;
    a = (angle - std::sin(angle)) / (s * angle);
    b = (0.5 * s + std::cos(angle) - 1.0) / (s * s);
  }
  return 0.5 * Mat3::Identity() + a * w + b * w * w;
}

}  // namespace galins
