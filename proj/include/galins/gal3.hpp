#pragma once

#include "galins/common.hpp"
#include "galins/so3.hpp"

namespace galins {

/// Element of the 10-dimensional Galilean matrix group acting on
/// (position, time) events. Stored as rotation R, velocity column v,
/// position column p and clock offset t of the 5x5 homogeneous form
///
///   [ R  v  p ]
///   [ 0  1  t ]
///   [ 0  0  1 ]
///
/// Tangent vectors are ordered (theta, nu, rho, tau).
struct Gal3 {
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  double t = 0.0;

  static Gal3 Identity() { return Gal3{}; }

  Gal3 operator*(const Gal3& o) const;
  Gal3 inverse() const;

  Mat5 matrix() const;
  static Gal3 fromMatrix(const Mat5& m);

  /// Closed-form exponential of wedge(u).
  static Gal3 exp(const Vec10& u);

  /// Inverse of exp. Throws std::domain_error near rotation angle pi.
  Vec10 log() const;

  /// 10x10 adjoint matrix, block order (theta, nu, rho, tau).
  Mat10 Ad() const;

  /// Transform an event: point at position x observed s seconds ago maps to
  /// R x + v s + p with clock reading s + t.
  Vec3 actPoint(const Vec3& x, double s = 0.0) const { return R * x + v * s + p; }

  /// Re-orthonormalize the rotation block (guards slow drift when an element
  /// is updated many thousands of times).
  void normalizeRotation();
};

Mat5 wedge(const Vec10& u);
Vec10 vee(const Mat5& m);

/// Algebra adjoint: ad(u) w = [wedge(u), wedge(w)] as a 10x10 matrix.
Mat10 adMatrix(const Vec10& u);

/// Left Jacobian of the exponential, sum_k ad(u)^k / (k+1)!.
Mat10 leftJacobian(const Vec10& u);

/// Solves leftJacobian(u) x = w.
Vec10 leftJacobianApplyInv(const Vec10& u, const Vec10& w);

inline Vec10 galTangent(const Vec3& theta, const Vec3& nu, const Vec3& rho, double tau) {
  Vec10 u;
  u << theta, nu, rho, tau;
  return u;
}

}  // namespace galins
