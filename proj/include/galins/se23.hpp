#pragma once

#include "galins/common.hpp"
#include "galins/gal3.hpp"
#include "galins/so3.hpp"

namespace galins {

/// Extended pose (rotation, velocity, position): the isochronous slice of the
/// Galilean group, i.e. a Gal3 element with zero clock offset. Tangent order
/// is (theta, nu, rho).
struct Se23 {
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 p = Vec3::Zero();

  static Se23 Identity() { return Se23{}; }

  Se23 operator*(const Se23& o) const {
    return Se23{R * o.R, R * o.v + v, R * o.p + p};
  }

  Se23 inverse() const {
    Se23 out;
    out.R = R.transpose();
    out.v = -(out.R * v);
    out.p = -(out.R * p);
    return out;
  }

  Gal3 asGal3() const { return Gal3{R, v, p, 0.0}; }

  static Se23 fromGal3(const Gal3& g) { return Se23{g.R, g.v, g.p}; }

  static Se23 exp(const Vec9& u) {
    const Vec3 theta = u.segment<3>(0);
    const Mat3 jl = so3LeftJacobian(theta);
    return Se23{so3Exp(theta), jl * u.segment<3>(3), jl * u.segment<3>(6)};
  }

  Vec9 log() const {
    const Vec3 theta = so3Log(R);
    const Mat3 jlInv = so3LeftJacobianInv(theta);
    Vec9 u;
    u << theta, jlInv * v, jlInv * p;
    return u;
  }

  Mat9 Ad() const {
    Mat9 ad = Mat9::Zero();
    ad.block<3, 3>(0, 0) = R;
    ad.block<3, 3>(3, 0) = skew(v) * R;
    ad.block<3, 3>(3, 3) = R;
    ad.block<3, 3>(6, 0) = skew(p) * R;
    ad.block<3, 3>(6, 6) = R;
    return ad;
  }
};

}  // namespace galins
