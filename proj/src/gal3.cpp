#include "galins/gal3.hpp"

#include <Eigen/Geometry>

namespace galins {

Gal3 Gal3::operator*(const Gal3& o) const {
  Gal3 out;
  out.R = R * o.R;
  out.v = R * o.v + v;
  out.p = R * o.p + v * o.t + p;
  out.t = t + o.t;
  return out;
}

Gal3 Gal3::inverse() const {
  Gal3 out;
  out.R = R.transpose();
  out.v = -(out.R * v);
  out.p = -(out.R * (p - t * v));
  out.t = -t;
  return out;
}

Mat5 Gal3::matrix() const {
  Mat5 m = Mat5::Identity();
  m.block<3, 3>(0, 0) = R;
  m.block<3, 1>(0, 3) = v;
  m.block<3, 1>(0, 4) = p;
  m(3, 4) = t;
  return m;
}

Gal3 Gal3::fromMatrix(const Mat5& m) {
  Gal3 out;
  out.R = m.block<3, 3>(0, 0);
  out.v = m.block<3, 1>(0, 3);
  out.p = m.block<3, 1>(0, 4);
  out.t = m(3, 4);
  return out;
}

Gal3 Gal3::exp(const Vec10& u) {
  const Vec3 theta = u.segment<3>(0);
  const Vec3 nu = u.segment<3>(3);
  const Vec3 rho = u.segment<3>(6);
  const double tau = u(9);
  const Mat3 jl = so3LeftJacobian(theta);
  Gal3 out;
  out.R = so3Exp(theta);
  out.v = jl * nu;
  out.p = jl * rho + tau * (so3Gamma(theta) * nu);
  out.t = tau;
  return out;
}

Vec10 Gal3::log() const {
  const Vec3 theta = so3Log(R);
  const Mat3 jlInv = so3LeftJacobianInv(theta);
  const Vec3 nu = jlInv * v;
  const Vec3 rho = jlInv * (p - t * (so3Gamma(theta) * nu));
  return galTangent(theta, nu, rho, t);
}

Mat10 Gal3::Ad() const {
  Mat10 ad = Mat10::Zero();
  ad.block<3, 3>(0, 0) = R;
  ad.block<3, 3>(3, 0) = skew(v) * R;
  ad.block<3, 3>(3, 3) = R;
  ad.block<3, 3>(6, 0) = skew(p - t * v) * R;
  ad.block<3, 3>(6, 3) = -t * R;
  ad.block<3, 3>(6, 6) = R;
  ad.block<3, 1>(6, 9) = v;
  ad(9, 9) = 1.0;
  return ad;
}

void Gal3::normalizeRotation() {
  Eigen::Quaterniond q(R);
  R = q.normalized().toRotationMatrix();
}

Mat5 wedge(const Vec10& u) {
  Mat5 m = Mat5::Zero();
  m.block<3, 3>(0, 0) = skew(u.segment<3>(0));
  m.block<3, 1>(0, 3) = u.segment<3>(3);
  m.block<3, 1>(0, 4) = u.segment<3>(6);
  m(3, 4) = u(9);
  return m;
}

Vec10 vee(const Mat5& m) {
  return galTangent(unskew(m.block<3, 3>(0, 0)), m.block<3, 1>(0, 3),
                    m.block<3, 1>(0, 4), m(3, 4));
}

Mat10 adMatrix(const Vec10& u) {
  Mat10 ad = Mat10::Zero();
  const Mat3 wTheta = skew(u.segment<3>(0));
  ad.block<3, 3>(0, 0) = wTheta;
  ad.block<3, 3>(3, 0) = skew(u.segment<3>(3));
  ad.block<3, 3>(3, 3) = wTheta;
  ad.block<3, 3>(6, 0) = skew(u.segment<3>(6));
  ad.block<3, 3>(6, 3) = -u(9) * Mat3::Identity();
  ad.block<3, 3>(6, 6) = wTheta;
  ad.block<3, 1>(6, 9) = u.segment<3>(3);
  return ad;
}

namespace {

// Truncated series sum_k M^k / (k+1)! with a hard cap; terms of a nilpotent
// or small argument die off long before the cap.
template <typename Mat>
Mat expSeriesJacobian(const Mat& m) {
  Mat sum = Mat::Identity();
  Mat term = Mat::Identity();
  for (int k = 1; k <= 30; ++k) {
    term = (term * m) / double(k + 1);
    sum += term;
    if (term.norm() < 1e-14) break;
  }
  return sum;
}

}  // namespace

Mat10 leftJacobian(const Vec10& u) { return expSeriesJacobian<Mat10>(adMatrix(u)); }

Vec10 leftJacobianApplyInv(const Vec10& u, const Vec10& w) {
  return leftJacobian(u).partialPivLu().solve(w);
}

}  // namespace galins
