#include "galins/tangent_group.hpp"

namespace galins {

TangentGroup TangentGroup::exp(const Vec20& u) {
  const Vec10 ub = u.segment<10>(0);
  return TangentGroup{Gal3::exp(ub), leftJacobian(ub) * u.segment<10>(10)};
}

Vec20 TangentGroup::log() const {
  const Vec10 ub = base.log();
  Vec20 out;
  out.segment<10>(0) = ub;
  out.segment<10>(10) = leftJacobianApplyInv(ub, fiber);
  return out;
}

Mat20 adMatrix20(const Vec20& u) {
  Mat20 ad = Mat20::Zero();
  const Mat10 adBase = adMatrix(u.segment<10>(0));
  ad.block<10, 10>(0, 0) = adBase;
  ad.block<10, 10>(10, 10) = adBase;
  ad.block<10, 10>(10, 0) = adMatrix(u.segment<10>(10));
  return ad;
}

Mat20 leftJacobian20(const Vec20& u) {
  const Mat20 ad = adMatrix20(u);
  Mat20 sum = Mat20::Identity();
  Mat20 term = Mat20::Identity();
  for (int k = 1; k <= 30; ++k) {
    term = (term * ad) / double(k + 1);
    sum += term;
    if (term.norm() < 1e-14) break;
  }
  return sum;
}

}  // namespace galins
