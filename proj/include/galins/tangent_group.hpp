#pragma once

#include "galins/common.hpp"
#include "galins/gal3.hpp"

namespace galins {

/// Semidirect product of the Galilean group with its own Lie algebra,
/// (base, fiber) with fiber stored in vector coordinates. Composition is
///
///   (A, a) (B, b) = (A B, a + Ad_A b)
///
/// The 20-dimensional tangent splits as (base part 0..9, fiber part 10..19).
struct TangentGroup {
  Gal3 base;
  Vec10 fiber = Vec10::Zero();

  static TangentGroup Identity() { return TangentGroup{}; }

  TangentGroup operator*(const TangentGroup& o) const {
    return TangentGroup{base * o.base, fiber + base.Ad() * o.fiber};
  }

  TangentGroup inverse() const {
    const Gal3 bInv = base.inverse();
    return TangentGroup{bInv, -(bInv.Ad() * fiber)};
  }

  static TangentGroup exp(const Vec20& u);
  Vec20 log() const;
};

/// 20x20 algebra adjoint of the product group.
Mat20 adMatrix20(const Vec20& u);

/// Left Jacobian of the product-group exponential.
Mat20 leftJacobian20(const Vec20& u);

}  // namespace galins
