#include "galins/twobody.hpp"

namespace galins {

ObserverState observerStep(const ObserverState& s, const Vec10& uA,
                           const Vec10& uB, double dt) {
  ObserverState out = s;
  out.fHat = Gal3::exp(-uA * dt) * s.fHat * Gal3::exp(uB * dt);
  out.fHat.normalizeRotation();
  return out;
}

Vec10 observerResidual(const ObserverState& s, const Gal3& tMeas,
                       const PreintBuffer& bufB) {
  const Gal3 ups = bufB.query(s.fHat.t).element;
  return (tMeas * ups * s.fHat.inverse()).log();
}

ObserverState observerCorrect(const ObserverState& s, const Vec10& r) {
  ObserverState out = s;
  out.fHat = Gal3::exp(s.gain * r) * s.fHat;
  out.fHat.normalizeRotation();
  return out;
}

Gal3 observerCurrentPose(const ObserverState& s, const PreintBuffer& bufA) {
  return bufA.query(s.fHat.t).element.inverse() * s.fHat;
}

}  // namespace galins
