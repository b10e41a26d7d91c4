#pragma once

#include "galins/common.hpp"
#include "galins/gal3.hpp"
#include "galins/preintegration.hpp"

namespace galins {

/// Gain-driven observer for the relative frame between two rigid bodies when
/// the relative pose measurements arrive with a shared unknown latency. The
/// state is a single group element whose clock slot carries the believed
/// latency; the gain acts on the full 10-dim log residual.
struct ObserverState {
  Gal3 fHat = Gal3::Identity();
  Mat10 gain = 0.2 * Mat10::Identity();
};

/// Zero-innovation step. uA is the reference body's input sampled one latency
/// ago, uB the target body's current input; both carry the clock generator in
/// the last slot so the latency estimate is untouched by prediction.
ObserverState observerStep(const ObserverState& s, const Vec10& uA,
                           const Vec10& uB, double dt);

/// Log residual between a measured delayed relative pose (isochronous, clock
/// slot zero) and the estimate rolled back through the target body's
/// preintegration buffer at the believed latency. Zero when measurement,
/// latency, and estimate agree. The clock slot of the residual is
/// structurally zero: the buffer query age always matches the state's clock
/// slot, so their offsets cancel. May throw std::domain_error when the group
/// error's rotation approaches pi.
Vec10 observerResidual(const ObserverState& s, const Gal3& tMeas,
                       const PreintBuffer& bufB);

/// Left-applied innovation: fHat <- exp(gain * r) * fHat.
ObserverState observerCorrect(const ObserverState& s, const Vec10& r);

/// Current relative pose between the bodies, obtained by rolling the estimate
/// forward through the reference body's buffer. Isochronous by construction.
Gal3 observerCurrentPose(const ObserverState& s, const PreintBuffer& bufA);

}  // namespace galins
