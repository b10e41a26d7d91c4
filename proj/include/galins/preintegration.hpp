#pragma once

#include <deque>
#include <vector>

#include "galins/common.hpp"
#include "galins/gal3.hpp"

namespace galins {

struct ImuSample {
  double t = 0.0;
  Vec3 omega = Vec3::Zero();
  Vec3 accel = Vec3::Zero();
};

/// Uniformly sampled IMU segment, oldest sample first.
struct ImuWindow {
  double dt = 0.0;
  std::vector<ImuSample> samples;
};

/// IMU tangent direction: rotation rate and specific force, with the clock
/// generator folded into the last slot.
inline Vec10 imuTangent(const Vec3& omega, const Vec3& accel) {
  return galTangent(omega, accel, Vec3::Zero(), 1.0);
}

/// Navigation-frame gravity direction (earth rate, minus gravity, clock
/// generator). gravity is the world-frame acceleration, (0,0,-9.81) by
/// default convention.
inline Vec10 gravityTangent(const Vec3& gravity, const Vec3& earthRate = Vec3::Zero()) {
  return galTangent(earthRate, -gravity, Vec3::Zero(), 1.0);
}

/// Relative motion accumulated by the frame that counteracts gravity over a
/// span delta: exp(delta * gravityTangent).
Gal3 earthPreintegration(double delta, const Vec10& gN);

struct PreintQuery {
  Gal3 element;
  Vec3 omega = Vec3::Zero();  ///< gyro sample of the cell containing the age
  bool clamped = false;
};

/// Sliding window of body-frame preintegration factors indexed by age.
/// After n steps the stored entries sit at ages dt..min(n,K)*dt and the
/// element at age zero is the implicit identity. Each propagate costs one
/// exponential plus one composition per stored entry; memory is bounded by
/// ceil(horizon/dt)+1 entries.
class PreintBuffer {
 public:
  PreintBuffer(double horizon, double dt);

  /// Right-multiplies every entry by exp(wCorrected*dt) and starts a fresh
  /// one. wCorrected is the bias-corrected IMU tangent; its clock slot must
  /// be exactly 1 so entry ages and clock offsets stay aligned.
  void propagate(const Vec10& wCorrected, double dt);

  /// Geodesic interpolation at an arbitrary age. Ages outside [0, maxAge()]
  /// are clamped and flagged. Ages on the sample grid return the stored
  /// entry unchanged.
  PreintQuery query(double delta) const;

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double maxAge() const { return entries_.empty() ? 0.0 : entries_.back().steps * dt_; }
  double dt() const { return dt_; }
  double horizon() const { return horizon_; }
  void clear() { entries_.clear(); }

  /// Entry age and clock offset for invariant checks.
  std::vector<std::pair<double, double>> agesAndClocks() const;

 private:
  struct Entry {
    int steps;   // age in sample periods
    Gal3 ups;
    Vec3 omega;  // gyro sample that opened this entry
  };
  std::deque<Entry> entries_;  // front newest (steps=1), back oldest
  double horizon_;
  double dt_;
  int maxSteps_;
};

/// One-shot preintegration over the most recent ceil(delta/dt) samples of a
/// uniform window, with a constant bias removed. bias uses the 10-dim layout;
/// its clock slot must be zero.
Gal3 batchPreintegrate(const ImuWindow& window, double delta, const Vec10& bias);

}  // namespace galins
