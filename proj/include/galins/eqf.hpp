#pragma once

#include <Eigen/Dense>

#include "galins/common.hpp"
#include "galins/gal3.hpp"
#include "galins/preintegration.hpp"
#include "galins/se23.hpp"
#include "galins/tangent_group.hpp"

namespace galins {

/// State of the delayed-navigation system. `F` is the cross-frame extended
/// pose: its clock slot carries the sensing delay, and Gamma(delta)^{-1} * F
/// recovers the isochronous earth-frame pose. `b` stacks the gyro bias, the
/// accelerometer bias, and the two virtual bias channels for the rho and
/// clock slots, in tangent order.
struct SystemState {
  Gal3 F = Gal3::Identity();
  Vec10 b = Vec10::Zero();
};

/// One input to the system: `wN` is the inertial reading embedded in the
/// algebra (imuTangent), `tauRw` the bias rates. Filters run with tauRw = 0;
/// the truth model uses it to realize bias random walks.
struct InputSample {
  Vec10 wN = Vec10::Zero();
  Vec10 tauRw = Vec10::Zero();
};

// --- Symmetry machinery -----------------------------------------------------
//
// The symmetry group is the tangent group of Gal(3) acting on the right:
//   stateAction(X * Y, xi) == stateAction(Y, stateAction(X, xi)).
// originState() is the fixed reference point and originPhiInverse(xi) gives
// the unique group element mapping the origin to xi.

SystemState stateAction(const TangentGroup& X, const SystemState& xi);
SystemState originState();
TangentGroup originPhiInverse(const SystemState& xi);

/// Exact flow of the system over one step of length dt under constant input.
/// gN is the gravity direction in the algebra (gravityTangent).
SystemState systemStep(const SystemState& xi, const InputSample& u, double dt,
                       const Vec10& gN);

/// Group-valued lift of the input at xi. Propagating the group state by
/// right-multiplication with the lift reproduces systemStep through the
/// action:
///   stateAction(originPhiInverse(xi) * lift(xi, u, dt, gN), originState())
///     == systemStep(xi, u, dt, gN).
TangentGroup lift(const SystemState& xi, const InputSample& u, double dt,
                  const Vec10& gN);

/// Normal coordinates of the estimation error at the origin: zero iff
/// xi == stateAction(xhat, originState()).
Vec20 errorCoordinates(const TangentGroup& xhat, const SystemState& xi);

/// Linearized propagation of the error coordinates over one step:
///   eps+ ~= A eps + B eta
/// where eta stacks input noise (10) and bias-rate noise (10). wMeas is the
/// measured inertial input embedded in the algebra.
struct PropagationJacobians {
  Mat20 a = Mat20::Identity();
  Mat20 b = Mat20::Zero();
};
PropagationJacobians propagationJacobians(const TangentGroup& xhat,
                                          const Vec10& wMeas, const Vec10& gN,
                                          double dt);

using Mat3x20 = Eigen::Matrix<double, 3, 20>;

/// Predicted position fix: the antenna event (p0 at clock zero) carried from
/// the delayed frame to the arrival frame by upsilon^{-1}, then through the
/// cross-frame pose xf.
Vec3 measurementPrediction(const Gal3& xf, const Gal3& upsilon, const Vec3& p0);

/// Linearization of the residual in the error coordinates. omegaAtDelay is
/// the angular rate of the preintegration interpolant at the queried delay.
Mat3x20 outputMatrix(const Gal3& xf, const Gal3& upsilon,
                     const Vec3& omegaAtDelay, const Vec3& p0);

// --- Filter ------------------------------------------------------------------

struct EqfConfig {
  /// Continuous-time noise densities, squared, on the 20 error channels:
  /// inertial input (10) then bias rates (10).
  Mat20 processNoise = Mat20::Zero();
  /// Position fix covariance.
  Mat3 measurementNoise = Mat3::Identity();
  /// Antenna offset in the body frame.
  Vec3 leverArm = Vec3::Zero();
  /// Gravity direction in the algebra (gravityTangent).
  Vec10 gN = Vec10::Zero();
  /// Believed-delay random-walk density. A delay error moves the error state
  /// along gN, so this density is injected on that direction, not on the bare
  /// clock slot.
  double delayWalkDensity = 0.0;
  /// Preintegration window length in seconds: the largest delay the filter
  /// can compensate.
  double bufferHorizon = 0.8;
  /// Nominal inertial sample period.
  double imuDt = 0.005;
};

/// Diagonal process-noise builder from per-channel densities. The rho and
/// clock slots of the input block carry no physical noise.
Mat20 processNoiseDiagonal(double gyroDensity, double accelDensity,
                           double gyroWalkDensity, double accelWalkDensity,
                           double virtualWalkDensity);

/// Equivariant filter on the tangent group. Covariance is tracked in the
/// normal error coordinates; the update transports it through the
/// post-update change of coordinates before applying the correction.
class Eqf {
 public:
  Eqf(const SystemState& init, const Mat20& sigmaInit, const EqfConfig& cfg);

  /// One inertial step: covariance through the linearized error dynamics,
  /// group state through the lift, preintegration buffer through the
  /// bias-corrected input.
  void propagate(const InputSample& u, double dt);

  /// One position fix. Throws FilterDivergence if the innovation covariance
  /// is not invertible or the state leaves the healthy set.
  void update(const Vec3& y);

  SystemState estimate() const;
  double delayEstimate() const;
  /// Isochronous earth-frame pose at the current time.
  Se23 navigationEstimate() const;

  const TangentGroup& groupState() const { return x_; }
  const Mat20& covariance() const { return sigma_; }
  const PreintBuffer& buffer() const { return buf_; }
  double time() const { return t_; }
  /// Number of updates whose queried delay fell outside the buffered window.
  int clampedUpdates() const { return clampedUpdates_; }

 private:
  void checkHealth(const char* where) const;

  TangentGroup x_;
  Mat20 sigma_;
  EqfConfig cfg_;
  PreintBuffer buf_;
  double t_ = 0.0;
  int clampedUpdates_ = 0;
};

}  // namespace galins
