#pragma once

#include <Eigen/Dense>

#include "galins/common.hpp"
#include "galins/gal3.hpp"
#include "galins/preintegration.hpp"
#include "galins/se23.hpp"

namespace galins {

/// How the baseline filter treats the sensing delay of position fixes.
enum class DelayHandling {
  None,    ///< fixes assumed instantaneous
  Fixed,   ///< compensate a known constant delay
  Online,  ///< estimate the delay as a 16th state
};

struct EkfConfig {
  DelayHandling delayMode = DelayHandling::Online;
  /// Delay compensated in Fixed mode (ignored otherwise).
  double fixedDelay = 0.0;

  // Continuous-time noise densities.
  double gyroDensity = 0.005;
  double accelDensity = 0.05;
  double gyroWalkDensity = 1e-4;
  double accelWalkDensity = 1e-4;
  /// Random-walk density of the delay state in Online mode.
  double delayWalkDensity = 1e-3;

  Mat3 measurementNoise = Mat3::Identity();
  Vec3 leverArm = Vec3::Zero();
  /// Gravity direction in the algebra (gravityTangent).
  Vec10 gN = Vec10::Zero();
  double bufferHorizon = 0.8;
  double imuDt = 0.005;
};

struct EkfState {
  Se23 pose;
  Vec6 bias = Vec6::Zero();  ///< gyro stacked over accelerometer
  double delay = 0.0;
};

/// Extended Kalman filter on the extended pose with additive bias states,
/// in the three delay-handling variants. The error convention is
///
///   eps = ( se23Log(T_true * T_hat^{-1}), b_true - b_hat, delay_true - delay_hat )
///
/// with the last slot present only in Online mode. The pose mean propagates
/// through the exact discrete step; delayed fixes are predicted by rolling
/// the estimate back through the preintegration window.
class Ekf {
 public:
  Ekf(const EkfState& init, const Eigen::MatrixXd& sigmaInit,
      const EkfConfig& cfg);

  void propagate(const Vec3& omega, const Vec3& accel, double dt);
  void update(const Vec3& y);

  const EkfState& state() const { return state_; }
  const Eigen::MatrixXd& covariance() const { return sigma_; }
  double delayEstimate() const { return state_.delay; }
  const Se23& navigationEstimate() const { return state_.pose; }
  /// 9 + 6 (+1 in Online mode).
  int errorDim() const { return dim_; }
  /// Estimation error of a reference state in this filter's convention.
  Eigen::VectorXd errorVector(const Se23& poseTrue, const Vec6& biasTrue,
                              double delayTrue) const;
  const PreintBuffer& buffer() const { return buf_; }
  double time() const { return t_; }
  int clampedUpdates() const { return clampedUpdates_; }

  /// Linearized one-step error propagation, exposed for verification:
  /// eps+ = A eps + B eta with eta = (input noise 6, bias walk 6[, delay
  /// walk 1]).
  struct Jacobians {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
  };
  Jacobians propagationJacobians(const Vec3& omega, const Vec3& accel,
                                 double dt) const;

  /// Residual linearization at the current state through the queried
  /// preintegration element, exposed for verification.
  Eigen::MatrixXd outputMatrix(const Gal3& upsilon,
                               const Vec3& omegaAtDelay) const;
  Vec3 predictMeasurement(const Gal3& upsilon) const;

 private:
  void checkHealth(const char* where) const;
  Vec10 correctedInput(const Vec3& omega, const Vec3& accel) const;

  EkfState state_;
  Eigen::MatrixXd sigma_;
  EkfConfig cfg_;
  PreintBuffer buf_;
  int dim_;
  double t_ = 0.0;
  int clampedUpdates_ = 0;
};

}  // namespace galins
