#include "galins/ekf.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "galins/so3.hpp"

namespace galins {

namespace {

int errorDimFor(DelayHandling mode) {
  return mode == DelayHandling::Online ? 16 : 15;
}

int noiseDimFor(DelayHandling mode) {
  return mode == DelayHandling::Online ? 13 : 12;
}

}  // namespace

Ekf::Ekf(const EkfState& init, const Eigen::MatrixXd& sigmaInit,
         const EkfConfig& cfg)
    : state_(init),
      sigma_(sigmaInit),
      cfg_(cfg),
      buf_(cfg.bufferHorizon, cfg.imuDt),
      dim_(errorDimFor(cfg.delayMode)) {
  if (sigmaInit.rows() != dim_ || sigmaInit.cols() != dim_) {
    throw std::invalid_argument("Ekf: initial covariance has the wrong size");
  }
  if (cfg.delayMode == DelayHandling::Fixed) {
    state_.delay = cfg.fixedDelay;
  } else if (cfg.delayMode == DelayHandling::None) {
    state_.delay = 0.0;
  }
}

Vec10 Ekf::correctedInput(const Vec3& omega, const Vec3& accel) const {
  return imuTangent(omega - state_.bias.head<3>(),
                    accel - state_.bias.tail<3>());
}

Ekf::Jacobians Ekf::propagationJacobians(const Vec3& omega, const Vec3& accel,
                                         double dt) const {
  const Vec10 wc = correctedInput(omega, accel);
  const Mat10 adLhs = Gal3::exp(-cfg_.gN * dt).Ad();
  const Mat10 m =
      adLhs * state_.pose.asGal3().Ad() * leftJacobian(Vec10(wc * dt)) * dt;

  Jacobians j;
  j.a = Eigen::MatrixXd::Identity(dim_, dim_);
  j.a.block<9, 9>(0, 0) = adLhs.block<9, 9>(0, 0);
  j.a.block<9, 6>(0, 9) = -m.block<9, 6>(0, 0);

  j.b = Eigen::MatrixXd::Zero(dim_, noiseDimFor(cfg_.delayMode));
  j.b.block<9, 6>(0, 0) = j.a.block<9, 6>(0, 9);
  j.b.block<6, 6>(9, 6) = Eigen::Matrix<double, 6, 6>::Identity() * dt;
  if (cfg_.delayMode == DelayHandling::Online) {
    j.b(15, 12) = dt;
  }
  return j;
}

void Ekf::propagate(const Vec3& omega, const Vec3& accel, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("Ekf::propagate: dt must be positive");
  }

  const Jacobians j = propagationJacobians(omega, accel, dt);
  const int nw = noiseDimFor(cfg_.delayMode);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(nw);
  q.segment<3>(0).setConstant(cfg_.gyroDensity * cfg_.gyroDensity);
  q.segment<3>(3).setConstant(cfg_.accelDensity * cfg_.accelDensity);
  q.segment<3>(6).setConstant(cfg_.gyroWalkDensity * cfg_.gyroWalkDensity);
  q.segment<3>(9).setConstant(cfg_.accelWalkDensity * cfg_.accelWalkDensity);
  if (cfg_.delayMode == DelayHandling::Online) {
    q(12) = cfg_.delayWalkDensity * cfg_.delayWalkDensity;
  }
  sigma_ = j.a * sigma_ * j.a.transpose() +
           (1.0 / dt) * j.b * q.asDiagonal() * j.b.transpose();
  sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();

  const Vec10 wc = correctedInput(omega, accel);
  state_.pose = Se23::fromGal3(Gal3::exp(-cfg_.gN * dt) *
                               state_.pose.asGal3() * Gal3::exp(wc * dt));

  if (cfg_.delayMode != DelayHandling::None) {
    buf_.propagate(wc, dt);
  }
  t_ += dt;
  checkHealth("propagate");
}

Vec3 Ekf::predictMeasurement(const Gal3& upsilon) const {
  const Gal3 carrier = Gal3::exp(cfg_.gN * state_.delay) *
                       state_.pose.asGal3() * upsilon.inverse();
  return carrier.R * cfg_.leverArm + carrier.p;
}

Eigen::MatrixXd Ekf::outputMatrix(const Gal3& upsilon,
                                  const Vec3& omegaAtDelay) const {
  const Gal3 gamma = Gal3::exp(cfg_.gN * state_.delay);
  const Gal3 upsInv = upsilon.inverse();
  const Gal3 q = state_.pose.asGal3() * upsInv;
  const Vec3 qp = q.R * cfg_.leverArm + q.p;

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3, dim_);
  c.block<3, 3>(0, 0) = -gamma.R * skew(qp);
  c.block<3, 3>(0, 3) = q.t * gamma.R;
  c.block<3, 3>(0, 6) = gamma.R;
  if (cfg_.delayMode == DelayHandling::Online) {
    const Vec3 h = predictMeasurement(upsilon);
    const Vec3 carried = state_.pose.R * (upsInv.R * omegaAtDelay.cross(cfg_.leverArm) + upsInv.v) +
                         state_.pose.v;
    c.block<3, 1>(0, 15) =
        cfg_.gN.head<3>().cross(h) - gamma.R * carried - gamma.v;
  }
  return c;
}

void Ekf::update(const Vec3& y) {
  Gal3 upsilon;
  Vec3 omegaAtDelay = Vec3::Zero();
  if (cfg_.delayMode != DelayHandling::None) {
    const PreintQuery q = buf_.query(state_.delay);
    if (q.clamped) {
      ++clampedUpdates_;
    }
    upsilon = q.element;
    omegaAtDelay = q.omega;
  }

  const Vec3 h = predictMeasurement(upsilon);
  const Eigen::MatrixXd c = outputMatrix(upsilon, omegaAtDelay);
  const Vec3 residual = y - h;

  const Mat3 s = c * sigma_ * c.transpose() + cfg_.measurementNoise;
  Eigen::LLT<Mat3> llt(s);
  if (llt.info() != Eigen::Success) {
    throw FilterDivergence("innovation covariance not positive definite", t_);
  }
  const Eigen::MatrixXd k = llt.solve(c * sigma_).transpose();

  const Eigen::VectorXd dx = k * residual;
  const Eigen::MatrixXd ikc =
      Eigen::MatrixXd::Identity(dim_, dim_) - k * c;
  sigma_ = ikc * sigma_ * ikc.transpose() +
           k * cfg_.measurementNoise * k.transpose();
  sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();

  state_.pose = Se23::exp(dx.head<9>()) * state_.pose;
  state_.pose.R =
      Eigen::Quaterniond(state_.pose.R).normalized().toRotationMatrix();
  state_.bias += dx.segment<6>(9);
  if (cfg_.delayMode == DelayHandling::Online) {
    state_.delay += dx(15);
  }
  checkHealth("update");
}

Eigen::VectorXd Ekf::errorVector(const Se23& poseTrue, const Vec6& biasTrue,
                                 double delayTrue) const {
  Eigen::VectorXd e(dim_);
  e.head<9>() = (poseTrue * state_.pose.inverse()).log();
  e.segment<6>(9) = biasTrue - state_.bias;
  if (cfg_.delayMode == DelayHandling::Online) {
    e(15) = delayTrue - state_.delay;
  }
  return e;
}

void Ekf::checkHealth(const char* where) const {
  const bool finite = state_.pose.R.allFinite() && state_.pose.v.allFinite() &&
                      state_.pose.p.allFinite() && state_.bias.allFinite() &&
                      std::isfinite(state_.delay) && sigma_.allFinite();
  if (!finite) {
    throw FilterDivergence(std::string(where) + ": state not finite", t_);
  }
  if ((sigma_.diagonal().array() <= 0.0).any()) {
    throw FilterDivergence(
        std::string(where) + ": covariance lost positive diagonal", t_);
  }
}

}  // namespace galins
