#include "galins/eqf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "galins/so3.hpp"

namespace galins {

SystemState stateAction(const TangentGroup& X, const SystemState& xi) {
  SystemState out;
  out.F = xi.F * X.base;
  out.b = X.base.inverse().Ad() * (xi.b - X.fiber);
  return out;
}

SystemState originState() { return SystemState{}; }

TangentGroup originPhiInverse(const SystemState& xi) {
  TangentGroup X;
  X.base = xi.F;
  X.fiber = -(xi.F.Ad() * xi.b);
  return X;
}

SystemState systemStep(const SystemState& xi, const InputSample& u, double dt,
                       const Vec10& gN) {
  SystemState out;
  out.F = Gal3::exp(-gN * dt) * xi.F * Gal3::exp((u.wN - xi.b) * dt);
  out.b = xi.b + u.tauRw * dt;
  return out;
}

TangentGroup lift(const SystemState& xi, const InputSample& u, double dt,
                  const Vec10& gN) {
  TangentGroup L;
  const Vec10 gBody = xi.F.inverse().Ad() * gN;
  L.base = Gal3::exp(-gBody * dt) * Gal3::exp((u.wN - xi.b) * dt);
  L.fiber = xi.b - L.base.Ad() * (xi.b + u.tauRw * dt);
  return L;
}

Vec20 errorCoordinates(const TangentGroup& xhat, const SystemState& xi) {
  return originPhiInverse(stateAction(xhat.inverse(), xi)).log();
}

PropagationJacobians propagationJacobians(const TangentGroup& xhat,
                                          const Vec10& wMeas, const Vec10& gN,
                                          double dt) {
  const Vec10 wRing = xhat.base.Ad() * wMeas + xhat.fiber;
  const Mat10 adFhat = xhat.base.Ad();
  const Mat10 a1 = Gal3::exp(-gN * dt).Ad();
  const Mat10 a2 = a1 * Gal3::exp(wRing * dt).Ad();
  const Mat10 jw = leftJacobian(Vec10(wRing * dt));

  PropagationJacobians out;
  out.a.setZero();
  out.a.block<10, 10>(0, 0) = a1;
  out.a.block<10, 10>(0, 10) = a1 * jw * dt;
  out.a.block<10, 10>(10, 10) = a2;

  out.b.setZero();
  out.b.block<10, 10>(0, 0) = -a1 * jw * adFhat * dt;
  out.b.block<10, 10>(10, 10) = a2 * adFhat * dt;
  return out;
}

Vec3 measurementPrediction(const Gal3& xf, const Gal3& upsilon,
                           const Vec3& p0) {
  const Gal3 carrier = xf * upsilon.inverse();
  return carrier.R * p0 + carrier.p;
}

Mat3x20 outputMatrix(const Gal3& xf, const Gal3& upsilon,
                     const Vec3& omegaAtDelay, const Vec3& p0) {
  const Gal3 upsInv = upsilon.inverse();
  const Vec3 h = measurementPrediction(xf, upsilon, p0);
  Mat3x20 c = Mat3x20::Zero();
  c.block<3, 3>(0, 0) = -skew(h);
  c.block<3, 3>(0, 6) = Mat3::Identity();
  c.block<3, 1>(0, 9) =
      -xf.v - xf.R * (upsInv.R * omegaAtDelay.cross(p0) + upsInv.v);
  return c;
}

Mat20 processNoiseDiagonal(double gyroDensity, double accelDensity,
                           double gyroWalkDensity, double accelWalkDensity,
                           double virtualWalkDensity) {
  Vec20 d = Vec20::Zero();
  d.segment<3>(0).setConstant(gyroDensity * gyroDensity);
  d.segment<3>(3).setConstant(accelDensity * accelDensity);
  d.segment<3>(10).setConstant(gyroWalkDensity * gyroWalkDensity);
  d.segment<3>(13).setConstant(accelWalkDensity * accelWalkDensity);
  d.segment<4>(16).setConstant(virtualWalkDensity * virtualWalkDensity);
  return d.asDiagonal();
}

Eqf::Eqf(const SystemState& init, const Mat20& sigmaInit, const EqfConfig& cfg)
    : x_(originPhiInverse(init)),
      sigma_(sigmaInit),
      cfg_(cfg),
      buf_(cfg.bufferHorizon, cfg.imuDt) {}

void Eqf::propagate(const InputSample& u, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("Eqf::propagate: dt must be positive");
  }

  const PropagationJacobians j =
      propagationJacobians(x_, u.wN, cfg_.gN, dt);
  sigma_ = j.a * sigma_ * j.a.transpose() +
           (1.0 / dt) * j.b * cfg_.processNoise * j.b.transpose();
  if (cfg_.delayWalkDensity > 0.0) {
    Vec20 d = Vec20::Zero();
    d.head<10>() = cfg_.gN;
    sigma_.noalias() +=
        (dt * cfg_.delayWalkDensity * cfg_.delayWalkDensity) * d *
        d.transpose();
  }
  sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();

  const SystemState xiHat = stateAction(x_, originState());
  x_ = x_ * lift(xiHat, u, dt, cfg_.gN);

  Vec10 wCorrected = u.wN - xiHat.b;
  wCorrected(9) = 1.0;
  buf_.propagate(wCorrected, dt);

  t_ += dt;
  checkHealth("propagate");
}

void Eqf::update(const Vec3& y) {
  // Project a believed delay that left the buffered window back onto it (a
  // pure clock translation, the clock direction being central); the update
  // below then keeps every candidate inside the window.
  const double projected = std::clamp(x_.base.t, 0.0, buf_.maxAge());
  if (projected != x_.base.t) {
    ++clampedUpdates_;
    x_.base.t = projected;
  }
  const PreintQuery q = buf_.query(projected);
  if (q.clamped) {
    ++clampedUpdates_;
  }

  const Vec3 h = measurementPrediction(x_.base, q.element, cfg_.leverArm);
  const Mat3x20 c = outputMatrix(x_.base, q.element, q.omega, cfg_.leverArm);
  const Vec3 residual = y - h;

  const Mat3 s = c * sigma_ * c.transpose() + cfg_.measurementNoise;
  Eigen::LLT<Mat3> llt(s);
  if (llt.info() != Eigen::Success) {
    throw FilterDivergence("innovation covariance not positive definite", t_);
  }
  const Eigen::Matrix<double, 20, 3> k = llt.solve(c * sigma_).transpose();
  const Vec20 fullStep = k * residual;

  // The first delay correction can span most of the buffer, far beyond the
  // reach of one linearization. Backtrack on the posterior objective and
  // apply the damped gain in Joseph form, which stays consistent for any
  // gain: a shortened step then keeps the matching share of the prior
  // variance instead of pretending the full correction was applied. The
  // clock component of a step equals the believed-delay move (the clock
  // direction is central), so it is truncated at the window edge, with the
  // matching gain row scaled the same way, rather than rejecting the whole
  // step and starving the spatial states of the fix.
  const Eigen::LLT<Mat20> priorLlt(sigma_);
  const Eigen::LLT<Mat3> noiseLlt(cfg_.measurementNoise);
  if (priorLlt.info() != Eigen::Success ||
      noiseLlt.info() != Eigen::Success) {
    throw FilterDivergence("update prior not positive definite", t_);
  }
  const auto residualAt = [&](const TangentGroup& g) -> Vec3 {
    const double age = std::clamp(g.base.t, 0.0, buf_.maxAge());
    return y - measurementPrediction(g.base, buf_.query(age).element,
                                     cfg_.leverArm);
  };
  const auto clockScale = [&](double move) -> double {
    if (move == 0.0) {
      return 1.0;
    }
    const double target = std::clamp(x_.base.t + move, 0.0, buf_.maxAge());
    return std::clamp((target - x_.base.t) / move, 0.0, 1.0);
  };
  constexpr int kMaxHalvings = 8;
  const double priorCost = residual.dot(noiseLlt.solve(residual));
  double alpha = 1.0;
  double beta = 1.0;
  Vec20 delta = Vec20::Zero();
  TangentGroup moved = x_;
  bool feasible = false;
  for (int half = 0; half < kMaxHalvings; ++half) {
    delta = alpha * fullStep;
    beta = clockScale(delta(9));
    delta(9) *= beta;
    moved = TangentGroup::exp(delta) * x_;
    const Vec3 r = residualAt(moved);
    const double cost =
        delta.dot(priorLlt.solve(delta)) + r.dot(noiseLlt.solve(r));
    // Slack admits roundoff-floor ties; both costs carry chi-square scale.
    if (cost <= priorCost + 1e-9) {
      feasible = true;
      break;
    }
    alpha *= 0.5;
  }
  if (!feasible) {
    // No damped step improves on the prior: drop the fix rather than shrink
    // the covariance for a correction that was not applied.
    ++clampedUpdates_;
    return;
  }
  Eigen::Matrix<double, 20, 3> ka = alpha * k;
  ka.row(9) *= beta;
  const Mat20 ikc = Mat20::Identity() - ka * c;
  sigma_ = ikc * sigma_ * ikc.transpose() +
           ka * cfg_.measurementNoise * ka.transpose();
  const Mat20 jl = leftJacobian20(delta);
  sigma_ = jl * sigma_ * jl.transpose();
  sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();

  x_ = moved;
  x_.base.normalizeRotation();
  // Roundoff guard for the window edge reached by a feasible step.
  x_.base.t = std::clamp(x_.base.t, 0.0, buf_.maxAge());
  checkHealth("update");
}

SystemState Eqf::estimate() const { return stateAction(x_, originState()); }

double Eqf::delayEstimate() const { return x_.base.t; }

Se23 Eqf::navigationEstimate() const {
  const Gal3 gamma = Gal3::exp(cfg_.gN * delayEstimate());
  return Se23::fromGal3(gamma.inverse() * x_.base);
}

void Eqf::checkHealth(const char* where) const {
  const bool finite = x_.base.matrix().allFinite() && x_.fiber.allFinite() &&
                      sigma_.allFinite();
  if (!finite) {
    throw FilterDivergence(std::string(where) + ": state not finite", t_);
  }
  if ((sigma_.diagonal().array() <= 0.0).any()) {
    throw FilterDivergence(
        std::string(where) + ": covariance lost positive diagonal", t_);
  }
}

}  // namespace galins
