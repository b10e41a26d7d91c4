#include "galins/ekf.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "galins/preintegration.hpp"
#include "oracles.hpp"

using namespace galins;
using galins::testing::makeRng;
using galins::testing::randomVec;

namespace {

constexpr double kDt = 0.005;

Vec10 gravityDir() { return gravityTangent(Vec3(0.0, 0.0, -kGravity)); }

void bodySignals(double t, Vec3* omega, Vec3* accel) {
  *omega = Vec3(0.3 * std::sin(2.0 * t), 0.2 * std::cos(3.0 * t),
                0.25 * std::sin(t + 0.4));
  *accel = Vec3(1.5 * std::cos(t), -2.0 * std::sin(1.3 * t),
                kGravity + 0.5 * std::sin(2.2 * t));
}

Se23 exactStep(const Se23& pose, const Vec3& omega, const Vec3& accel,
               const Vec10& gN) {
  return Se23::fromGal3(Gal3::exp(-gN * kDt) * pose.asGal3() *
                        Gal3::exp(imuTangent(omega, accel) * kDt));
}

EkfConfig baseConfig(DelayHandling mode) {
  EkfConfig cfg;
  cfg.delayMode = mode;
  cfg.measurementNoise = 0.0025 * Mat3::Identity();
  cfg.leverArm = Vec3(0.0, 0.3, 0.0);
  cfg.gN = gravityDir();
  cfg.bufferHorizon = 0.3;
  cfg.imuDt = kDt;
  cfg.delayWalkDensity = 1e-4;
  return cfg;
}

Eigen::MatrixXd priorCovariance(int dim) {
  Eigen::VectorXd d(dim);
  d.segment<3>(0).setConstant(0.04);
  d.segment<3>(3).setConstant(0.25);
  d.segment<3>(6).setConstant(1.0);
  d.segment<3>(9).setConstant(1e-4);
  d.segment<3>(12).setConstant(0.01);
  if (dim == 16) d(15) = 0.09;
  return d.asDiagonal();
}

struct EkfWorld {
  double delta = 0.0;
  Vec6 bias = Vec6::Zero();
  std::vector<Vec3> omegaMeas, accelMeas;
  std::vector<Se23> pose;  // pose[k] at t = k*dt
};

EkfWorld makeEkfWorld(double delta, const Vec6& bias, int steps) {
  EkfWorld w;
  w.delta = delta;
  w.bias = bias;
  const Vec10 gN = gravityDir();
  Se23 pose{so3Exp(Vec3(0.2, -0.1, 0.3)), Vec3(1.0, -0.5, 0.2), Vec3(5, -3, 1)};
  w.pose.push_back(pose);
  for (int k = 0; k < steps; ++k) {
    Vec3 omega, accel;
    bodySignals(k * kDt, &omega, &accel);
    w.omegaMeas.push_back(omega + bias.head<3>());
    w.accelMeas.push_back(accel + bias.tail<3>());
    pose = exactStep(pose, omega, accel, gN);
    w.pose.push_back(pose);
  }
  return w;
}

}  // namespace

TEST(EkfPropagation, FreeFallIsExact) {
  EkfState init;
  Ekf f(init, priorCovariance(16), baseConfig(DelayHandling::Online));
  for (int k = 0; k < 200; ++k) {
    f.propagate(Vec3::Zero(), Vec3::Zero(), kDt);
  }
  EXPECT_LT((f.state().pose.v - Vec3(0, 0, -kGravity)).norm(), 1e-12);
  EXPECT_LT((f.state().pose.p - Vec3(0, 0, -kGravity / 2)).norm(), 1e-12);
  EXPECT_LT((f.state().pose.R - Mat3::Identity()).norm(), 1e-12);
}

TEST(EkfPropagation, JacobiansMatchFiniteDifferences) {
  auto rng = makeRng(400);
  const Vec10 gN = gravityDir();
  for (DelayHandling mode : {DelayHandling::Online, DelayHandling::Fixed}) {
    const int dim = mode == DelayHandling::Online ? 16 : 15;
    const int nw = mode == DelayHandling::Online ? 13 : 12;
    EkfConfig cfg = baseConfig(mode);
    cfg.fixedDelay = 0.08;

    EkfState init;
    init.pose = Se23::exp(randomVec<9>(rng, 0.6));
    init.bias = randomVec<6>(rng, 0.1);
    init.delay = 0.08;
    Ekf f(init, priorCovariance(dim), cfg);

    const Vec3 omegaMeas = randomVec<3>(rng, 1.0);
    const Vec3 accelMeas = randomVec<3>(rng, 3.0);
    const Ekf::Jacobians jac = f.propagationJacobians(omegaMeas, accelMeas, kDt);

    const Se23 poseHat = f.state().pose;
    const Vec6 biasHat = f.state().bias;
    const double delayHat = f.state().delay;
    const Se23 poseHatPlus =
        exactStep(poseHat, omegaMeas - biasHat.head<3>(),
                  accelMeas - biasHat.tail<3>(), gN);

    auto errorAfterStep = [&](const Eigen::VectorXd& eps,
                              const Eigen::VectorXd& eta) -> Eigen::VectorXd {
      const Se23 poseTrue = Se23::exp(eps.head<9>()) * poseHat;
      const Vec6 biasTrue = biasHat + eps.segment<6>(9);
      const Vec3 omegaBody = omegaMeas - biasTrue.head<3>() - eta.segment<3>(0);
      const Vec3 accelBody = accelMeas - biasTrue.tail<3>() - eta.segment<3>(3);
      const Se23 posePlus = exactStep(poseTrue, omegaBody, accelBody, gN);
      Eigen::VectorXd out(dim);
      out.head<9>() = (posePlus * poseHatPlus.inverse()).log();
      out.segment<6>(9) = biasTrue + eta.segment<6>(6) * kDt - biasHat;
      if (dim == 16) {
        out(15) = (delayHat + eps(15) + eta(12) * kDt) - delayHat;
      }
      return out;
    };

    const double h = 1e-5;
    for (int col = 0; col < dim; ++col) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
      e(col) = h;
      const Eigen::VectorXd fd =
          (errorAfterStep(e, Eigen::VectorXd::Zero(nw)) -
           errorAfterStep(-e, Eigen::VectorXd::Zero(nw))) /
          (2 * h);
      EXPECT_LT((jac.a.col(col) - fd).norm(), 1e-6) << "A column " << col;
    }
    for (int col = 0; col < nw; ++col) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(nw);
      e(col) = h;
      const Eigen::VectorXd fd =
          (errorAfterStep(Eigen::VectorXd::Zero(dim), e) -
           errorAfterStep(Eigen::VectorXd::Zero(dim), -e)) /
          (2 * h);
      EXPECT_LT((jac.b.col(col) - fd).norm(), 1e-6) << "B column " << col;
    }
  }
}

TEST(EkfOutput, MatrixMatchesFiniteDifferencesThroughTheBuffer) {
  auto rng = makeRng(401);
  EkfConfig cfg = baseConfig(DelayHandling::Online);

  EkfState init;
  init.pose = Se23::exp(randomVec<9>(rng, 0.5));
  init.bias = randomVec<6>(rng, 0.05);
  init.delay = 20.37 * kDt;  // interior of an interpolation cell
  Ekf f(init, priorCovariance(16), cfg);
  for (int k = 0; k < 60; ++k) {
    Vec3 omega, accel;
    bodySignals((k + 0.5) * kDt, &omega, &accel);
    f.propagate(omega + init.bias.head<3>(), accel + init.bias.tail<3>(), kDt);
  }

  const PreintQuery q = f.buffer().query(f.state().delay);
  ASSERT_FALSE(q.clamped);
  const Eigen::MatrixXd c = f.outputMatrix(q.element, q.omega);
  const Vec3 h0 = f.predictMeasurement(q.element);

  const Se23 poseHat = f.state().pose;
  const double delayHat = f.state().delay;
  const Vec10 gN = cfg.gN;
  auto predict = [&](const Eigen::VectorXd& eps) -> Vec3 {
    const Se23 poseTrue = Se23::exp(eps.head<9>()) * poseHat;
    const double delayTrue = delayHat + eps(15);
    const Gal3 ups = f.buffer().query(delayTrue).element;
    const Gal3 carrier =
        Gal3::exp(gN * delayTrue) * poseTrue.asGal3() * ups.inverse();
    return carrier.R * cfg.leverArm + carrier.p;
  };

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(16);
  EXPECT_LT((predict(zero) - h0).norm(), 1e-14);
  const double h = 1e-6;
  for (int col = 0; col < 16; ++col) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(16);
    e(col) = h;
    const Vec3 fd = (predict(e) - predict(-e)) / (2 * h);
    EXPECT_LT((c.col(col) - fd).norm(), 1e-6) << "column " << col;
  }
  EXPECT_LT((c.block<3, 6>(0, 9).norm()), 1e-12);
}

// With the believed delay fixed at the true value and truth initialisation,
// rolling the estimate back through the preintegration window reproduces the
// delayed fixes exactly: the filter must stay put.
TEST(EkfFilter, TruthInitialisedFixedDelayStaysOnTruth) {
  const double delta = 0.1;
  Vec6 bias;
  bias << 0.004, -0.002, 0.003, -0.05, 0.02, 0.04;
  const int steps = 600;
  const EkfWorld w = makeEkfWorld(delta, bias, steps);

  EkfConfig cfg = baseConfig(DelayHandling::Fixed);
  cfg.fixedDelay = delta;
  EkfState init;
  init.pose = w.pose[0];
  init.bias = bias;
  Ekf f(init, priorCovariance(15), cfg);

  const int m = 20;
  double worst = 0.0;
  for (int k = 0; k < steps; ++k) {
    f.propagate(w.omegaMeas[k], w.accelMeas[k], kDt);
    const int kn = k + 1;
    if (kn % 10 == 0 && kn >= m) {
      const Se23& at = w.pose[kn - m];
      f.update(at.R * cfg.leverArm + at.p);
      worst = std::max(worst,
                       f.errorVector(w.pose[kn], bias, delta).norm());
    }
  }
  EXPECT_LT(worst, 1e-8);
  EXPECT_EQ(f.clampedUpdates(), 0);
}

TEST(EkfFilter, TruthInitialisedNoDelayStaysOnUndelayedFixes) {
  const int steps = 400;
  const EkfWorld w = makeEkfWorld(0.0, Vec6::Zero(), steps);

  EkfConfig cfg = baseConfig(DelayHandling::None);
  EkfState init;
  init.pose = w.pose[0];
  Ekf f(init, priorCovariance(15), cfg);

  double worst = 0.0;
  for (int k = 0; k < steps; ++k) {
    f.propagate(w.omegaMeas[k], w.accelMeas[k], kDt);
    const int kn = k + 1;
    if (kn % 10 == 0) {
      const Se23& at = w.pose[kn];
      f.update(at.R * cfg.leverArm + at.p);
      worst = std::max(worst, f.errorVector(w.pose[kn], Vec6::Zero(), 0.0).norm());
    }
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(EkfFilter, OnlineDelayConvergesUnderZeroNoise) {
  const double delta = 0.1;
  const int steps = 12000;  // 60 s
  const EkfWorld w = makeEkfWorld(delta, Vec6::Zero(), steps);

  EkfConfig cfg = baseConfig(DelayHandling::Online);
  cfg.delayWalkDensity = 1e-6;
  EkfState init;
  init.pose = w.pose[0];
  init.delay = 0.0;
  Ekf f(init, priorCovariance(16), cfg);

  const int m = 20;
  for (int k = 0; k < steps; ++k) {
    f.propagate(w.omegaMeas[k], w.accelMeas[k], kDt);
    const int kn = k + 1;
    if (kn % 10 == 0 && kn >= m) {
      const Se23& at = w.pose[kn - m];
      f.update(at.R * cfg.leverArm + at.p);
    }
  }
  EXPECT_NEAR(f.delayEstimate(), delta, 1e-3);
  EXPECT_LT((f.state().pose.p - w.pose.back().p).norm(), 0.05);
}

TEST(EkfFilter, RejectsMismatchedCovarianceSize) {
  EkfState init;
  EXPECT_THROW(Ekf(init, priorCovariance(15), baseConfig(DelayHandling::Online)),
               std::invalid_argument);
}

TEST(EkfFilter, RejectsNonPositiveStepLength) {
  EkfState init;
  Ekf f(init, priorCovariance(16), baseConfig(DelayHandling::Online));
  EXPECT_THROW(f.propagate(Vec3::Zero(), Vec3::Zero(), 0.0),
               std::invalid_argument);
}

TEST(EkfFilter, NonFiniteMeasurementRaisesDivergence) {
  EkfState init;
  Ekf f(init, priorCovariance(16), baseConfig(DelayHandling::Online));
  f.propagate(Vec3::Zero(), Vec3(0, 0, kGravity), kDt);
  const Vec3 bad(std::numeric_limits<double>::quiet_NaN(), 0, 0);
  EXPECT_THROW(f.update(bad), FilterDivergence);
}
