#include "galins/rundriver.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

#include "galins/twobody.hpp"

namespace galins {

namespace {

Eigen::Quaterniond canonicalQuat(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

Se23 truthPose(const TruthSample& s) { return Se23{s.R, s.v, s.p}; }

Vec10 stackBias(const Vec3& gyro, const Vec3& accel) {
  Vec10 b;
  b << gyro, accel, Vec3::Zero(), 0.0;
  return b;
}

SystemState truthSystemState(const TruthSample& s, double delay,
                             const Vec10& gN) {
  SystemState xi;
  xi.F = earthPreintegration(delay, gN) * truthPose(s).asGal3();
  xi.b = stackBias(s.gyroBias, s.accelBias);
  return xi;
}

double effectiveMeasStd(const FilterTuning& tuning,
                        const SensorConfig& sensors) {
  const double std =
      tuning.measurementStd > 0.0 ? tuning.measurementStd : sensors.gnssPosStd;
  if (!(std > 0.0)) {
    throw std::invalid_argument(
        "tuning: effective measurement std must be positive");
  }
  return std;
}

double pick(double tuned, double sensor) { return tuned >= 0.0 ? tuned : sensor; }

struct InitDraw {
  Eigen::VectorXd eps;
};

Eigen::VectorXd drawScaled(std::mt19937_64& rng, const Eigen::VectorXd& stds) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd out(stds.size());
  for (int i = 0; i < stds.size(); ++i) out(i) = stds(i) * gauss(rng);
  return out;
}

Eigen::VectorXd eqfPriorStds(const FilterTuning& t) {
  Eigen::VectorXd s(20);
  s.segment<3>(0).setConstant(t.initRotStd);
  s.segment<3>(3).setConstant(t.initVelStd);
  s.segment<3>(6).setConstant(t.initPosStd);
  s(9) = t.initDelayStd;
  s.segment<3>(10).setConstant(t.initGyroBiasStd);
  s.segment<3>(13).setConstant(t.initAccelBiasStd);
  s.segment<3>(16).setConstant(t.virtualBiasStd);
  s(19) = t.virtualBiasStd;
  return s;
}

/// A delay misbelief of delta sits along gN in the error coordinates
/// (log of the earth factor is delta * gN), not along the bare clock slot,
/// so the prior puts the delay std on that direction. The composition of the
/// delay factor with the drawn spatial and bias errors adds the bracket term
/// 0.5 * [delta gN, eps]; its covariance (quarter of the squared adjoint)
/// keeps the weakly observed fiber slots honest.
Mat20 eqfPriorCovariance(const Eigen::VectorXd& stds, const Vec10& gN) {
  Vec20 d = Vec20::Zero();
  d.head<10>() = gN;
  Vec20 varOther = stds.array().square();
  const double varDelay = varOther(9);
  varOther(9) = 0.0;
  const Mat20 ad = adMatrix20(d);
  Mat20 sigma = varOther.asDiagonal();
  sigma.noalias() += varDelay * d * d.transpose();
  sigma.noalias() +=
      (0.25 * varDelay) * ad * varOther.asDiagonal() * ad.transpose();
  return sigma;
}

Eigen::VectorXd ekfPriorStds(const FilterTuning& t, int dim) {
  Eigen::VectorXd s(dim);
  s.segment<3>(0).setConstant(t.initRotStd);
  s.segment<3>(3).setConstant(t.initVelStd);
  s.segment<3>(6).setConstant(t.initPosStd);
  s.segment<3>(9).setConstant(t.initGyroBiasStd);
  s.segment<3>(12).setConstant(t.initAccelBiasStd);
  if (dim == 16) s(15) = t.initDelayStd;
  return s;
}

}  // namespace

RunInput makeRunInput(const SimLog& log) {
  RunInput in;
  in.imuDt = log.imuDt;
  in.delay = log.delay;
  in.imu = log.imu;
  in.truth = log.truth;
  in.gnss = log.gnss;
  in.sensors = log.sensors;
  in.hasTruth = true;
  return in;
}

RunInput makeRunInput(const IngestedLog& log, const SensorConfig& sensors) {
  RunInput in;
  in.imuDt = log.imu.dt;
  in.imu = log.imu.samples;
  in.gnss = log.gnss;
  in.truth = log.truth;
  in.hasTruth = log.hasTruth && log.truth.size() == log.imu.samples.size();
  in.delay = log.hasTruth && !log.truthDelay.empty() ? log.truthDelay.front() : 0.0;
  in.sensors = sensors;
  return in;
}

EqfConfig makeEqfConfig(const FilterTuning& tuning, const SensorConfig& sensors,
                        double imuDt) {
  EqfConfig cfg;
  cfg.processNoise = processNoiseDiagonal(
      pick(tuning.gyroNoise, sensors.gyroNoiseDensity),
      pick(tuning.accelNoise, sensors.accelNoiseDensity),
      pick(tuning.gyroWalk, sensors.gyroBiasWalk),
      pick(tuning.accelWalk, sensors.accelBiasWalk), tuning.virtualWalk);
  const double std = effectiveMeasStd(tuning, sensors);
  cfg.measurementNoise = std * std * Mat3::Identity();
  cfg.leverArm = sensors.leverArm;
  cfg.gN = gravityTangent(sensors.gravity, sensors.earthRate);
  cfg.delayWalkDensity = tuning.delayWalk;
  cfg.bufferHorizon = tuning.bufferHorizon;
  cfg.imuDt = imuDt;
  return cfg;
}

EkfConfig makeEkfConfig(const FilterSpec& spec, const FilterTuning& tuning,
                        const SensorConfig& sensors, double imuDt) {
  EkfConfig cfg;
  switch (spec.kind) {
    case FilterKind::EkfNoDelay: cfg.delayMode = DelayHandling::None; break;
    case FilterKind::EkfFixed: cfg.delayMode = DelayHandling::Fixed; break;
    case FilterKind::EkfOnline: cfg.delayMode = DelayHandling::Online; break;
    case FilterKind::Eqf:
      throw std::invalid_argument("makeEkfConfig: not an EKF spec");
  }
  cfg.fixedDelay = spec.fixedDelay;
  cfg.gyroDensity = pick(tuning.gyroNoise, sensors.gyroNoiseDensity);
  cfg.accelDensity = pick(tuning.accelNoise, sensors.accelNoiseDensity);
  cfg.gyroWalkDensity = pick(tuning.gyroWalk, sensors.gyroBiasWalk);
  cfg.accelWalkDensity = pick(tuning.accelWalk, sensors.accelBiasWalk);
  cfg.delayWalkDensity = tuning.delayWalk;
  const double std = effectiveMeasStd(tuning, sensors);
  cfg.measurementNoise = std * std * Mat3::Identity();
  cfg.leverArm = sensors.leverArm;
  cfg.gN = gravityTangent(sensors.gravity, sensors.earthRate);
  cfg.bufferHorizon = tuning.bufferHorizon;
  cfg.imuDt = imuDt;
  return cfg;
}

RunOutput runFilter(const RunInput& in, const FilterSpec& spec,
                    const FilterTuning& tuning, uint64_t initSeed,
                    bool perturbInit, double apeDivergenceThreshold) {
  if (in.imu.size() < 2 || !(in.imuDt > 0.0)) {
    throw std::invalid_argument("runFilter: need an IMU stream");
  }
  const bool haveTruth = in.hasTruth && in.truth.size() == in.imu.size();

  RunOutput out;
  out.errors.filter = spec.name;
  out.errors.seed = initSeed;

  const auto started = std::chrono::steady_clock::now();
  std::mt19937_64 initRng(initSeed ^ 0x9e3779b97f4a7c15ull);

  const Vec10 gN = gravityTangent(in.sensors.gravity, in.sensors.earthRate);
  TruthSample start;
  if (haveTruth) {
    start = in.truth.front();
  } else {
    start.t = in.imu.front().t;
    start.R = Mat3::Identity();
    start.v = Vec3::Zero();
    start.p = in.gnss.empty() ? Vec3::Zero() : in.gnss.front().pos;
  }

  std::optional<Eqf> eqf;
  std::optional<Ekf> ekf;
  if (spec.kind == FilterKind::Eqf) {
    const Eigen::VectorXd stds = eqfPriorStds(tuning);
    // Believed delay starts at zero, so the cross frame starts at the plain
    // navigation pose; the true delay enters only through the measurements.
    SystemState init = truthSystemState(start, 0.0, gN);
    if (perturbInit) {
      Vec20 eps = drawScaled(initRng, stds);
      eps(9) = 0.0;
      const TangentGroup x =
          TangentGroup::exp(eps).inverse() * originPhiInverse(init);
      init = stateAction(x, originState());
    }
    init.F.t = 0.0;
    const Mat20 sigma0 = eqfPriorCovariance(stds, gN);
    eqf.emplace(init, sigma0, makeEqfConfig(tuning, in.sensors, in.imuDt));
    out.errors.dim = 20;
  } else {
    const EkfConfig cfg = makeEkfConfig(spec, tuning, in.sensors, in.imuDt);
    const int dim = cfg.delayMode == DelayHandling::Online ? 16 : 15;
    const Eigen::VectorXd stds = ekfPriorStds(tuning, dim);
    EkfState init;
    init.pose = truthPose(start);
    init.bias << start.gyroBias, start.accelBias;
    if (perturbInit) {
      Eigen::VectorXd eps = drawScaled(initRng, stds);
      init.pose = Se23::exp(-eps.head<9>()) * init.pose;
      init.bias -= eps.segment<6>(9);
    }
    init.delay = 0.0;  // ctor pins the Fixed-mode value
    const Eigen::MatrixXd sigma0 = stds.array().square().matrix().asDiagonal();
    ekf.emplace(init, sigma0, cfg);
    out.errors.dim = ekf->errorDim();
  }

  const double t0 = in.imu.front().t;
  size_t gi = 0;
  while (gi < in.gnss.size() && in.gnss[gi].tArrival <= t0 + 1e-9) ++gi;

  double heldNees = 0.0;
  for (size_t k = 1; k < in.imu.size(); ++k) {
    const double t = t0 + static_cast<double>(k) * in.imuDt;
    const Vec3 omega = 0.5 * (in.imu[k - 1].omega + in.imu[k].omega);
    const Vec3 accel = 0.5 * (in.imu[k - 1].accel + in.imu[k].accel);

    bool updated = false;
    try {
      if (eqf) {
        InputSample u;
        u.wN = imuTangent(omega, accel);
        eqf->propagate(u, in.imuDt);
      } else {
        ekf->propagate(omega, accel, in.imuDt);
      }
      // Fixes that arrive before the buffer spans the horizon are dropped:
      // the believed-delay search range is not yet representable and a
      // clamped update would shrink the covariance without moving the state.
      const bool warm = (eqf ? eqf->buffer().maxAge()
                             : ekf->buffer().maxAge()) >= tuning.bufferHorizon;
      while (gi < in.gnss.size() && in.gnss[gi].tArrival <= t + 1e-9) {
        if (warm) {
          if (eqf) {
            eqf->update(in.gnss[gi].pos);
          } else {
            ekf->update(in.gnss[gi].pos);
          }
          updated = true;
        }
        ++gi;
      }
    } catch (const FilterDivergence& e) {
      out.diverged = true;
      out.divergedAt = t;
      out.divergenceReason = e.what();
      break;
    } catch (const std::domain_error& e) {
      out.diverged = true;
      out.divergedAt = t;
      out.divergenceReason = e.what();
      break;
    }

    const Se23 nav = eqf ? eqf->navigationEstimate() : ekf->navigationEstimate();
    const double deltaHat = eqf ? eqf->delayEstimate() : ekf->delayEstimate();

    if (haveTruth) {
      const TruthSample& tr = in.truth[k];
      try {
        if (updated) {
          if (eqf) {
            const Vec20 eps = errorCoordinates(
                eqf->groupState(), truthSystemState(tr, in.delay, gN));
            heldNees = nees(eps, eqf->covariance(), 20);
          } else {
            Vec6 biasTrue;
            biasTrue << tr.gyroBias, tr.accelBias;
            const Eigen::VectorXd eps =
                ekf->errorVector(truthPose(tr), biasTrue, in.delay);
            heldNees = nees(eps, ekf->covariance(), ekf->errorDim());
          }
          out.errors.neesAtUpdates.emplace_back(t, heldNees);
        }
        const StepErrors se = stepErrors(truthPose(tr), in.delay, nav, deltaHat);
        out.errors.steps.push_back(
            ErrorRecord{t, se.are, se.ave, se.ape, se.ade, heldNees});
        if (se.ape > apeDivergenceThreshold) {
          out.diverged = true;
          out.divergedAt = t;
          out.divergenceReason = "position error beyond divergence threshold";
          break;
        }
      } catch (const std::invalid_argument& e) {
        out.diverged = true;
        out.divergedAt = t;
        out.divergenceReason = std::string("covariance failure: ") + e.what();
        break;
      } catch (const std::domain_error& e) {
        out.diverged = true;
        out.divergedAt = t;
        out.divergenceReason = std::string("error metric undefined: ") + e.what();
        break;
      }
    }

    EstimateRecord row;
    row.t = t;
    row.q = canonicalQuat(nav.R);
    row.v = nav.v;
    row.p = nav.p;
    row.deltaHat = deltaHat;
    row.nees = heldNees;
    out.estimates.push_back(row);
  }

  out.wallSeconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return out;
}

RunOutput runTwoBody(const RunConfig& cfg, uint64_t seed) {
  const double dt = 1.0 / cfg.sensors.imuRate;
  const int n = static_cast<int>(std::round(cfg.traj.duration / dt));
  const int m = static_cast<int>(std::round(cfg.sensors.delay / dt));
  const int gnssEvery = std::max(
      1, static_cast<int>(std::round(cfg.sensors.imuRate / cfg.sensors.gnssRate)));
  if (m < 1 || m >= n) {
    throw std::invalid_argument("twobody: delay must fit inside the run");
  }
  const double offsetB = 12.3;  // phase shift between the two bodies

  RunOutput out;
  out.errors.filter = "twobody";
  out.errors.dim = 10;
  out.errors.seed = seed;
  const auto started = std::chrono::steady_clock::now();

  auto input = [&](double t, double offset) {
    const AnalyticState s = analyticState(cfg.traj, t + offset, cfg.sensors.gravity);
    return imuTangent(s.omegaBody, s.accelBody);
  };

  // Both absolute frame chains share the observer's discrete kinematics, so
  // the reference cross frame is exact for the inputs the observer sees.
  std::vector<Gal3> mA(n + 1), mB(n + 1);
  {
    const AnalyticState a0 = analyticState(cfg.traj, 0.0, cfg.sensors.gravity);
    const AnalyticState b0 = analyticState(cfg.traj, offsetB, cfg.sensors.gravity);
    mA[0] = Se23{a0.R, a0.v, a0.p}.asGal3();
    mB[0] = Se23{b0.R, b0.v, b0.p}.asGal3();
    for (int k = 0; k < n; ++k) {
      const double tMid = (k + 0.5) * dt;
      mA[k + 1] = mA[k] * Gal3::exp(input(tMid, 0.0) * dt);
      mB[k + 1] = mB[k] * Gal3::exp(input(tMid, offsetB) * dt);
    }
  }
  auto cross = [&](int k) { return mA[k - m].inverse() * mB[k]; };

  PreintBuffer bufA(cfg.tuning.bufferHorizon, dt);
  PreintBuffer bufB(cfg.tuning.bufferHorizon, dt);

  ObserverState s;
  {
    double gains[4] = {cfg.tuning.observerGain, cfg.tuning.observerGain,
                       cfg.tuning.observerGain, cfg.tuning.observerGain};
    if (cfg.tuning.observerGainBlocks.size() == 4) {
      for (int i = 0; i < 4; ++i) gains[i] = cfg.tuning.observerGainBlocks[i];
    }
    Vec10 diag;
    diag << Vec3::Constant(gains[0]), Vec3::Constant(gains[1]),
        Vec3::Constant(gains[2]), gains[3];
    s.gain = diag.asDiagonal();
  }

  // Spatial offset drawn from the init prior; the believed latency starts at
  // truth since the diagonal gain cannot move it.
  {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    Eigen::VectorXd stds(10);
    stds.segment<3>(0).setConstant(cfg.tuning.initRotStd);
    stds.segment<3>(3).setConstant(cfg.tuning.initVelStd);
    stds.segment<3>(6).setConstant(cfg.tuning.initPosStd);
    stds(9) = 0.0;
    const Vec10 eps = drawScaled(rng, stds);
    s.fHat = Gal3::exp(eps) * cross(m);
  }

  for (int k = 0; k < m; ++k) {
    bufA.propagate(input((k + 0.5) * dt, 0.0), dt);
    bufB.propagate(input((k + 0.5) * dt, offsetB), dt);
  }
  for (int k = m; k < n; ++k) {
    const double tMid = (k + 0.5) * dt;
    s = observerStep(s, input(tMid - m * dt, 0.0), input(tMid, offsetB), dt);
    bufA.propagate(input(tMid, 0.0), dt);
    bufB.propagate(input(tMid, offsetB), dt);
    const int kn = k + 1;
    if (kn % gnssEvery == 0) {
      const Gal3 tMeas = mA[kn - m].inverse() * mB[kn - m];
      s = observerCorrect(s, observerResidual(s, tMeas, bufB));
    }

    const double t = kn * dt;
    const Vec10 err = (s.fHat.inverse() * cross(kn)).log();
    out.errors.steps.push_back(ErrorRecord{t, err.segment<3>(0).norm(),
                                           err.segment<3>(3).norm(),
                                           err.segment<3>(6).norm(),
                                           std::abs(err(9)), 0.0});

    const Gal3 rel = observerCurrentPose(s, bufA);
    EstimateRecord row;
    row.t = t;
    row.q = canonicalQuat(rel.R);
    row.v = rel.v;
    row.p = rel.p;
    row.deltaHat = s.fHat.t;
    out.estimates.push_back(row);
  }

  out.wallSeconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return out;
}

}  // namespace galins
