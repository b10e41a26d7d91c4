#include "galins/simulator.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace galins {

namespace {

Mat3 eulerZyx(double yaw, double pitch, double roll) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

}  // namespace

AnalyticState analyticState(const TrajectoryConfig& traj, double t, const Vec3& gravity) {
  const double w = traj.rate;
  const double cw = std::cos(w * t), sw = std::sin(w * t);
  const double wh = traj.horizWaveFreq, wv = traj.vertWaveFreq;
  const double ah = traj.horizWaveAmp, av = traj.vertWaveAmp;

  const Vec3 p(traj.radius * cw + ah * std::sin(wh * t),
               traj.radius * sw,
               av * std::sin(wv * t));
  const Vec3 v(-traj.radius * w * sw + ah * wh * std::cos(wh * t),
               traj.radius * w * cw,
               av * wv * std::cos(wv * t));
  const Vec3 a(-traj.radius * w * w * cw - ah * wh * wh * std::sin(wh * t),
               -traj.radius * w * w * sw,
               -av * wv * wv * std::sin(wv * t));

  // Heading follows the horizontal velocity; the rate comes from the exact
  // derivative of atan2, guarded when there is no horizontal motion.
  const double vxy2 = v.x() * v.x() + v.y() * v.y();
  double yaw = 0.0, yawRate = 0.0;
  if (vxy2 > 1e-12) {
    yaw = std::atan2(v.y(), v.x());
    yawRate = (v.x() * a.y() - v.y() * a.x()) / vxy2;
  }
  const double wa = traj.attitudeFreq;
  const double roll = traj.attitudeAmp * std::sin(wa * t);
  const double rollRate = traj.attitudeAmp * wa * std::cos(wa * t);
  const double pitch = traj.attitudeAmp * std::cos(wa * t);
  const double pitchRate = -traj.attitudeAmp * wa * std::sin(wa * t);

  AnalyticState out;
  out.R = eulerZyx(yaw, pitch, roll);
  out.v = v;
  out.p = p;
  // Body rates for the z-y-x Euler chain.
  out.omegaBody = Vec3(rollRate - yawRate * std::sin(pitch),
                       pitchRate * std::cos(roll) + yawRate * std::cos(pitch) * std::sin(roll),
                       yawRate * std::cos(pitch) * std::cos(roll) - pitchRate * std::sin(roll));
  out.accelBody = out.R.transpose() * (a - gravity);
  return out;
}

SimLog synthesize(const TrajectoryConfig& traj, const SensorConfig& sensors, uint64_t seed) {
  if (sensors.imuRate <= 0.0 || sensors.gnssRate <= 0.0)
    throw std::invalid_argument("synthesize: rates must be positive");
  const double gnssEveryReal = sensors.imuRate / sensors.gnssRate;
  const int gnssEvery = static_cast<int>(std::round(gnssEveryReal));
  if (std::abs(gnssEveryReal - gnssEvery) > 1e-9 || gnssEvery < 1)
    throw std::invalid_argument("synthesize: imuRate must be an integer multiple of gnssRate");
  if (sensors.delay < 0.0) throw std::invalid_argument("synthesize: delay must be non-negative");

  SimLog log;
  log.imuDt = 1.0 / sensors.imuRate;
  log.delay = sensors.delay;
  log.seed = seed;
  log.traj = traj;
  log.sensors = sensors;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto randn3 = [&]() { return Vec3(gauss(rng), gauss(rng), gauss(rng)); };

  const int n = static_cast<int>(std::round(traj.duration * sensors.imuRate));
  const double dt = log.imuDt;
  const double gyroStd = sensors.gyroNoiseDensity * std::sqrt(sensors.imuRate);
  const double accelStd = sensors.accelNoiseDensity * std::sqrt(sensors.imuRate);

  Vec3 bg = sensors.gyroBiasInit;
  Vec3 ba = sensors.accelBiasInit;
  log.imu.reserve(n + 1);
  log.truth.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = k * dt;
    const AnalyticState s = analyticState(traj, t, sensors.gravity);
    log.truth.push_back(TruthSample{t, s.R, s.v, s.p, bg, ba});
    log.imu.push_back(ImuSample{t, s.omegaBody + bg + gyroStd * randn3(),
                                s.accelBody + ba + accelStd * randn3()});
    bg += sensors.gyroBiasWalk * std::sqrt(dt) * randn3();
    ba += sensors.accelBiasWalk * std::sqrt(dt) * randn3();
  }

  for (int m = gnssEvery; m <= n; m += gnssEvery) {
    const double tArrival = m * dt;
    const double tSensed = tArrival - sensors.delay;
    if (tSensed < 0.0) continue;
    const AnalyticState s = analyticState(traj, tSensed, sensors.gravity);
    const Vec3 y = s.R * sensors.leverArm + s.p + sensors.gnssPosStd * randn3();
    log.gnss.push_back(GnssSample{tArrival, y});
  }
  return log;
}

}  // namespace galins
