#pragma once

#include <cstdint>
#include <vector>

#include "galins/common.hpp"
#include "galins/preintegration.hpp"

namespace galins {

/// Closed-form test trajectory: a horizontal circle with sinusoidal ripple in
/// all three axes, heading following the velocity, and sinusoidal roll/pitch.
/// Every quantity below has an analytic derivative, so the emitted inertial
/// signals are exact rather than numerically differentiated.
struct TrajectoryConfig {
  double radius = 50.0;       ///< m
  double rate = 0.2;          ///< rad/s around the circle
  double horizWaveAmp = 5.0;  ///< m
  double horizWaveFreq = 0.5; ///< rad/s
  double vertWaveAmp = 3.0;   ///< m
  double vertWaveFreq = 0.7;  ///< rad/s
  double attitudeAmp = 0.3;   ///< rad roll/pitch excitation
  double attitudeFreq = 0.4;  ///< rad/s
  double duration = 60.0;     ///< s
};

struct SensorConfig {
  double imuRate = 200.0;            ///< Hz
  double gnssRate = 20.0;            ///< Hz
  double delay = 0.1;                ///< s, GNSS latency
  double gyroNoiseDensity = 0.005;   ///< rad/s/sqrt(Hz)
  double accelNoiseDensity = 0.05;   ///< m/s^2/sqrt(Hz)
  double gyroBiasWalk = 1e-4;        ///< rad/s/sqrt(s)
  double accelBiasWalk = 1e-4;       ///< m/s^2/sqrt(s)
  double gnssPosStd = 0.5;           ///< m
  Vec3 gyroBiasInit = Vec3::Zero();
  Vec3 accelBiasInit = Vec3::Zero();
  Vec3 leverArm = Vec3::Zero();      ///< GNSS antenna offset in the body frame
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  Vec3 earthRate = Vec3::Zero();
};

struct AnalyticState {
  Mat3 R;
  Vec3 v;
  Vec3 p;
  Vec3 omegaBody;
  Vec3 accelBody;  ///< specific force, R^T (a - gravity)
};

AnalyticState analyticState(const TrajectoryConfig& traj, double t,
                            const Vec3& gravity = Vec3(0.0, 0.0, -9.81));

struct TruthSample {
  double t;
  Mat3 R;
  Vec3 v;
  Vec3 p;
  Vec3 gyroBias;
  Vec3 accelBias;
};

struct GnssSample {
  double tArrival;
  Vec3 pos;  ///< world position sensed delay seconds before arrival
};

struct SimLog {
  double imuDt = 0.0;
  double delay = 0.0;
  uint64_t seed = 0;
  std::vector<ImuSample> imu;      ///< on the grid t = k * imuDt
  std::vector<TruthSample> truth;  ///< same grid as imu
  std::vector<GnssSample> gnss;
  TrajectoryConfig traj;
  SensorConfig sensors;
};

/// Samples the analytic trajectory at the IMU rate and corrupts the inertial
/// and GNSS channels with seeded noise. White noise is scaled by sqrt(rate),
/// bias random walks by sqrt(dt). GNSS arrivals start once the sensed instant
/// is non-negative and never at t = 0. Draw order is fixed (per IMU step:
/// gyro, accel, gyro walk, accel walk; then all GNSS draws), so a (config,
/// seed) pair fixes every emitted byte.
SimLog synthesize(const TrajectoryConfig& traj, const SensorConfig& sensors, uint64_t seed);

/// Per-run seed for a Monte Carlo batch.
inline uint64_t runSeed(uint64_t baseSeed, int run) { return baseSeed + static_cast<uint64_t>(run); }

}  // namespace galins
