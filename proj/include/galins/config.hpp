#pragma once

#include <string>
#include <vector>

#include "galins/simulator.hpp"

namespace galins {

enum class Scenario { Simulate, Replay, TwoBody };

enum class FilterKind { Eqf, EkfNoDelay, EkfFixed, EkfOnline };

struct FilterSpec {
  FilterKind kind = FilterKind::Eqf;
  double fixedDelay = 0.0;  ///< seconds, EkfFixed only
  std::string name;         ///< canonical spelling, used in file names
};

/// Parses "eqf", "ekf-no-delay", "ekf-fixed:<seconds>", "ekf-online".
/// Throws std::invalid_argument on anything else or a negative fixed delay.
FilterSpec parseFilterSpec(const std::string& text);

/// Filter-side tuning, kept separate from the simulated sensor truth so a
/// filter can be detuned or tightened without touching the world.
struct FilterTuning {
  double gyroNoise = -1.0;        ///< process density; <0 copies the sensor value
  double accelNoise = -1.0;
  double gyroWalk = -1.0;
  double accelWalk = -1.0;
  double virtualWalk = 1e-8;      ///< density for the non-physical bias slots
  double delayWalk = 1e-3;        ///< believed-delay random walk density
  double measurementStd = -1.0;   ///< <0 copies the sensor GNSS std
  double initRotStd = 0.1;        ///< rad
  double initVelStd = 0.3;        ///< m/s
  double initPosStd = 1.0;        ///< m
  double initGyroBiasStd = 0.01;  ///< rad/s
  double initAccelBiasStd = 0.1;  ///< m/s^2
  double initDelayStd = 0.6;      ///< s
  double virtualBiasStd = 1e-4;   ///< prior std of the non-physical bias slots
  double bufferHorizon = 0.8;     ///< s of preintegration history
  double observerGain = 0.2;      ///< two-body scalar gain
  /// Optional per-block two-body gains (rotation, velocity, position, clock);
  /// empty keeps the scalar gain on every block.
  std::vector<double> observerGainBlocks;
};

struct RunConfig {
  int version = 1;
  Scenario scenario = Scenario::Simulate;
  std::vector<std::string> filters = {"eqf"};
  TrajectoryConfig traj;
  SensorConfig sensors;
  FilterTuning tuning;
  std::string logDir;             ///< replay input directory
  std::string outDir = "out";
  int runs = 1;
  uint64_t baseSeed = 1;
  bool emitRuns = true;           ///< write per-run CSV files
  /// Draw the initial estimate about the truth from the tuning priors
  /// (single runs; Monte Carlo batches always draw).
  bool perturbInit = false;
  std::vector<double> delaysMs = {100.0};  ///< montecarlo delay sweep
  double apeDivergenceThreshold = 100.0;   ///< m, flags an unusable estimate
  int threads = 0;                ///< montecarlo workers; 0 = runtime default
};

/// Effective config as a stable JSON document (sorted keys, schema version).
std::string printConfig(const RunConfig& cfg);

/// Parse a JSON document produced by printConfig (all fields optional,
/// defaults fill the gaps). Throws std::invalid_argument on malformed JSON,
/// unknown schema version, or type errors.
RunConfig parseConfig(const std::string& text);

/// Read and parse a config file; I/O failures raise std::invalid_argument.
RunConfig loadConfigFile(const std::string& path);

/// Cross-field invariants (replay needs a log dir, positive rates, valid
/// filter specs, ...). Throws std::invalid_argument.
void validateConfig(const RunConfig& cfg);

}  // namespace galins
