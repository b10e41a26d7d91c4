#pragma once

#include <string>
#include <vector>

#include "galins/common.hpp"
#include "galins/metrics.hpp"
#include "galins/simulator.hpp"

namespace galins {

/// Parse or I/O failure with the offending file and, when known, line number.
struct CsvError : std::runtime_error {
  explicit CsvError(const std::string& what) : std::runtime_error(what) {}
};

/// One row of an estimate log: canonical scalar-first unit quaternion
/// (scalar kept non-negative), velocity, position, believed delay, and the
/// held value of the latest update-instant NEES.
struct EstimateRecord {
  double t = 0.0;
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  double deltaHat = 0.0;
  double nees = 0.0;
};

/// Logs read back from disk. Truth rows are optional; when absent the caller
/// falls back to innovation-only statistics.
struct IngestedLog {
  ImuWindow imu;
  std::vector<GnssSample> gnss;
  std::vector<TruthSample> truth;
  std::vector<double> truthDelay;  ///< same length as truth when present
  int droppedGnss = 0;             ///< arrivals before the first IMU sample
  bool hasTruth = false;
};

// Writers emit fixed-point decimals with '.' separators and LF line endings,
// so identical data produces identical bytes on every platform.
void writeImuCsv(const std::string& path, const std::vector<ImuSample>& imu);
void writeGnssCsv(const std::string& path, const std::vector<GnssSample>& gnss);
void writeTruthCsv(const std::string& path, const std::vector<TruthSample>& truth,
                   double delay);
void writeEstimateCsv(const std::string& path,
                      const std::vector<EstimateRecord>& rows);
void writeErrorCsv(const std::string& path, const ErrorSeries& series);

std::vector<ImuSample> readImuCsv(const std::string& path);
std::vector<GnssSample> readGnssCsv(const std::string& path);
void readTruthCsv(const std::string& path, std::vector<TruthSample>* truth,
                  std::vector<double>* delay);
std::vector<EstimateRecord> readEstimateCsv(const std::string& path);
ErrorSeries readErrorCsv(const std::string& path);

/// Write imu.csv, gnss.csv and truth.csv for a synthesized log.
void writeSimLog(const std::string& dir, const SimLog& log);

/// Load a log directory (imu.csv + gnss.csv, truth.csv optional). The IMU
/// stream is snapped to a uniform grid when timestamp jitter stays within 1%
/// of the nominal period; larger jitter raises CsvError. GNSS arrivals
/// before the first IMU timestamp are dropped and counted, with a warning on
/// the error stream.
IngestedLog ingestLog(const std::string& dir);

}  // namespace galins
