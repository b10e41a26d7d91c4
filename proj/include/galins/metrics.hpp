#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "galins/common.hpp"
#include "galins/se23.hpp"

namespace galins {

/// Per-timestep error magnitudes between a truth and an estimated navigation
/// state: rotation angle (rad), velocity (m/s), position (m), delay (s).
struct StepErrors {
  double are = 0.0;
  double ave = 0.0;
  double ape = 0.0;
  double ade = 0.0;
};

StepErrors stepErrors(const Se23& truth, double delayTruth, const Se23& estimate,
                      double delayEstimate);

/// Root mean square of a scalar error series. Throws std::invalid_argument on
/// an empty series.
double rmse(const std::vector<double>& series);

/// Normalized estimation error squared, eps' * sigma^-1 * eps / n, solved via
/// a factorization rather than an explicit inverse. Throws
/// std::invalid_argument when sigma is not symmetric positive definite.
double nees(const Eigen::VectorXd& eps, const Eigen::MatrixXd& sigma, int n);

/// Median of a scalar series (average of middle pair for even sizes). Throws
/// std::invalid_argument on an empty series.
double median(std::vector<double> series);

struct ErrorRecord {
  double t = 0.0;
  double are = 0.0;
  double ave = 0.0;
  double ape = 0.0;
  double ade = 0.0;
  double nees = 0.0;  ///< held value of the latest update-instant NEES
};

/// Error series of one filter run. Rotation/velocity/position/delay errors
/// are recorded at every propagation step; NEES is computed where the
/// covariance was just refreshed (update instants), held constant in the
/// per-step records, and kept separately for summary statistics.
struct ErrorSeries {
  std::string filter;
  int dim = 0;          ///< error-state dimension the NEES is normalized by
  uint64_t seed = 0;
  std::vector<ErrorRecord> steps;
  std::vector<std::pair<double, double>> neesAtUpdates;  ///< (t, nees)
};

}  // namespace galins
