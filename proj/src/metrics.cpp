#include "galins/metrics.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "galins/so3.hpp"

namespace galins {

StepErrors stepErrors(const Se23& truth, double delayTruth, const Se23& estimate,
                      double delayEstimate) {
  StepErrors e;
  e.are = so3Log(Mat3(truth.R.transpose() * estimate.R)).norm();
  e.ave = (truth.v - estimate.v).norm();
  e.ape = (truth.p - estimate.p).norm();
  e.ade = std::abs(delayTruth - delayEstimate);
  return e;
}

double rmse(const std::vector<double>& series) {
  if (series.empty()) throw std::invalid_argument("rmse: empty series");
  double sum = 0.0;
  for (double e : series) sum += e * e;
  return std::sqrt(sum / static_cast<double>(series.size()));
}

double nees(const Eigen::VectorXd& eps, const Eigen::MatrixXd& sigma, int n) {
  if (n < 1 || sigma.rows() != eps.size() || sigma.cols() != eps.size()) {
    throw std::invalid_argument("nees: dimension mismatch");
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-9)) {
    throw std::invalid_argument("nees: sigma not symmetric");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("nees: sigma not positive definite");
  }
  return eps.dot(llt.solve(eps)) / static_cast<double>(n);
}

double median(std::vector<double> series) {
  if (series.empty()) throw std::invalid_argument("median: empty series");
  const size_t mid = series.size() / 2;
  std::nth_element(series.begin(), series.begin() + mid, series.end());
  double hi = series[mid];
  if (series.size() % 2 == 1) return hi;
  std::nth_element(series.begin(), series.begin() + mid - 1,
                   series.begin() + mid);
  return 0.5 * (series[mid - 1] + hi);
}

}  // namespace galins
