#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace galins {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Vec20 = Eigen::Matrix<double, 20, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat10 = Eigen::Matrix<double, 10, 10>;
using Mat20 = Eigen::Matrix<double, 20, 20>;

constexpr double kGravity = 9.81;

/// Thrown when a filter loses numerical health (non-finite state, singular
/// innovation covariance, covariance no longer positive definite).
class FilterDivergence : public std::runtime_error {
 public:
  FilterDivergence(const std::string& reason, double t)
      : std::runtime_error(reason + " at t=" + std::to_string(t)), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

}  // namespace galins
