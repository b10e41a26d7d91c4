#include "galins/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "galins/so3.hpp"
#include "oracles.hpp"

using namespace galins;
using galins::testing::makeRng;
using galins::testing::randomVec;

namespace {

Se23 someState() {
  return Se23{so3Exp(Vec3(0.3, -0.2, 0.5)), Vec3(1.0, 2.0, -0.5),
              Vec3(10.0, -4.0, 2.0)};
}

Eigen::MatrixXd randomSpd(std::mt19937_64& rng, int n) {
  Eigen::MatrixXd a(n, n);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = dist(rng);
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST(StepErrorsFn, ZeroAtTruth) {
  const Se23 x = someState();
  const StepErrors e = stepErrors(x, 0.12, x, 0.12);
  EXPECT_EQ(e.are, 0.0);
  EXPECT_EQ(e.ave, 0.0);
  EXPECT_EQ(e.ape, 0.0);
  EXPECT_EQ(e.ade, 0.0);
}

TEST(StepErrorsFn, RotationErrorIsAxisAngleNorm) {
  const Se23 truth = someState();
  Se23 est = truth;
  est.R = truth.R * so3Exp(Vec3(0.0, 0.0, 0.1));
  const StepErrors e = stepErrors(truth, 0.0, est, 0.0);
  EXPECT_NEAR(e.are, 0.1, 1e-12);
}

TEST(StepErrorsFn, ComponentArithmetic) {
  const Se23 truth = someState();
  Se23 est = truth;
  est.v += Vec3(0.3, 0.0, -0.4);
  est.p += Vec3(0.0, 1.2, 0.0);
  const StepErrors e = stepErrors(truth, 0.12, est, 0.09);
  EXPECT_NEAR(e.ave, 0.5, 1e-12);
  EXPECT_NEAR(e.ape, 1.2, 1e-12);
  EXPECT_NEAR(e.ade, 0.03, 1e-12);
}

TEST(RmseFn, PinnedValues) {
  EXPECT_EQ(rmse({0.0, 0.0, 0.0}), 0.0);
  EXPECT_NEAR(rmse({3.0, 4.0}), std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(rmse({0.7, 0.7, 0.7, 0.7}), 0.7, 1e-12);
  EXPECT_THROW(rmse({}), std::invalid_argument);
}

TEST(RmseFn, SquareIsMeanOfSquares) {
  auto rng = makeRng(600);
  std::vector<double> series;
  double sumSq = 0.0;
  for (int i = 0; i < 257; ++i) {
    const double e = randomVec<1>(rng, 5.0)(0);
    series.push_back(e);
    sumSq += e * e;
  }
  const double r = rmse(series);
  EXPECT_NEAR(r * r, sumSq / series.size(), 1e-12);
}

TEST(NeesFn, PinnedValues) {
  const int n = 7;
  EXPECT_EQ(nees(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n), n),
            0.0);
  EXPECT_NEAR(
      nees(Eigen::VectorXd::Ones(n), Eigen::MatrixXd::Identity(n, n), n), 1.0,
      1e-12);
}

TEST(NeesFn, CongruenceInvariance) {
  auto rng = makeRng(601);
  const int n = 12;
  const Eigen::MatrixXd sigma = randomSpd(rng, n);
  Eigen::VectorXd eps(n);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int i = 0; i < n; ++i) eps(i) = dist(rng);

  Eigen::MatrixXd j = randomSpd(rng, n);  // SPD is invertible
  j(0, 3) += 2.0;                         // break symmetry too
  const double direct = nees(eps, sigma, n);
  const double mapped = nees(j * eps, j * sigma * j.transpose(), n);
  EXPECT_NEAR(mapped, direct, 1e-9 * std::max(1.0, direct));
}

TEST(NeesFn, RejectsBadInputs) {
  const int n = 4;
  Eigen::MatrixXd notSpd = Eigen::MatrixXd::Identity(n, n);
  notSpd(2, 2) = -1.0;
  EXPECT_THROW(nees(Eigen::VectorXd::Ones(n), notSpd, n),
               std::invalid_argument);

  Eigen::MatrixXd notSym = Eigen::MatrixXd::Identity(n, n);
  notSym(0, 1) = 0.5;
  EXPECT_THROW(nees(Eigen::VectorXd::Ones(n), notSym, n),
               std::invalid_argument);

  EXPECT_THROW(nees(Eigen::VectorXd::Ones(n),
                    Eigen::MatrixXd::Identity(n + 1, n + 1), n),
               std::invalid_argument);
}

// Samples drawn from the distribution the covariance claims should score a
// median NEES near the chi-square median over the dimension.
TEST(NeesFn, ChiSquareEnsembleOracle) {
  auto rng = makeRng(602);
  const int n = 20;
  const Eigen::MatrixXd sigma = randomSpd(rng, n);
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();

  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> scores;
  double mean = 0.0;
  const int m = 4000;
  for (int k = 0; k < m; ++k) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = dist(rng);
    const double s = nees(chol * z, sigma, n);
    scores.push_back(s);
    mean += s / m;
  }
  // median(chi2_20)/20 = 0.9669
  EXPECT_NEAR(median(scores), 0.967, 0.05);
  EXPECT_NEAR(mean, 1.0, 0.03);
}

TEST(MedianFn, OddAndEvenSizes) {
  EXPECT_EQ(median({3.0}), 3.0);
  EXPECT_EQ(median({5.0, 1.0, 3.0}), 3.0);
  EXPECT_NEAR(median({4.0, 1.0, 3.0, 2.0}), 2.5, 1e-15);
  EXPECT_THROW(median({}), std::invalid_argument);
}
