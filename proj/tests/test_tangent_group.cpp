#include "galins/tangent_group.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace galins;
using galins::testing::centralDiff;
using galins::testing::denseExpm;
using galins::testing::makeRng;
using galins::testing::randomVec;

namespace {

Vec20 randomTangent20(std::mt19937_64& rng, double scale = 1.0) {
  Vec20 u;
  u.segment<3>(0) = randomVec<3>(rng, 0.8 * scale);
  u.segment<17>(3) = randomVec<17>(rng, scale);
  return u;
}

TangentGroup randomElement(std::mt19937_64& rng) {
  return TangentGroup::exp(randomTangent20(rng));
}

}  // namespace

TEST(TangentGroup, GroupLaws) {
  auto rng = makeRng(100);
  for (int i = 0; i < 1000; ++i) {
    const TangentGroup x = randomElement(rng);
    const TangentGroup y = randomElement(rng);
    const TangentGroup z = randomElement(rng);

    const TangentGroup lhs = (x * y) * z;
    const TangentGroup rhs = x * (y * z);
    EXPECT_LT((lhs.base.matrix() - rhs.base.matrix()).norm(), 1e-10);
    EXPECT_LT((lhs.fiber - rhs.fiber).norm(), 1e-10 * std::max(1.0, rhs.fiber.norm()));

    const TangentGroup e = x * x.inverse();
    EXPECT_LT((e.base.matrix() - Mat5::Identity()).norm(), 1e-11 * std::max(1.0, x.base.matrix().norm()));
    EXPECT_LT(e.fiber.norm(), 1e-10 * std::max(1.0, x.fiber.norm()));
  }
}

TEST(TangentGroup, IdentityIsNeutral) {
  auto rng = makeRng(101);
  const TangentGroup x = randomElement(rng);
  const TangentGroup a = x * TangentGroup::Identity();
  const TangentGroup b = TangentGroup::Identity() * x;
  EXPECT_LT((a.base.matrix() - x.base.matrix()).norm(), 1e-14);
  EXPECT_LT((a.fiber - x.fiber).norm(), 1e-14);
  EXPECT_LT((b.base.matrix() - x.base.matrix()).norm(), 1e-14);
  EXPECT_LT((b.fiber - x.fiber).norm(), 1e-14);
}

TEST(TangentGroup, FiberSubgroupIsAbelian) {
  auto rng = makeRng(102);
  const Vec10 a = randomVec<10>(rng, 2.0);
  const Vec10 b = randomVec<10>(rng, 2.0);
  const TangentGroup x{Gal3::Identity(), a};
  const TangentGroup y{Gal3::Identity(), b};
  EXPECT_LT(((x * y).fiber - (a + b)).norm(), 1e-15);
  EXPECT_LT(((y * x).fiber - (a + b)).norm(), 1e-15);
}

TEST(TangentGroup, ExpWithZeroBaseIsFiberTranslation) {
  auto rng = makeRng(103);
  Vec20 u = Vec20::Zero();
  u.segment<10>(10) = randomVec<10>(rng, 2.0);
  const TangentGroup x = TangentGroup::exp(u);
  EXPECT_LT((x.base.matrix() - Mat5::Identity()).norm(), 1e-15);
  EXPECT_LT((x.fiber - u.segment<10>(10)).norm(), 1e-15);
}

TEST(TangentGroup, LogInvertsExp) {
  auto rng = makeRng(104);
  for (int i = 0; i < 500; ++i) {
    const Vec20 u = randomTangent20(rng);
    EXPECT_LT((TangentGroup::exp(u).log() - u).norm(), 1e-9);
  }
}

// The product group embeds in GL(11) through (Ad of the base, fiber column);
// its exponential must agree with the dense matrix exponential of the
// corresponding 11x11 algebra element.
TEST(TangentGroup, ExpMatchesEmbeddingExponential) {
  auto rng = makeRng(105);
  using Mat11 = Eigen::Matrix<double, 11, 11>;
  for (int i = 0; i < 100; ++i) {
    const Vec20 u = randomTangent20(rng);
    Mat11 m = Mat11::Zero();
    m.block<10, 10>(0, 0) = adMatrix(u.segment<10>(0));
    m.block<10, 1>(0, 10) = u.segment<10>(10);
    const Mat11 e = denseExpm<Mat11>(m);
    const TangentGroup x = TangentGroup::exp(u);
    EXPECT_LT((x.base.Ad() - e.block<10, 10>(0, 0)).norm(), 1e-9);
    EXPECT_LT((x.fiber - e.block<10, 1>(0, 10)).norm(), 1e-9);
  }
}

TEST(TangentGroup, LeftJacobianAtZeroIsIdentity) {
  EXPECT_LT((leftJacobian20(Vec20::Zero()) - Mat20::Identity()).norm(), 1e-15);
}

TEST(TangentGroup, LeftJacobianMatchesFiniteDifference) {
  auto rng = makeRng(106);
  for (int i = 0; i < 20; ++i) {
    const Vec20 u = randomTangent20(rng, 0.8);
    const Mat20 jl = leftJacobian20(u);
    for (int c = 0; c < 20; ++c) {
      Vec20 w = Vec20::Zero();
      w(c) = 1.0;
      const Vec20 fd = centralDiff([&](double s) -> Vec20 {
        return (TangentGroup::exp(u + s * w) * TangentGroup::exp(u).inverse()).log();
      });
      EXPECT_LT((jl.col(c) - fd).norm(), 1e-6);
    }
  }
}
