#include "support.hpp"

#include <gtest/gtest.h>

using namespace bdp;

namespace {

Mat diag(double a, double b) {
  Mat A = Mat::Zero(2, 2);
  A(0, 0) = a;
  A(1, 1) = b;
  return A;
}

SmoothMap half_plus_eighth_square() { return polynomial_map({{{0.5, {1}}, {0.125, {2}}}}, "x/2 + x^2/8"); }

Mat random_invertible(std::mt19937_64& rng, Eigen::Index d) {
  Mat A;
  do {
    A = Mat::NullaryExpr(d, d, [&] { return test::uniform(rng, -1.0, 1.0); });
  } while (std::abs(A.determinant()) < 1e-3);
  return A;
}

}  // namespace

TEST(ApplySequence, IdentityOrbitIsConstant) {
  const auto orbit = apply_sequence(MapSequence::repeat(identity_map(2), 3), Vec{{0.5, 0.5}});
  ASSERT_EQ(orbit.size(), 4u);
  for (const auto& p : orbit) EXPECT_EQ(p, (Vec{{0.5, 0.5}}));
}

TEST(ApplySequence, Halving) {
  const auto orbit = apply_sequence(MapSequence::repeat(affine_map(Mat::Constant(1, 1, 0.5), Vec::Zero(1)), 3),
                                    Vec::Constant(1, 1.0));
  ASSERT_EQ(orbit.size(), 4u);
  EXPECT_EQ(orbit[0][0], 1.0);
  EXPECT_EQ(orbit[1][0], 0.5);
  EXPECT_EQ(orbit[2][0], 0.25);
  EXPECT_EQ(orbit[3][0], 0.125);
}

TEST(ApplySequence, RandomAffineMatchesStepByStepComposition) {
  std::mt19937_64 rng(42);
  std::vector<Mat> As;
  std::vector<Vec> bs;
  std::vector<SmoothMap> maps;
  for (int i = 0; i < 10; ++i) {
    As.push_back(random_invertible(rng, 2));
    bs.push_back(test::random_vec(rng, 2));
    maps.push_back(affine_map(As.back(), bs.back()));
  }
  const Vec x0{{0.3, -0.7}};
  const auto orbit = apply_sequence(MapSequence(maps), x0);
  Vec x = x0;
  for (int i = 0; i < 10; ++i) {
    x = As[static_cast<std::size_t>(i)] * x + bs[static_cast<std::size_t>(i)];
    EXPECT_EQ(orbit[static_cast<std::size_t>(i) + 1], x);
  }
}

TEST(ApplySequence, ReportsFailingStep) {
  const SmoothMap grow = affine_map(Mat::Constant(1, 1, 2.0), Vec::Zero(1)).with_region(Box::cube(1, -1.0, 1.0));
  try {
    apply_sequence(MapSequence::repeat(grow, 5), Vec::Constant(1, 0.3));
    FAIL() << "expected OutOfRegionError";
  } catch (const OutOfRegionError& e) {
    ASSERT_TRUE(e.step().has_value());
    EXPECT_EQ(*e.step(), 3u);  // 0.3 -> 0.6 -> 1.2, and f_3 is evaluated at 1.2
  }
}

TEST(MapSequence, RejectsEmptyAndMixedDimensions) {
  EXPECT_THROW(MapSequence(std::vector<SmoothMap>{}), InputError);
  EXPECT_THROW(MapSequence({identity_map(1), identity_map(2)}), DimensionError);
}

TEST(OperatorNorm, Examples) {
  EXPECT_DOUBLE_EQ(operator_norm(diag(3, 4)), 4.0);
  for (int d = 1; d <= 4; ++d) EXPECT_DOUBLE_EQ(operator_norm(Mat::Identity(d, d)), 1.0);
  Mat P(2, 2);
  P << 0, 1, 1, 0;
  EXPECT_DOUBLE_EQ(operator_norm(P), 1.0);
}

TEST(OperatorNorm, MatchesPowerIteration) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat A = Mat::NullaryExpr(3, 3, [&] { return test::uniform(rng, -2.0, 2.0); });
    EXPECT_NEAR(operator_norm(A), test::power_iteration_norm(A), 1e-9);
  }
}

TEST(OperatorNorm, Submultiplicative) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 1 + trial % 4;
    const Mat A = Mat::NullaryExpr(d, d, [&] { return test::uniform(rng, -2.0, 2.0); });
    const Mat B = Mat::NullaryExpr(d, d, [&] { return test::uniform(rng, -2.0, 2.0); });
    EXPECT_LE(operator_norm(A * B), operator_norm(A) * operator_norm(B) + 1e-12);
  }
}

TEST(InverseJacobianNorm, Examples) {
  EXPECT_DOUBLE_EQ(inverse_jacobian_norm(identity_map(3), Vec{{1.0, 2.0, 3.0}}), 1.0);
  EXPECT_DOUBLE_EQ(inverse_jacobian_norm(affine_map(diag(2.0, 0.5), Vec::Zero(2)), Vec::Zero(2)), 2.0);
  // f'(0) = 1/2
  EXPECT_DOUBLE_EQ(inverse_jacobian_norm(half_plus_eighth_square(), Vec::Zero(1)), 2.0);
}

TEST(InverseJacobianNorm, SingularJacobianThrows) {
  EXPECT_THROW(inverse_jacobian_norm(affine_map(diag(1.0, 0.0), Vec::Zero(2)), Vec::Zero(2)), SingularJacobianError);
  // f(x) = x^3 at 0
  EXPECT_THROW(inverse_jacobian_norm(polynomial_map({{{1.0, {3}}}}), Vec::Zero(1)), SingularJacobianError);
  EXPECT_THROW(inverse_operator_norm(diag(1.0, 1e-15)), SingularJacobianError);
  EXPECT_NO_THROW(inverse_operator_norm(diag(1.0, 1e-13)));
}

TEST(InverseJacobianNorm, LowerBoundsVectorShrinkageOnRandomMatrices) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 1 + trial % 4;
    const Mat A = random_invertible(rng, d);
    const Vec v = test::random_vec(rng, d);
    EXPECT_LE(v.norm() / (A * v).norm(), inverse_operator_norm(A) + 1e-12);
  }
}

TEST(EstimateSeminorms, AffineOneDimensional) {
  const SmoothMap f = affine_map(Mat::Constant(1, 1, 0.5), Vec::Constant(1, 0.2));
  for (const auto& est : {estimate_seminorms(f, Box::cube(1, 0, 1), 5), sample_seminorms(f, Box::cube(1, 0, 1), 5)}) {
    EXPECT_DOUBLE_EQ(est.c1, 0.5);
    EXPECT_DOUBLE_EQ(est.c1_inv, 2.0);
    EXPECT_EQ(est.c2, 0.0);
  }
  EXPECT_EQ(estimate_seminorms(f, Box::cube(1, 0, 1), 5).provenance, Provenance::analytic);
  EXPECT_EQ(sample_seminorms(f, Box::cube(1, 0, 1), 5).provenance, Provenance::sampled);
}

TEST(EstimateSeminorms, RotationIsAnIsometry) {
  for (double angle : {0.0, 0.3, 2.0, -1.0}) {
    const auto est = sample_seminorms(rotation_map(angle), Box::cube(2, -3, 5), 4);
    EXPECT_NEAR(est.c1, 1.0, 1e-14);
    EXPECT_NEAR(est.c1_inv, 1.0, 1e-14);
    EXPECT_EQ(est.c2, 0.0);
  }
}

TEST(EstimateSeminorms, QuadraticOnUnitInterval) {
  // f' = 1/2 + x/4 in [1/2, 3/4], f'' = 1/4
  const auto est = sample_seminorms(half_plus_eighth_square(), Box::cube(1, 0, 1), 9);
  EXPECT_DOUBLE_EQ(est.c1, 0.75);
  EXPECT_DOUBLE_EQ(est.c1_inv, 2.0);
  EXPECT_DOUBLE_EQ(est.c2, 0.25);
  // the differenced path agrees to finite-difference accuracy
  const auto fd = sample_seminorms(test::strip_analytic(half_plus_eighth_square()), Box::cube(1, 0, 1), 9);
  EXPECT_NEAR(fd.c1, 0.75, 1e-9);
  EXPECT_NEAR(fd.c1_inv, 2.0, 1e-9);
  EXPECT_NEAR(fd.c2, 0.25, 1e-6);
}

TEST(EstimateSeminorms, AnnotatedMapReturnsAnalyticBounds) {
  const SmoothMap f = quadratic_1d_map(0.5, 0.125);
  const auto est = estimate_seminorms(f, Box::cube(1, 0, 1), 3, 0.5);
  EXPECT_EQ(est.provenance, Provenance::analytic);
  EXPECT_DOUBLE_EQ(est.c1, 0.75);
  EXPECT_DOUBLE_EQ(est.c1_inv, 2.0);
  EXPECT_DOUBLE_EQ(est.c2, 0.25);
  ASSERT_TRUE(est.holder);
  EXPECT_DOUBLE_EQ(est.holder->value, 0.25);
  EXPECT_DOUBLE_EQ(est.constant(), 2.0);
}

TEST(EstimateSeminorms, SingularJacobianFlagsInfiniteInverse) {
  const auto est = sample_seminorms(polynomial_map({{{1.0, {3}}}}), Box::cube(1, -1, 1), 5);
  EXPECT_TRUE(est.singular);
  EXPECT_TRUE(std::isinf(est.c1_inv));
}

TEST(EstimateSeminorms, InvalidArguments) {
  const SmoothMap f = identity_map(2);
  EXPECT_THROW(sample_seminorms(f, Box::cube(2, 0, 1), 1), InputError);
  EXPECT_THROW(sample_seminorms(f, Box(Vec{{0.0, 0.0}}, Vec{{1.0, 0.0}}), 3), InputError);
  EXPECT_THROW(sample_seminorms(f, Box::cube(2, 0, 1), 3, 1.5), InputError);
  EXPECT_THROW(sample_seminorms(f, Box::cube(3, 0, 1), 3), DimensionError);
}

TEST(EstimateSeminorms, AffineMapsHaveZeroSecondAndHolderSeminorms) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index d = 1 + trial % 3;
    const SmoothMap f = affine_map(random_invertible(rng, d), test::random_vec(rng, d));
    for (double eps : {0.1, 0.5, 0.9}) {
      const auto est = sample_seminorms(f, Box::cube(d, -1, 1), 4, eps);
      EXPECT_EQ(est.c2, 0.0);
      ASSERT_TRUE(est.holder);
      EXPECT_EQ(est.holder->value, 0.0);
    }
  }
}

TEST(EstimateSeminorms, MonotoneUnderGridRefinement) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 6; ++trial) {
    const int d = 1 + trial % 2;
    const SmoothMap f = polynomial_map(test::random_polynomial(rng, d, 3));
    const Box region = Box::cube(d, -0.8, 0.9);
    // a grid with r points per axis is a subset of the grid with 2r - 1 points
    int r = 3;
    auto prev = sample_seminorms(f, region, r, 0.5);
    for (int k = 0; k < 3; ++k) {
      r = 2 * r - 1;
      const auto next = sample_seminorms(f, region, r, 0.5);
      EXPECT_GE(next.c1, prev.c1);
      EXPECT_GE(next.c1_inv, prev.c1_inv);
      EXPECT_GE(next.c2, prev.c2);
      EXPECT_GE(next.holder->value, prev.holder->value);
      prev = next;
    }
  }
}

TEST(EstimateSeminorms, HolderOfQuadraticMatchesClosedForm) {
  // f(x) = x^2 on [0, 1]: sup |2x - 2y| / |x - y|^eps = 2 at x, y = 0, 1
  const auto est = sample_seminorms(polynomial_map({{{1.0, {2}}}}), Box::cube(1, 0, 1), 17, 0.5);
  EXPECT_NEAR(est.holder->value, 2.0, 1e-12);
}

TEST(SmoothMap, InverseConsistency) {
  std::mt19937_64 rng(10);
  ShearParams p;
  p.scale = 0.45;
  p.angle = 0.4;
  p.shear = 0.08;
  p.shift = Vec{{0.05, -0.03}};
  const std::vector<std::pair<SmoothMap, Box>> cases{
      {contraction_shear_map(p), Box::cube(2, -1.5, 1.5)},
      {quadratic_1d_map(0.5, 0.125, 0.1), Box::cube(1, 0, 1)},
      {quadratic_1d_map(0.5, -0.1, 0.2), Box::cube(1, 0, 1)},
      {trace_map(), Box::cube(3, -1.1, 1.1)},
      {trace_map_swapped(), Box::cube(3, -1.1, 1.1)},
      {affine_map(random_invertible(rng, 3), test::random_vec(rng, 3)), Box::cube(3, -2, 2)},
  };
  for (const auto& [f, box] : cases) {
    ASSERT_TRUE(f.has_inverse()) << f.name();
    for (int k = 0; k < 50; ++k) {
      const Vec x = box.lower + (box.upper - box.lower).cwiseProduct(
                                    (test::random_vec(rng, box.dimension()) + Vec::Ones(box.dimension())) / 2.0);
      EXPECT_LE((f.inverse(f(x)) - x).norm(), 1e-9) << f.name();
    }
  }
}

TEST(SmoothMap, BuildersReturnModifiedCopies) {
  const SmoothMap f = identity_map(2);
  const SmoothMap g = f.with_name("renamed").with_region(Box::cube(2, 0, 1));
  EXPECT_EQ(f.name(), "identity");
  EXPECT_FALSE(f.region().has_value());
  EXPECT_EQ(g.name(), "renamed");
  EXPECT_TRUE(g.region().has_value());
  EXPECT_NE(f.identity(), g.identity());
  const SmoothMap copy = g;
  EXPECT_EQ(copy.identity(), g.identity());
}

TEST(SmoothMap, PolynomialValidation) {
  EXPECT_THROW(polynomial_map({}), DimensionError);
  EXPECT_THROW(polynomial_map({{{1.0, {1, 0}}}}), DimensionError);
  EXPECT_THROW(polynomial_map({{{1.0, {-1}}}}), InputError);
}
