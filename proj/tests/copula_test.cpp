#include "copulalab/copula.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "copulalab/errors.hpp"
#include "copulalab/grid.hpp"
#include "test_support.hpp"

namespace copulalab {
namespace {

std::vector<CopulaSpec> sample_families() {
  return {CopulaSpec::independence(),
          CopulaSpec::lower_bound(),
          CopulaSpec::upper_bound(),
          CopulaSpec::frechet(0.2, 0.3),
          CopulaSpec::frechet(0.7, 0.1),
          CopulaSpec::mardia(-0.6),
          CopulaSpec::marshall_olkin(0.5, 0.5),
          CopulaSpec::marshall_olkin(0.3, 0.6),
          CopulaSpec::marshall_olkin(0.0, 0.8),
          CopulaSpec::mixture({0.2, 0.3, 0.5}, {CopulaSpec::lower_bound(), CopulaSpec::upper_bound(),
                                                CopulaSpec::marshall_olkin(0.4, 0.9)})};
}

TEST(EvalCdf, Examples) {
  EXPECT_DOUBLE_EQ(eval_cdf(CopulaSpec::upper_bound(), 0.3, 0.7), 0.3);
  EXPECT_NEAR(eval_cdf(CopulaSpec::frechet(0.2, 0.3), 0.5, 0.5), 0.275, 1e-15);
  for (const auto& spec : sample_families()) {
    EXPECT_NEAR(eval_cdf(spec, 0.42, 1.0), 0.42, 1e-15) << spec.type_name();
    EXPECT_NEAR(eval_cdf(spec, 1.0, 0.42), 0.42, 1e-15) << spec.type_name();
    EXPECT_EQ(eval_cdf(spec, 0.0, 0.6), 0.0);
    EXPECT_EQ(eval_cdf(spec, 0.6, 0.0), 0.0);
  }
}

TEST(EvalCdf, RejectsPointsOutsideSquare) {
  EXPECT_THROW(eval_cdf(CopulaSpec::independence(), 1.2, 0.5), ValidationError);
}

TEST(EvalCdf, RectangleInequalityAndLipschitz) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& spec : sample_families()) {
    std::vector<double> xs(20), ys(20);
    for (auto& v : xs) v = unit(rng);
    for (auto& v : ys) v = unit(rng);
    for (double x1 : xs) {
      for (double x2 : xs) {
        if (!(x1 < x2)) continue;
        for (double y1 : ys) {
          for (double y2 : ys) {
            if (!(y1 < y2)) continue;
            const double vol = eval_cdf(spec, x2, y2) - eval_cdf(spec, x1, y2) -
                               eval_cdf(spec, x2, y1) + eval_cdf(spec, x1, y1);
            ASSERT_GE(vol, -1e-12) << spec.type_name();
          }
          ASSERT_LE(std::abs(eval_cdf(spec, x2, y1) - eval_cdf(spec, x1, y1)), x2 - x1 + 1e-12);
        }
      }
    }
  }
}

TEST(EvalCdf, MixtureIsWeightedSum) {
  const std::vector<CopulaSpec> parts{CopulaSpec::lower_bound(), CopulaSpec::upper_bound(),
                                      CopulaSpec::marshall_olkin(0.3, 0.6)};
  const auto mix = CopulaSpec::mixture({0.2, 0.3, 0.5}, parts);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double x = unit(rng), y = unit(rng);
    const double expected = 0.2 * eval_cdf(parts[0], x, y) + 0.3 * eval_cdf(parts[1], x, y) +
                            0.5 * eval_cdf(parts[2], x, y);
    EXPECT_NEAR(eval_cdf(mix, x, y), expected, 1e-15);
  }
}

TEST(EvalCdf, MardiaIsFrechetMember) {
  for (double theta : {-1.0, -0.6, 0.0, 0.3, 0.9, 1.0}) {
    const double t2 = theta * theta;
    const auto frechet = CopulaSpec::frechet(t2 * (1 - theta) / 2, t2 * (1 + theta) / 2);
    const auto mardia = CopulaSpec::mardia(theta);
    for (double x : {0.1, 0.37, 0.5, 0.8}) {
      for (double y : {0.05, 0.5, 0.63, 0.99}) {
        EXPECT_NEAR(eval_cdf(mardia, x, y), eval_cdf(frechet, x, y), 1e-15);
      }
    }
  }
}

TEST(Validation, NamesViolatedConstraint) {
  try {
    CopulaSpec::frechet(0.7, 0.7);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("a+b <= 1 violated"), std::string::npos) << e.what();
  }
  EXPECT_THROW(CopulaSpec::frechet(-0.1, 0.2), ValidationError);
  EXPECT_THROW(CopulaSpec::mardia(1.5), ValidationError);
  EXPECT_THROW(CopulaSpec::marshall_olkin(0.5, 1.2), ValidationError);
  EXPECT_THROW(CopulaSpec::mixture({0.5, 0.6}, {CopulaSpec::independence(), CopulaSpec::upper_bound()}),
               ValidationError);
  EXPECT_THROW(CopulaSpec::mixture({1.0, 0.0}, {CopulaSpec::independence(), CopulaSpec::upper_bound()}),
               ValidationError);
  EXPECT_THROW(CopulaSpec::mixture({}, {}), ValidationError);
  EXPECT_NO_THROW(CopulaSpec::mixture({0.1, 0.2, 0.7}, {CopulaSpec::independence(),
                                                        CopulaSpec::upper_bound(),
                                                        CopulaSpec::lower_bound()}));
}

TEST(AcDensity, Examples) {
  EXPECT_DOUBLE_EQ(*eval_ac_density(CopulaSpec::frechet(0.2, 0.3), 0.4, 0.7), 0.5);
  EXPECT_DOUBLE_EQ(*eval_ac_density(CopulaSpec::independence(), 0.13, 0.77), 1.0);
  // (0.25, 0.81) lies above the curve y^a = x^b, where C = x y^(1-a):
  // density (1-a) y^(-a) = 0.5 / 0.9.
  EXPECT_NEAR(*eval_ac_density(CopulaSpec::marshall_olkin(0.5, 0.5), 0.25, 0.81), 5.0 / 9.0,
              1e-15);
}

TEST(AcDensity, SingularSupportMarker) {
  const auto f = CopulaSpec::frechet(0.2, 0.3);
  EXPECT_FALSE(eval_ac_density(f, 0.4, 0.4).has_value());
  EXPECT_FALSE(eval_ac_density(f, 0.4, 0.6).has_value());
  EXPECT_FALSE(eval_ac_density(CopulaSpec::marshall_olkin(0.5, 0.5), 0.25, 0.25).has_value());
  EXPECT_DOUBLE_EQ(*eval_ac_density(CopulaSpec::upper_bound(), 0.2, 0.7), 0.0);
  EXPECT_THROW(eval_ac_density(CopulaSpec::independence(), 0.0, 0.5), ValidationError);
  auto grid = std::make_shared<const GridCopula>(discretize(CopulaSpec::independence(), 2));
  EXPECT_THROW(eval_ac_density(CopulaSpec::grid(grid), 0.3, 0.3), UnsupportedError);
}

// Central mixed difference of the CDF: an independent route to the density.
double mixed_difference(const CopulaSpec& spec, double x, double y, double h) {
  return (eval_cdf(spec, x + h, y + h) - eval_cdf(spec, x - h, y + h) -
          eval_cdf(spec, x + h, y - h) + eval_cdf(spec, x - h, y - h)) /
         (4 * h * h);
}

TEST(AcDensity, MatchesMixedDifferenceOffSupport) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (const auto& spec : {CopulaSpec::marshall_olkin(0.5, 0.5), CopulaSpec::marshall_olkin(0.3, 0.6),
                           CopulaSpec::frechet(0.2, 0.3)}) {
    int checked = 0;
    while (checked < 50) {
      const double x = unit(rng), y = unit(rng);
      const auto d = eval_ac_density(spec, x, y);
      if (!d) continue;
      const double h = 1e-5;
      const auto* mo = spec.get_if<family::MarshallOlkin>();
      if (mo && std::abs(std::pow(y, mo->a) - std::pow(x, mo->b)) < 1e-3) continue;
      if (!mo && (std::abs(x - y) < 1e-3 || std::abs(x + y - 1) < 1e-3)) continue;
      EXPECT_NEAR(mixed_difference(spec, x, y, h), *d, 1e-4) << x << "," << y;
      ++checked;
    }
  }
}

TEST(AcDensity, MarshallOlkinLowerBound) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(1e-6, 1 - 1e-6);
  for (int k = 0; k < 1000; ++k) {
    const double a = unit(rng), b = unit(rng), x = unit(rng), y = unit(rng);
    const auto d = eval_ac_density(CopulaSpec::marshall_olkin(a, b), x, y);
    if (d) EXPECT_GE(*d, std::min(1 - a, 1 - b) - 1e-12);
  }
}

TEST(ConditionalCdf, Examples) {
  EXPECT_DOUBLE_EQ(conditional_cdf(CopulaSpec::independence(), 0.3, 0.6), 0.6);
  EXPECT_NEAR(conditional_cdf(CopulaSpec::frechet(0.2, 0.3), 0.4, 0.5), 0.55, 1e-15);
  const auto m = CopulaSpec::upper_bound();
  EXPECT_EQ(conditional_cdf(m, 0.4, 0.39), 0.0);
  EXPECT_EQ(conditional_cdf(m, 0.4, 0.4), 1.0);  // right-continuous at the jump
  EXPECT_EQ(conditional_cdf(m, 0.4, 0.9), 1.0);
  EXPECT_EQ(conditional_cdf(CopulaSpec::lower_bound(), 0.4, 0.6), 1.0);
  EXPECT_EQ(conditional_cdf(CopulaSpec::lower_bound(), 0.4, 0.59), 0.0);
}

TEST(ConditionalCdf, MonotoneWithUnitEndpoint) {
  for (const auto& spec : {CopulaSpec::frechet(0.2, 0.3), CopulaSpec::marshall_olkin(0.3, 0.6),
                           CopulaSpec::marshall_olkin(0.5, 0.5), CopulaSpec::mardia(0.8)}) {
    for (double x : {0.05, 0.3, 0.5, 0.77}) {
      double prev = 0.0;
      for (int k = 0; k <= 200; ++k) {
        const double v = conditional_cdf(spec, x, k / 200.0);
        EXPECT_GE(v, prev - 1e-15);
        prev = v;
      }
      EXPECT_NEAR(conditional_cdf(spec, x, 1.0), 1.0, 1e-15);
    }
  }
}

TEST(ConditionalCdf, IntegratesToUniform) {
  constexpr int kPoints = 10000;
  for (const auto& spec : sample_families()) {
    for (double y : {0.1, 0.25, 0.5, 0.9}) {
      double total = 0.0;
      for (int k = 0; k < kPoints; ++k) total += conditional_cdf(spec, (k + 0.5) / kPoints, y);
      EXPECT_NEAR(total / kPoints, y, 1e-3) << spec.type_name() << " y=" << y;
    }
  }
}

TEST(ConditionalCdf, MarshallOlkinMatchesDerivative) {
  const auto spec = CopulaSpec::marshall_olkin(0.3, 0.6);
  for (double x : {0.2, 0.5, 0.8}) {
    for (double y : {0.1, 0.4, 0.95}) {
      const double h = 1e-7;
      const double numeric = (eval_cdf(spec, x + h, y) - eval_cdf(spec, x - h, y)) / (2 * h);
      EXPECT_NEAR(conditional_cdf(spec, x, y), numeric, 1e-6);
    }
  }
}

TEST(FrechetFoldParams, Examples) {
  auto p = frechet_fold_params(0.2, 0.3, 1);
  EXPECT_NEAR(p.a_n, 0.2, 1e-15);
  EXPECT_NEAR(p.b_n, 0.3, 1e-15);
  p = frechet_fold_params(0.2, 0.3, 2);
  EXPECT_NEAR(p.a_n, 0.12, 1e-15);
  EXPECT_NEAR(p.b_n, 0.13, 1e-15);
  p = frechet_fold_params(0.5, 0.5, 3);
  EXPECT_DOUBLE_EQ(p.a_n, 0.5);
  EXPECT_DOUBLE_EQ(p.b_n, 0.5);
  EXPECT_THROW(frechet_fold_params(0.7, 0.7, 2), ValidationError);
  EXPECT_THROW(frechet_fold_params(0.2, 0.3, 0), ValidationError);
}

TEST(FrechetFoldParams, RecursionAndSumIdentity) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = unit(rng);
    const double b = unit(rng) * (1 - a);
    double ak = a, bk = b;
    for (int n = 1; n <= 8; ++n) {
      const auto p = frechet_fold_params(a, b, n);
      EXPECT_NEAR(p.a_n, ak, 1e-14);
      EXPECT_NEAR(p.b_n, bk, 1e-14);
      EXPECT_NEAR(p.a_n + p.b_n, std::pow(a + b, n), 1e-12);
      EXPECT_GE(p.a_n, 0.0);
      EXPECT_GE(p.b_n, 0.0);
      const double next_a = a * bk + b * ak;
      const double next_b = a * ak + b * bk;
      ak = next_a;
      bk = next_b;
    }
  }
}

TEST(FrechetFoldParams, DyadicSumIsExact) {
  // Dyadic rationals keep every power exactly representable.
  for (auto [a, b] : {std::pair{0.25, 0.5}, {0.125, 0.375}, {0.5, 0.25}, {0.0, 0.75}}) {
    for (int n = 1; n <= 6; ++n) {
      const auto p = frechet_fold_params(a, b, n);
      EXPECT_EQ(p.a_n + p.b_n, std::pow(a + b, n));
    }
  }
}

TEST(AsFrechet, CollapsesFamilyMixtures) {
  const auto mix = CopulaSpec::mixture(
      {0.5, 0.5}, {CopulaSpec::upper_bound(), CopulaSpec::frechet(0.2, 0.4)});
  const auto f = as_frechet(mix);
  ASSERT_TRUE(f.has_value());
  EXPECT_NEAR(f->a, 0.1, 1e-15);
  EXPECT_NEAR(f->b, 0.7, 1e-15);
  EXPECT_FALSE(as_frechet(CopulaSpec::marshall_olkin(0.2, 0.2)).has_value());
}

TEST(AcDensityInfimum, Families) {
  EXPECT_DOUBLE_EQ(ac_density_infimum(CopulaSpec::frechet(0.2, 0.3)), 0.5);
  EXPECT_DOUBLE_EQ(ac_density_infimum(CopulaSpec::marshall_olkin(0.5, 0.3)), 0.5);
  EXPECT_DOUBLE_EQ(ac_density_infimum(CopulaSpec::upper_bound()), 0.0);
  EXPECT_NEAR(ac_density_infimum(CopulaSpec::mixture(
                  {0.9, 0.1}, {CopulaSpec::upper_bound(), CopulaSpec::independence()})),
              0.1, 1e-15);
}

TEST(GridSpec, CdfAndConditionalAreConsistent) {
  std::mt19937_64 rng(23);
  auto grid = std::make_shared<const GridCopula>(testing::random_grid(rng, 6));
  const auto spec = CopulaSpec::grid(grid, "g.csv");
  // CDF at cell corners reproduces cumulative masses.
  EXPECT_NEAR(eval_cdf(spec, 2.0 / 6, 3.0 / 6), grid->masses().block(0, 0, 2, 3).sum(), 1e-15);
  EXPECT_NEAR(eval_cdf(spec, 1.0, 0.37), 0.37, 1e-15);
  // Inside a row the conditional CDF is the row's normalized cumulative mass.
  EXPECT_NEAR(conditional_cdf(spec, 0.5, 4.0 / 6), 6 * grid->masses().block(3, 0, 1, 4).sum(),
              1e-14);
}

}  // namespace
}  // namespace copulalab
