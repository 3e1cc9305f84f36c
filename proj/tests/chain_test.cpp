#include "copulalab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "copulalab/errors.hpp"
#include "copulalab/grid.hpp"

namespace copulalab {
namespace {

const Marginal kUniform{};

double binomial_sigma(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / n); }

TEST(CounterRng, DrawsAreOddDyadicAndReproducible) {
  const CounterRng rng(42);
  for (std::uint64_t c = 0; c < 1000; ++c) {
    const double u = rng.uniform(0, c);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double scaled = std::ldexp(u, 53);
    EXPECT_EQ(scaled, std::floor(scaled));
    EXPECT_EQ(std::fmod(scaled, 2.0), 1.0);
    EXPECT_EQ(1.0 - (1.0 - u), u);
    EXPECT_EQ(u, CounterRng(42).uniform(0, c));
  }
  EXPECT_NE(rng.uniform(0, 5), rng.uniform(1, 5));
  EXPECT_NE(rng.uniform(0, 5), CounterRng(43).uniform(0, 5));
}

TEST(Marginal, ParseAndQuantile) {
  EXPECT_TRUE(Marginal::parse("uniform").is_uniform());
  const auto e = Marginal::parse("exp:2");
  EXPECT_EQ(e.kind, Marginal::Kind::Exponential);
  EXPECT_NEAR(e.quantile(0.5), std::log(2.0) / 2.0, 1e-15);
  const auto n = Marginal::parse("normal:1,2");
  EXPECT_NEAR(n.quantile(0.5), 1.0, 1e-15);
  EXPECT_NEAR(n.quantile(0.975), 1.0 + 2.0 * 1.959963984540054, 1e-9);
  EXPECT_EQ(Marginal::parse(n.to_string()), n);
  for (const char* bad : {"gamma:1", "exp:-1", "exp:", "normal:0", "normal:0,0", "normal:a,b"}) {
    EXPECT_THROW(Marginal::parse(bad), ValidationError) << bad;
  }
}

TEST(SampleChain, ComonotoneChainIsConstant) {
  const auto s = sample_chain(CopulaSpec::upper_bound(), 100, 7, kUniform);
  ASSERT_EQ(s.values.size(), 100u);
  for (double v : s.values) EXPECT_EQ(v, s.values.front());
  EXPECT_EQ(empirical_lag_stats(s, 3, 8).freq_equal, 1.0);
}

TEST(SampleChain, CountermonotoneChainAlternates) {
  const auto s = sample_chain(CopulaSpec::lower_bound(), 50, 3, kUniform);
  for (std::size_t t = 1; t < s.values.size(); ++t) EXPECT_EQ(s.values[t], 1.0 - s.values[t - 1]);
}

TEST(SampleChain, IndependenceHasNoLagCorrelation) {
  const std::size_t steps = 100000;
  const auto s = sample_chain(CopulaSpec::independence(), steps, 11, kUniform);
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const std::size_t pairs = steps - 1;
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    const double x = s.values[t], y = s.values[t + 1];
    sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
  }
  const double cov = sxy / pairs - sx / pairs * sy / pairs;
  const double corr = cov / std::sqrt((sxx / pairs - sx * sx / pairs / pairs) *
                                      (syy / pairs - sy * sy / pairs / pairs));
  EXPECT_LT(std::abs(corr), 3.0 / std::sqrt(static_cast<double>(steps)));
  EXPECT_EQ(empirical_lag_stats(s, 1, 8).freq_equal, 0.0);
}

TEST(SampleChain, FrechetCopyAndReflectFrequencies) {
  const std::size_t steps = 100000;
  const auto s = sample_chain(CopulaSpec::frechet(0.2, 0.3), steps, 2024, kUniform);
  const auto lag1 = empirical_lag_stats(s, 1, 8);
  EXPECT_LT(std::abs(lag1.freq_equal - 0.3), 3 * binomial_sigma(0.3, lag1.pairs));
  ASSERT_TRUE(lag1.freq_reflected.has_value());
  EXPECT_LT(std::abs(*lag1.freq_reflected - 0.2), 3 * binomial_sigma(0.2, lag1.pairs));

  const auto lag2 = empirical_lag_stats(s, 2, 8);
  const auto p = frechet_fold_params(0.2, 0.3, 2);
  EXPECT_NEAR(p.b_n, 0.13, 1e-15);
  EXPECT_NEAR(p.a_n, 0.12, 1e-15);
  EXPECT_LT(std::abs(lag2.freq_equal - p.b_n), 3 * binomial_sigma(p.b_n, lag2.pairs));
  EXPECT_LT(std::abs(*lag2.freq_reflected - p.a_n), 3 * binomial_sigma(p.a_n, lag2.pairs));
}

TEST(SampleChain, MardiaUsesFrechetSampler) {
  const double theta = 0.6;
  const auto s = sample_chain(CopulaSpec::mardia(theta), 50000, 5, kUniform);
  const auto stats = empirical_lag_stats(s, 1, 4);
  const double b = theta * theta * (1 + theta) / 2;
  EXPECT_LT(std::abs(stats.freq_equal - b), 3 * binomial_sigma(b, stats.pairs));
}

TEST(SampleChain, UniformValuesStayInUnitInterval) {
  const std::vector<CopulaSpec> specs{CopulaSpec::marshall_olkin(0.3, 0.6),
                                      CopulaSpec::frechet(0.4, 0.1),
                                      CopulaSpec::grid(std::make_shared<const GridCopula>(discretize(CopulaSpec::marshall_olkin(0.5, 0.2), 6)), "mem")};
  for (const auto& spec : specs) {
    for (double v : sample_chain(spec, 2000, 1, kUniform).values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_THROW(sample_chain(CopulaSpec::independence(), 1, 1, kUniform), ValidationError);
}

TEST(SampleChain, DeterministicGivenSeed) {
  const std::vector<CopulaSpec> specs{CopulaSpec::marshall_olkin(0.3, 0.6), CopulaSpec::frechet(0.2, 0.3)};
  for (const auto& spec : specs) {
    const auto a = sample_chain(spec, 5000, 99, Marginal::parse("normal:0,1"));
    const auto b = sample_chain(spec, 5000, 99, Marginal::parse("normal:0,1"));
    ASSERT_EQ(a.values.size(), b.values.size());
    EXPECT_EQ(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)), 0);
    EXPECT_NE(sample_chain(spec, 5000, 100, kUniform).values, sample_chain(spec, 5000, 99, kUniform).values);
  }
}

TEST(SampleChain, MarginalsAreStationary) {
  const std::vector<CopulaSpec> specs{
      CopulaSpec::frechet(0.2, 0.3), CopulaSpec::frechet(0.45, 0.45),
      CopulaSpec::grid(std::make_shared<const GridCopula>(discretize(CopulaSpec::marshall_olkin(0.3, 0.6), 8)), "mem")};
  const int bins = 20;
  const std::size_t thin = 20;
  for (const auto& spec : specs) {
    const auto s = sample_chain(spec, 100000, 31337, kUniform);
    std::vector<double> counts(bins, 0.0);
    std::size_t used = 0;
    for (std::size_t t = 0; t < s.values.size(); t += thin, ++used) {
      counts[std::min(bins - 1, static_cast<int>(s.values[t] * bins))] += 1.0;
    }
    const double expected = static_cast<double>(used) / bins;
    double stat = 0.0;
    for (double c : counts) stat += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared dist(bins - 1);
    EXPECT_LT(stat, boost::math::quantile(boost::math::complement(dist, 0.001))) << spec.type_name();
  }
}

TEST(SampleChain, LagHistogramsApproachGridFoldPower) {
  const std::vector<CopulaSpec> specs{CopulaSpec::frechet(0.2, 0.3),
                                      CopulaSpec::marshall_olkin(0.3, 0.6)};
  const int grid_n = 8;
  for (const auto& spec : specs) {
    for (int m : {1, 2}) {
      const auto target = fold_power(discretize(spec, grid_n), m).masses();
      double previous = 1.0;
      for (std::size_t steps : {1000u, 10000u, 100000u}) {
        const auto stats = empirical_lag_stats(sample_chain(spec, steps, 8, kUniform), m, grid_n);
        const double dev = (stats.counts / static_cast<double>(stats.pairs) - target).cwiseAbs().maxCoeff();
        EXPECT_LT(dev, previous) << spec.type_name() << " m=" << m << " steps=" << steps;
        previous = dev;
      }
      EXPECT_LT(previous, 0.005);
    }
  }
}

TEST(LagStats, CountsAndErrors) {
  const std::vector<double> values{0.1, 0.9, 0.1, 0.9, 0.5};
  const auto stats = empirical_lag_stats(values, 2, 2, PseudoObservations::Raw);
  EXPECT_EQ(stats.pairs, 3u);
  EXPECT_EQ(stats.counts.sum(), 3.0);
  EXPECT_DOUBLE_EQ(stats.freq_equal, 2.0 / 3.0);
  EXPECT_EQ(stats.counts(0, 0), 1.0);
  EXPECT_EQ(stats.counts(0, 1), 1.0);
  EXPECT_EQ(stats.counts(1, 1), 1.0);
  EXPECT_THROW(empirical_lag_stats(values, 5, 2), ValidationError);
  EXPECT_THROW(empirical_lag_stats(values, 0, 2), ValidationError);

  const std::vector<double> shifted{10.0, 30.0, 20.0, 20.0};
  const auto ranked = empirical_lag_stats(shifted, 1, 2);
  EXPECT_FALSE(ranked.freq_reflected.has_value());
  EXPECT_EQ(ranked.pairs, 3u);
  EXPECT_DOUBLE_EQ(ranked.freq_equal, 1.0 / 3.0);
}

TEST(MarginalInvariance, Examples) {
  const auto exp1 = marginal_invariance_check(CopulaSpec::frechet(0.2, 0.3), 10000, 17,
                                              Marginal::parse("exp:1"), 1, 8);
  EXPECT_TRUE(exp1.identical);
  EXPECT_EQ(exp1.differing_cells, 0u);
  EXPECT_EQ(exp1.uniform.freq_equal, exp1.transformed.freq_equal);

  EXPECT_TRUE(marginal_invariance_check(CopulaSpec::marshall_olkin(0.3, 0.6), 10000, 17, kUniform,
                                        1, 8).identical);

  const auto normal = marginal_invariance_check(CopulaSpec::frechet(0.5, 0.5), 10000, 17,
                                                Marginal::parse("normal:0,1"), 2, 8);
  EXPECT_TRUE(normal.identical);
  EXPECT_EQ(normal.uniform.counts, normal.transformed.counts);
}

}  // namespace
}  // namespace copulalab
