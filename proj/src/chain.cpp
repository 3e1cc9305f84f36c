#include "copulalab/chain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "copulalab/errors.hpp"
#include "copulalab/grid.hpp"

namespace copulalab {
namespace {

constexpr std::uint64_t kBranchStream = 0;
constexpr std::uint64_t kFreshStream = 1;
constexpr std::uint64_t kInitialStream = 2;
constexpr double kBisectionTol = 1e-12;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ValidationError(fmt::format("marginal: bad {} '{}'", what, text));
  }
  return value;
}

// Smallest y with C_{,1}(x, y) >= u, to within the bisection tolerance.
double invert_conditional(const CopulaSpec& spec, double x, double u) {
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > kBisectionTol) {
    const double mid = 0.5 * (lo + hi);
    if (conditional_cdf(spec, x, mid) >= u) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double sample_grid_row(const GridCopula& g, double x, double u, double v) {
  const int n = g.resolution();
  const int i = std::clamp(static_cast<int>(std::floor(x * n)), 0, n - 1);
  const double target = u / n;  // row i carries total mass 1/n
  double cumulative = 0.0;
  int j = 0;
  for (; j < n - 1; ++j) {
    cumulative += g.mass(i, j);
    if (cumulative >= target) break;
  }
  return (j + v) / n;
}

std::vector<double> pseudo_observations(std::span<const double> values, PseudoObservations mode) {
  if (mode == PseudoObservations::Auto) {
    const bool unit = std::all_of(values.begin(), values.end(),
                                  [](double v) { return v >= 0.0 && v <= 1.0; });
    mode = unit ? PseudoObservations::Raw : PseudoObservations::Ranks;
  }
  if (mode == PseudoObservations::Raw) return {values.begin(), values.end()};
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  std::vector<double> out(values.size());
  const double denom = static_cast<double>(values.size()) + 1.0;
  std::size_t rank = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || values[order[k]] != values[order[k - 1]]) rank = k;
    out[order[k]] = (static_cast<double>(rank) + 1.0) / denom;
  }
  return out;
}

}  // namespace

double CounterRng::uniform(std::uint64_t stream, std::uint64_t counter) const {
  const std::uint64_t key = splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  const std::uint64_t bits = splitmix64(key ^ splitmix64(counter));
  // Odd multiple of 2^-53 in (0, 1).
  return static_cast<double>((bits >> 11) | 1u) * 0x1.0p-53;
}

Marginal Marginal::parse(std::string_view text) {
  if (text == "uniform") return {};
  if (text.starts_with("exp:")) {
    const double rate = parse_number(text.substr(4), "exponential rate");
    if (!(rate > 0.0)) throw ValidationError("marginal: exponential rate must be > 0");
    return {Kind::Exponential, rate, 0.0};
  }
  if (text.starts_with("normal:")) {
    const auto body = text.substr(7);
    const auto comma = body.find(',');
    if (comma == std::string_view::npos) {
      throw ValidationError("marginal: normal needs '<mu>,<sigma>'");
    }
    const double mu = parse_number(body.substr(0, comma), "normal mean");
    const double sigma = parse_number(body.substr(comma + 1), "normal sigma");
    if (!(sigma > 0.0)) throw ValidationError("marginal: normal sigma must be > 0");
    return {Kind::Normal, mu, sigma};
  }
  throw ValidationError(fmt::format(
      "unknown marginal '{}' (expected uniform | exp:<rate> | normal:<mu>,<sigma>)", text));
}

std::string Marginal::to_string() const {
  switch (kind) {
    case Kind::Uniform: return "uniform";
    case Kind::Exponential: return fmt::format("exp:{}", first);
    case Kind::Normal: return fmt::format("normal:{},{}", first, second);
  }
  return "?";
}

double Marginal::quantile(double u) const {
  switch (kind) {
    case Kind::Uniform: return u;
    case Kind::Exponential: return -std::log1p(-u) / first;
    case Kind::Normal:
      return boost::math::quantile(boost::math::normal_distribution<double>(first, second), u);
  }
  return u;
}

ChainSample sample_chain(const CopulaSpec& spec, std::size_t steps, std::uint64_t seed,
                         const Marginal& marginal) {
  if (steps < 2) throw ValidationError(fmt::format("sample_chain: steps >= 2 violated ({})", steps));
  const CounterRng rng(seed);
  std::vector<double> latent(steps);
  latent[0] = rng.uniform(kInitialStream, 0);

  if (const auto f = as_frechet(spec)) {
    const double reflect = f->a;
    const double copy = f->a + f->b;
    for (std::size_t t = 1; t < steps; ++t) {
      const double u = rng.uniform(kBranchStream, t);
      if (u < reflect) {
        latent[t] = 1.0 - latent[t - 1];
      } else if (u < copy) {
        latent[t] = latent[t - 1];
      } else {
        latent[t] = rng.uniform(kFreshStream, t);
      }
    }
  } else if (const auto* g = spec.get_if<family::GridRef>()) {
    for (std::size_t t = 1; t < steps; ++t) {
      latent[t] = sample_grid_row(*g->grid, latent[t - 1], rng.uniform(kBranchStream, t),
                                  rng.uniform(kFreshStream, t));
    }
  } else {
    for (std::size_t t = 1; t < steps; ++t) {
      latent[t] = invert_conditional(spec, latent[t - 1], rng.uniform(kBranchStream, t));
    }
  }

  ChainSample sample{std::move(latent), seed, spec, marginal};
  if (!marginal.is_uniform()) {
    for (double& v : sample.values) v = marginal.quantile(v);
  }
  return sample;
}

EmpiricalLagStats empirical_lag_stats(std::span<const double> values, int lag, int grid_n,
                                      PseudoObservations mode) {
  if (lag < 1) throw ValidationError(fmt::format("empirical_lag_stats: lag >= 1 violated ({})", lag));
  if (grid_n < 1) throw ValidationError("empirical_lag_stats: grid_n >= 1 violated");
  if (static_cast<std::size_t>(lag) >= values.size()) {
    throw ValidationError(fmt::format("empirical_lag_stats: lag {} >= sample length {}", lag,
                                      values.size()));
  }
  const bool raw = mode == PseudoObservations::Raw ||
                   (mode == PseudoObservations::Auto &&
                    std::all_of(values.begin(), values.end(),
                                [](double v) { return v >= 0.0 && v <= 1.0; }));
  const std::vector<double> pseudo =
      pseudo_observations(values, raw ? PseudoObservations::Raw : PseudoObservations::Ranks);

  EmpiricalLagStats stats;
  stats.lag = lag;
  stats.pairs = values.size() - static_cast<std::size_t>(lag);
  stats.counts = Eigen::MatrixXd::Zero(grid_n, grid_n);
  std::size_t equal = 0;
  std::size_t reflected = 0;
  auto cell = [grid_n](double p) {
    return std::clamp(static_cast<int>(std::floor(p * grid_n)), 0, grid_n - 1);
  };
  for (std::size_t t = 0; t < stats.pairs; ++t) {
    const double x = values[t];
    const double y = values[t + lag];
    if (y == x) ++equal;
    if (raw && y == 1.0 - x) ++reflected;
    stats.counts(cell(pseudo[t]), cell(pseudo[t + lag])) += 1.0;
  }
  const double pairs = static_cast<double>(stats.pairs);
  stats.freq_equal = equal / pairs;
  if (raw) stats.freq_reflected = reflected / pairs;
  return stats;
}

EmpiricalLagStats empirical_lag_stats(const ChainSample& sample, int lag, int grid_n) {
  return empirical_lag_stats(sample.values, lag, grid_n,
                             sample.marginal.is_uniform() ? PseudoObservations::Raw
                                                          : PseudoObservations::Ranks);
}

MarginalInvarianceReport marginal_invariance_check(const CopulaSpec& spec, std::size_t steps,
                                                   std::uint64_t seed, const Marginal& marginal,
                                                   int lag, int grid_n) {
  const ChainSample base = sample_chain(spec, steps, seed, Marginal{});
  const ChainSample other = sample_chain(spec, steps, seed, marginal);
  MarginalInvarianceReport report{
      false, 0,
      empirical_lag_stats(base.values, lag, grid_n, PseudoObservations::Ranks),
      empirical_lag_stats(other.values, lag, grid_n, PseudoObservations::Ranks)};
  report.differing_cells = static_cast<std::size_t>(
      (report.uniform.counts.array() != report.transformed.counts.array()).count());
  report.identical = report.differing_cells == 0 &&
                     report.uniform.freq_equal == report.transformed.freq_equal &&
                     report.uniform.pairs == report.transformed.pairs;
  return report;
}

}  // namespace copulalab
