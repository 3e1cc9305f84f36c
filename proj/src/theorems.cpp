#include "copulalab/theorems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "copulalab/errors.hpp"
#include "parallel.hpp"

namespace copulalab {
namespace {

constexpr std::array<std::pair<TheoremId, std::string_view>, 8> kTheoremNames{{
    {TheoremId::DensityPsiPrime, "density-psi-prime"},
    {TheoremId::TupleDecomposition, "tuple-decomposition"},
    {TheoremId::MixtureRho, "mixture-rho"},
    {TheoremId::MixturePsiPrime, "mixture-psi-prime"},
    {TheoremId::MixturePhi, "mixture-phi"},
    {TheoremId::MixtureBeta, "mixture-beta"},
    {TheoremId::PsiDivergence, "psi-divergence"},
    {TheoremId::ExponentialRate, "exponential-rate"},
}};

constexpr int kMaxTupleResolution = 128;

long checked_tuple_count(std::size_t k, int m) {
  if (k == 0) throw ValidationError("mixture check: at least one component required");
  if (m < 1) throw ValidationError(fmt::format("mixture check: m >= 1 violated ({})", m));
  long count = 1;
  for (int j = 0; j < m; ++j) {
    count *= static_cast<long>(k);
    if (count > kMaxTuples) {
      throw ValidationError(fmt::format(
          "mixture check: {}^{} index tuples exceed the budget of {}", k, m, kMaxTuples));
    }
  }
  return count;
}

// Digits of t in base k, most significant first: lexicographic tuple order.
std::vector<int> decode_tuple(long t, std::size_t k, int m) {
  std::vector<int> tuple(m);
  for (int j = m - 1; j >= 0; --j) {
    tuple[j] = static_cast<int>(t % static_cast<long>(k));
    t /= static_cast<long>(k);
  }
  return tuple;
}

// Markov-operator product T_{i_1} ... T_{i_m} on cells, divided back to masses.
Eigen::MatrixXd tuple_masses(std::span<const GridCopula> grids, const std::vector<int>& tuple) {
  const double n = grids[0].resolution();
  Eigen::MatrixXd acc = grids[tuple[0]].transition();
  for (std::size_t j = 1; j < tuple.size(); ++j) acc = (acc * grids[tuple[j]].transition()).eval();
  return acc / n;
}

double tuple_weight(std::span<const double> weights, const std::vector<int>& tuple) {
  double a = 1.0;
  for (int i : tuple) a *= weights[i];
  return a;
}

std::string format_tuple(const std::vector<int>& tuple) {
  std::vector<int> one_based(tuple);
  for (int& i : one_based) ++i;
  return fmt::format("({})", fmt::join(one_based, ","));
}

std::vector<GridCopula> discretize_all(std::span<const CopulaSpec> components, int n) {
  std::vector<GridCopula> grids;
  grids.reserve(components.size());
  for (const auto& c : components) grids.push_back(discretize(c, n));
  return grids;
}

void validate_weights(std::span<const double> weights, std::span<const CopulaSpec> components) {
  // Reuse the spec-level validation of weights.
  CopulaSpec::mixture(std::vector<double>(weights.begin(), weights.end()),
                      std::vector<CopulaSpec>(components.begin(), components.end()));
}

TheoremId mixture_theorem(Coefficient c) {
  switch (c) {
    case Coefficient::Rho: return TheoremId::MixtureRho;
    case Coefficient::PsiPrime: return TheoremId::MixturePsiPrime;
    case Coefficient::Phi: return TheoremId::MixturePhi;
    case Coefficient::Beta: return TheoremId::MixtureBeta;
    case Coefficient::Psi: break;
  }
  throw ValidationError("verify_mixture_bound: coefficient must be rho, psi_prime, phi or beta");
}

}  // namespace

std::string_view to_string(TheoremId id) {
  for (const auto& [key, name] : kTheoremNames) {
    if (key == id) return name;
  }
  return "?";
}

TheoremId parse_theorem_id(std::string_view name) {
  for (const auto& [key, label] : kTheoremNames) {
    if (label == name) return key;
  }
  std::vector<std::string_view> names;
  for (const auto& entry : kTheoremNames) names.push_back(entry.second);
  throw ValidationError(
      fmt::format("unknown theorem id '{}' (expected one of {})", name, fmt::join(names, ", ")));
}

BoundCheckResult verify_density_bound(const CopulaSpec& spec, int m, int n) {
  if (m < 1) throw ValidationError(fmt::format("verify_density_bound: m >= 1 violated ({})", m));
  BoundCheckResult result;
  result.theorem = TheoremId::DensityPsiPrime;
  result.m = m;
  result.bound = ac_density_infimum(spec);
  result.applicable = result.bound > 0.0;

  const GridCopula grid = discretize(spec, n);
  double measured = std::numeric_limits<double>::infinity();
  int binding_lag = m;
  CellIndex binding_cell;
  for (int j : {m, 2 * m, 3 * m}) {
    const GridCopula lagged = fold_power(grid, j);
    const Coefficients c = coefficients(lagged);
    if (c.psi_prime < measured) {
      measured = c.psi_prime;
      binding_lag = j;
      binding_cell = c.min_cell;
    }
  }
  result.measured = measured;
  result.satisfied = measured >= result.bound - kBoundSlack;
  result.witness = fmt::format(
      "min psi' over lags {},{},{} at lag {} cell ({},{}); density infimum c = {:.17g}{}", m,
      2 * m, 3 * m, binding_lag, binding_cell.row, binding_cell.col, result.bound,
      result.applicable ? "" : " (hypothesis fails: c <= 0)");
  return result;
}

BoundCheckResult tuple_decomposition_check(std::span<const double> weights,
                                           std::span<const CopulaSpec> components, int m, int n) {
  const long count = checked_tuple_count(components.size(), m);
  if (n > kMaxTupleResolution) {
    throw ValidationError(fmt::format("tuple_decomposition_check: n = {} exceeds {}", n,
                                      kMaxTupleResolution));
  }
  validate_weights(weights, components);
  const std::vector<GridCopula> grids = discretize_all(components, n);
  const GridCopula lhs = fold_power(mix_grids(weights, grids), m);

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, n);
  for (long t = 0; t < count; ++t) {
    const auto tuple = decode_tuple(t, components.size(), m);
    rhs += tuple_weight(weights, tuple) * tuple_masses(grids, tuple);
  }
  Eigen::Index r = 0, c = 0;
  const double deviation = (lhs.masses() - rhs).cwiseAbs().maxCoeff(&r, &c);

  BoundCheckResult result;
  result.theorem = TheoremId::TupleDecomposition;
  result.m = m;
  result.bound = 1e-10;
  result.measured = deviation;
  result.satisfied = deviation <= result.bound;
  result.witness = fmt::format("{} tuples enumerated; max deviation at cell ({},{})", count, r, c);
  return result;
}

BoundCheckResult verify_mixture_bound(std::span<const double> weights,
                                      std::span<const CopulaSpec> components,
                                      Coefficient coefficient_id, int m, int n,
                                      const MixtureBoundOptions& options) {
  const TheoremId theorem = mixture_theorem(coefficient_id);
  const std::size_t k = components.size();
  const long count = checked_tuple_count(k, m);
  validate_weights(weights, components);
  const std::vector<GridCopula> grids = discretize_all(components, n);

  std::vector<int> ergodic = options.ergodic_components;
  for (int i : ergodic) {
    if (i < 0 || static_cast<std::size_t>(i) >= k) {
      throw ValidationError(fmt::format("ergodic component index {} out of range", i));
    }
  }
  if (ergodic.empty()) {
    for (std::size_t i = 0; i < k; ++i) {
      if (grids[i].masses().minCoeff() > 0.0) ergodic.push_back(static_cast<int>(i));
    }
  }

  std::vector<std::vector<int>> tuples;
  if (options.forced_tuple) {
    const auto& forced = *options.forced_tuple;
    if (static_cast<int>(forced.size()) != m) {
      throw ValidationError(fmt::format("forced tuple has length {}, expected m = {}",
                                        forced.size(), m));
    }
    for (int i : forced) {
      if (i < 0 || static_cast<std::size_t>(i) >= k) {
        throw ValidationError(fmt::format("forced tuple index {} out of range", i));
      }
    }
    tuples.push_back(forced);
  } else {
    for (long t = 0; t < count; ++t) tuples.push_back(decode_tuple(t, k, m));
  }

  const bool lower_bound_kind = coefficient_id == Coefficient::PsiPrime;
  struct Candidate {
    double weight = 0.0;
    double value = 0.0;
    double bound = 0.0;
  };
  std::vector<Candidate> candidates(tuples.size());
  detail::parallel_for(tuples.size(), [&](std::size_t t) {
    const double a = tuple_weight(weights, tuples[t]);
    const double value = coefficient(GridCopula(tuple_masses(grids, tuples[t])), coefficient_id);
    double bound = 0.0;
    switch (coefficient_id) {
      case Coefficient::Rho: bound = 1.0 - (1.0 - value) * a; break;
      case Coefficient::PsiPrime: bound = a * value; break;
      default: bound = a * (value - 1.0) + 1.0; break;
    }
    candidates[t] = {a, value, bound};
  });

  std::size_t best = 0;
  for (std::size_t t = 1; t < candidates.size(); ++t) {
    const bool better = lower_bound_kind ? candidates[t].bound > candidates[best].bound
                                         : candidates[t].bound < candidates[best].bound;
    if (better) best = t;
  }

  const GridCopula mixture = fold_power(mix_grids(weights, grids), m);
  BoundCheckResult result;
  result.theorem = theorem;
  result.m = m;
  result.bound = candidates[best].bound;
  result.measured = coefficient(mixture, coefficient_id);
  result.satisfied = lower_bound_kind ? result.measured >= result.bound - kBoundSlack
                                      : result.measured <= result.bound + kBoundSlack;
  result.applicable = lower_bound_kind ? result.bound > 0.0 : result.bound < 1.0;
  const bool needs_ergodic =
      coefficient_id == Coefficient::Phi || coefficient_id == Coefficient::Beta;
  if (needs_ergodic && ergodic.empty()) result.applicable = false;

  std::vector<int> ergodic_one_based(ergodic);
  for (int& i : ergodic_one_based) ++i;
  result.witness = fmt::format(
      "tuple {} of {} searched: a = {:.17g}, {} = {:.17g}{}", format_tuple(tuples[best]),
      tuples.size(), candidates[best].weight, to_string(coefficient_id), candidates[best].value,
      needs_ergodic ? fmt::format("; ergodic components [{}]", fmt::join(ergodic_one_based, ","))
                    : std::string{});
  return result;
}

RateTable exponential_rate_table(const CopulaSpec& spec, int m, int n, int max_lag) {
  if (m < 1) throw ValidationError(fmt::format("exponential_rate_table: m >= 1 violated ({})", m));
  if (max_lag < m) {
    throw ValidationError(
        fmt::format("exponential_rate_table: max_lag {} smaller than m = {}", max_lag, m));
  }
  const GridCopula step = fold_power(discretize(spec, n), m);
  RateTable table;
  if (!(psi_prime(step) > 0.0)) {
    table.applicable = false;
    return table;
  }
  GridCopula current = step;
  for (int lag = m; lag <= max_lag; lag += m) {
    if (lag > m) current = fold_product(current, step);
    table.rows.push_back({lag, 1.0 - psi_prime(current)});
  }
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    const double prev = table.rows[k - 1].one_minus_psi_prime;
    const double next = table.rows[k].one_minus_psi_prime;
    double quotient = 0.0;
    if (prev > 0.0) {
      quotient = next / prev;
    } else if (next > 0.0) {
      quotient = std::numeric_limits<double>::infinity();
    }
    table.ratio = std::max(table.ratio, quotient);
  }
  table.satisfied = table.ratio < 1.0;
  return table;
}

BoundCheckResult rate_result(const RateTable& table, int m) {
  BoundCheckResult result;
  result.theorem = TheoremId::ExponentialRate;
  result.m = m;
  result.bound = 1.0;
  result.measured = table.ratio;
  result.satisfied = table.satisfied;
  result.applicable = table.applicable;
  std::vector<std::string> rows;
  for (const auto& row : table.rows) {
    rows.push_back(fmt::format("{}:{:.17g}", row.lag, row.one_minus_psi_prime));
  }
  result.witness = table.applicable
                       ? fmt::format("1-psi' by lag [{}]; max consecutive ratio {:.17g}",
                                     fmt::join(rows, " "), table.ratio)
                       : "psi' at lag m is 0 on the grid (hypothesis fails)";
  return result;
}

DivergenceTable psi_divergence_table(double a, double b, std::span<const int> lags,
                                     std::span<const double> epsilons) {
  CopulaSpec::frechet(a, b);
  DivergenceTable table;
  if (!(a + b > 0.0)) {
    table.applicable = false;
    return table;
  }
  for (double eps : epsilons) {
    if (!(eps > 0.0 && eps < 1.0)) {
      throw ValidationError(fmt::format("psi_divergence_table: epsilon {} not in (0,1)", eps));
    }
  }
  std::map<int, std::vector<std::pair<double, double>>> by_lag;
  for (int lag : lags) {
    const FrechetParams p = frechet_fold_params(a, b, lag);
    const CopulaSpec lagged = CopulaSpec::frechet(p.a_n, p.b_n);
    for (double eps : epsilons) {
      DivergenceRow row;
      row.lag = lag;
      row.epsilon = eps;
      row.lower_bound = (1.0 - eps) * (p.a_n + p.b_n) / eps;

      const double lo = 0.5 - eps / 2.0;
      const double hi = 0.5 + eps / 2.0;
      const double width = hi - lo;
      const double mu = eval_cdf(lagged, hi, hi) - eval_cdf(lagged, lo, hi) -
                        eval_cdf(lagged, hi, lo) + eval_cdf(lagged, lo, lo);
      row.witness = std::abs(mu - width * width) / (width * width);

      int grid_n = static_cast<int>(std::ceil(1.0 / eps - 1e-12));
      grid_n = std::max(2, grid_n + (grid_n % 2));
      row.grid_n = grid_n;
      const GridCopula grid = discretize(lagged, grid_n);
      row.grid_psi = psi(grid);
      const int mid = grid_n / 2;
      const double band_mass = grid.masses().block(mid - 1, mid - 1, 2, 2).sum();
      const double band = 2.0 / grid_n;
      row.grid_band_ratio = std::abs(band_mass - band * band) / (band * band);

      by_lag[lag].emplace_back(eps, row.lower_bound);
      table.rows.push_back(row);
    }
  }
  table.diverges = !by_lag.empty();
  for (auto& [lag, points] : by_lag) {
    std::sort(points.begin(), points.end(), [](auto& l, auto& r) { return l.first > r.first; });
    if (points.size() < 2) table.diverges = false;
    for (std::size_t k = 1; k < points.size(); ++k) {
      if (!(points[k].second > points[k - 1].second)) table.diverges = false;
    }
  }
  return table;
}

std::vector<BoundCheckResult> divergence_results(const DivergenceTable& table) {
  std::vector<BoundCheckResult> out;
  if (!table.applicable) {
    BoundCheckResult r;
    r.theorem = TheoremId::PsiDivergence;
    r.applicable = false;
    r.satisfied = false;
    r.witness = "a + b = 0: independence, psi is identically 0";
    out.push_back(r);
    return out;
  }
  for (const auto& row : table.rows) {
    BoundCheckResult r;
    r.theorem = TheoremId::PsiDivergence;
    r.m = row.lag;
    r.bound = row.lower_bound;
    r.measured = row.witness;
    r.satisfied = row.witness >= row.lower_bound - kBoundSlack &&
                  row.grid_psi >= row.grid_band_ratio - kBoundSlack;
    r.witness = fmt::format(
        "eps = {:.17g}: central interval ratio {:.17g}; grid n = {}: psi {:.17g} >= central band "
        "ratio {:.17g}{}",
        row.epsilon, row.witness, row.grid_n, row.grid_psi, row.grid_band_ratio,
        table.diverges ? "; bound grows without limit as eps -> 0" : "");
    out.push_back(r);
  }
  return out;
}

}  // namespace copulalab
