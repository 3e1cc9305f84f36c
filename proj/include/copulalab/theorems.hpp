#pragma once

// Desk-scale checks of the mixing bounds for copula-based Markov chains:
// the density lower bound for psi', the tuple decomposition of mixture fold
// powers, the coefficient bounds for mixtures, geometric decay of 1 - psi',
// and the psi-divergence of the Frechet family.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "copulalab/copula.hpp"
#include "copulalab/grid.hpp"
#include "copulalab/mixing.hpp"

namespace copulalab {

enum class TheoremId {
  DensityPsiPrime,
  TupleDecomposition,
  MixtureRho,
  MixturePsiPrime,
  MixturePhi,
  MixtureBeta,
  PsiDivergence,
  ExponentialRate,
};

std::string_view to_string(TheoremId id);
TheoremId parse_theorem_id(std::string_view name);

/// Slack applied to every inequality check.
inline constexpr double kBoundSlack = 1e-9;

struct BoundCheckResult {
  TheoremId theorem = TheoremId::DensityPsiPrime;
  int m = 1;
  double bound = 0.0;
  double measured = 0.0;
  /// measured relates to bound in the theorem's direction, within kBoundSlack.
  bool satisfied = false;
  /// The theorem's hypothesis holds; when false the check is informational.
  bool applicable = true;
  std::string witness;
};

/// Checks psi'(C^j) >= c for j = m, 2m, 3m where c is the essential infimum of
/// the absolutely continuous density of spec. Not applicable when c <= 0.
BoundCheckResult verify_density_bound(const CopulaSpec& spec, int m, int n);

/// Largest number of index tuples a mixture check may enumerate.
inline constexpr long kMaxTuples = 10000;

/// Compares fold_power(mix, m) against sum over tuples of a^(i) times the
/// product n^(m-1) M_{i_1} ... M_{i_m}; measured is the max cellwise deviation.
BoundCheckResult tuple_decomposition_check(std::span<const double> weights,
                                           std::span<const CopulaSpec> components, int m, int n);

struct MixtureBoundOptions {
  /// Components asserted to generate ergodic, aperiodic chains. When empty,
  /// any component whose grid has every cell strictly positive qualifies.
  std::vector<int> ergodic_components;
  /// Restrict the search to this tuple (0-based component indices, length m).
  std::optional<std::vector<int>> forced_tuple;
};

/// Bounds the mixture's coefficient at lag m by the best single index tuple:
///   rho:       1 - (1 - rho_(i0)) a^(i0)          (measured <= bound)
///   psi_prime: a^(i0) psi'_(i0)                   (measured >= bound)
///   phi, beta: a^(i0) (coef_(i0) - 1) + 1         (measured <= bound)
/// The tuple giving the tightest bound is chosen, ties broken lexicographically.
BoundCheckResult verify_mixture_bound(std::span<const double> weights,
                                      std::span<const CopulaSpec> components,
                                      Coefficient coefficient, int m, int n,
                                      const MixtureBoundOptions& options = {});

struct RateRow {
  int lag = 0;
  double one_minus_psi_prime = 0.0;
};

struct RateTable {
  std::vector<RateRow> rows;
  /// Largest ratio of consecutive rows (0/0 counts as 0).
  double ratio = 0.0;
  bool applicable = true;
  bool satisfied = false;
};

/// 1 - psi' at lags m, 2m, ... <= max_lag.
RateTable exponential_rate_table(const CopulaSpec& spec, int m, int n, int max_lag);

struct DivergenceRow {
  int lag = 1;
  double epsilon = 0.0;
  /// (1 - eps)(a_n + b_n) / eps.
  double lower_bound = 0.0;
  /// Relative deviation on the central interval of width eps, from the lag-n CDF.
  double witness = 0.0;
  /// Even resolution >= ceil(1/eps) used for the grid cross-check.
  int grid_n = 0;
  double grid_psi = 0.0;
  /// Relative deviation on the two central cells of that grid.
  double grid_band_ratio = 0.0;
};

struct DivergenceTable {
  bool applicable = true;
  std::vector<DivergenceRow> rows;
  /// For every lag the bound grows strictly as eps decreases.
  bool diverges = false;
};

DivergenceTable psi_divergence_table(double a, double b, std::span<const int> lags,
                                     std::span<const double> epsilons);

/// One BoundCheckResult per row (bound = lower_bound, measured = witness).
std::vector<BoundCheckResult> divergence_results(const DivergenceTable& table);

/// Summary record for a rate table (bound 1, measured = ratio).
BoundCheckResult rate_result(const RateTable& table, int m);

}  // namespace copulalab
