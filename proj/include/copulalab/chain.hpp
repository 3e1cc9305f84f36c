#pragma once

// Simulation of stationary copula-based Markov chains and empirical lag
// statistics used to cross-check the grid computations.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "copulalab/copula.hpp"

namespace copulalab {

/// Counter-based uniform generator: draw `counter` of `stream` is a pure
/// function of (seed, stream, counter). Draws are odd multiples of 2^-53, so
/// 1 - u is exact and stays in the same set.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  double uniform(std::uint64_t stream, std::uint64_t counter) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Invariant marginal of the chain, applied through its quantile function.
struct Marginal {
  enum class Kind { Uniform, Exponential, Normal };
  Kind kind = Kind::Uniform;
  double first = 0.0;   // exponential rate, or normal mean
  double second = 0.0;  // normal standard deviation

  /// "uniform", "exp:<rate>", "normal:<mu>,<sigma>".
  static Marginal parse(std::string_view text);
  std::string to_string() const;
  double quantile(double u) const;
  bool is_uniform() const { return kind == Kind::Uniform; }
  bool operator==(const Marginal&) const = default;
};

struct ChainSample {
  std::vector<double> values;
  std::uint64_t seed = 0;
  CopulaSpec spec = CopulaSpec::independence();
  Marginal marginal;
};

/// X_0 ~ U(0,1); each transition inverts C_{,1}(X_t, .) at fresh uniforms.
/// Frechet-family specs use the exact reflect/copy/fresh sampler, grid specs
/// pick a cell in the current row and draw uniformly inside it, and every
/// other spec inverts the conditional CDF by bisection. steps >= 2 values.
ChainSample sample_chain(const CopulaSpec& spec, std::size_t steps, std::uint64_t seed,
                         const Marginal& marginal);

/// How values are mapped to [0,1] before binning.
enum class PseudoObservations {
  Raw,    // values already uniform on [0,1]
  Ranks,  // (rank + 1) / (N + 1), ties share the lowest rank
  Auto,   // Raw if every value lies in [0,1], else Ranks
};

struct EmpiricalLagStats {
  int lag = 1;
  /// Fraction of pairs with X_{t+lag} == X_t exactly.
  double freq_equal = 0.0;
  /// Fraction with X_{t+lag} == 1 - X_t; only defined on the uniform scale.
  std::optional<double> freq_reflected;
  std::size_t pairs = 0;
  /// counts(i, j): pairs with pseudo-observations in cell (i, j).
  Eigen::MatrixXd counts;
};

EmpiricalLagStats empirical_lag_stats(std::span<const double> values, int lag, int grid_n,
                                      PseudoObservations mode = PseudoObservations::Auto);

/// Uses raw values for uniform-marginal samples and ranks otherwise.
EmpiricalLagStats empirical_lag_stats(const ChainSample& sample, int lag, int grid_n);

struct MarginalInvarianceReport {
  bool identical = false;
  std::size_t differing_cells = 0;
  EmpiricalLagStats uniform;
  EmpiricalLagStats transformed;
};

/// Runs the chain twice with the same seed, once with a uniform marginal and
/// once with `marginal`, and compares the rank-based lag statistics exactly.
MarginalInvarianceReport marginal_invariance_check(const CopulaSpec& spec, std::size_t steps,
                                                   std::uint64_t seed, const Marginal& marginal,
                                                   int lag, int grid_n);

}  // namespace copulalab
