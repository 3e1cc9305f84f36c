#pragma once

// Mixing coefficients of a grid copula, computed exactly over the grid
// sigma-algebra (unions of cells along each axis).
//
// The grid sets form a sub-collection of the Borel sets, so rho, phi, beta and
// psi are lower bounds for the continuous coefficients and psi_prime is an
// upper bound. Reports label these values "grid-exact".

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "copulalab/copula.hpp"
#include "copulalab/grid.hpp"

namespace copulalab {

enum class Coefficient { Rho, Phi, Beta, PsiPrime, Psi };

std::string_view to_string(Coefficient c);
Coefficient parse_coefficient(std::string_view name);

struct CellIndex {
  int row = 0;
  int col = 0;
  bool operator==(const CellIndex&) const = default;
};

/// Maximal correlation: the largest singular value of n*masses on the
/// mean-zero subspace. Throws NumericalError if the SVD does not converge.
double rho(const GridCopula& g);

/// max over rows i of (1/2) sum_j |n*m_ij - 1/n|.
double phi(const GridCopula& g);

/// (1/2) sum_ij |m_ij - 1/n^2|.
double beta(const GridCopula& g);

/// n^2 * min cell mass.
double psi_prime(const GridCopula& g);

/// max(n^2 * max mass - 1, 1 - n^2 * min mass).
double psi(const GridCopula& g);

double coefficient(const GridCopula& g, Coefficient which);

/// All five coefficients with their extremal witnesses. Ties resolve to the
/// lowest (row, col) index.
struct Coefficients {
  double rho = 0.0;
  double phi = 0.0;
  double beta = 0.0;
  double psi_prime = 0.0;
  double psi = 0.0;
  int worst_row = 0;      // row attaining phi
  CellIndex min_cell;     // attains psi_prime
  CellIndex max_cell;     // densest cell
};

Coefficients coefficients(const GridCopula& g);

/// Exhaustive extremum over all pairs of nonempty cell unions (n <= 4).
/// For rho the value is the best correlation found by optimizing
/// cell-constant mean-zero function pairs from seeded random starts, a lower
/// bound on the true value. Throws ValidationError for n > 4.
double brute_force_coefficient(const GridCopula& g, Coefficient which, std::uint64_t seed = 0);

inline constexpr int kBruteForceMaxResolution = 4;

struct MixingRow {
  int lag = 1;
  Coefficients values;
};

struct MixingReport {
  int resolution = 0;
  std::vector<MixingRow> rows;
};

/// Discretizes spec at resolution n and evaluates every coefficient at each
/// lag (lags nonempty, strictly ascending, >= 1).
MixingReport report(const CopulaSpec& spec, int n, std::span<const int> lags);

}  // namespace copulalab
