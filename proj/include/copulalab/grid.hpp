#pragma once

// Discretized copula measures on a uniform n x n partition of the unit square,
// and the fold-product algebra on them.

#include <filesystem>
#include <iosfwd>
#include <span>

#include <Eigen/Dense>

#include "copulalab/copula.hpp"

namespace copulalab {

inline constexpr int kDefaultResolution = 64;

/// masses(i, j) is the copula measure of the cell ((i)/n, (i+1)/n] x ((j)/n, (j+1)/n]
/// (0-based). Row index follows x, the state at time 0.
class GridCopula {
 public:
  using Matrix = Eigen::MatrixXd;

  /// Validates non-negativity, total mass and uniform marginals. Masses in
  /// (-1e-15, 0) are clamped to zero; anything more negative is rejected.
  explicit GridCopula(Matrix masses);

  int resolution() const { return static_cast<int>(masses_.rows()); }
  const Matrix& masses() const { return masses_; }
  double mass(int i, int j) const { return masses_(i, j); }

  /// n^2 * mass: the piecewise-constant density on cell (i, j).
  double density(int i, int j) const;

  /// n * masses, a doubly stochastic matrix (the Markov operator on cells).
  Matrix transition() const;

  bool operator==(const GridCopula& other) const { return masses_ == other.masses_; }

 private:
  Matrix masses_;
};

/// Exact cell masses by CDF inclusion-exclusion. Requires n >= 2.
GridCopula discretize(const CopulaSpec& spec, int n);

/// n * g1.masses * g2.masses.
GridCopula fold_product(const GridCopula& g1, const GridCopula& g2);

/// m-fold product of g with itself, m >= 1.
GridCopula fold_power(const GridCopula& g, int m);

GridCopula mix_grids(std::span<const double> weights, std::span<const GridCopula> grids);

/// Sums factor x factor blocks of cells; resolution must be divisible by factor.
GridCopula coarsen(const GridCopula& g, int factor);

/// Grid CSV: first line n, then n rows of n comma-separated masses (17 significant digits).
void write_grid_csv(std::ostream& out, const GridCopula& g);
GridCopula read_grid_csv(std::istream& in);
void save_grid_csv(const std::filesystem::path& path, const GridCopula& g);
GridCopula load_grid_csv(const std::filesystem::path& path);

}  // namespace copulalab
