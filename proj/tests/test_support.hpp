#pragma once

// Generators shared by the unit and acceptance suites.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "copulalab/copula.hpp"
#include "copulalab/grid.hpp"

namespace copulalab::testing {

/// Random doubly stochastic grid: a convex combination of random permutation
/// matrices (Birkhoff), so marginals are exact up to rounding. Some cells stay
/// empty when few permutations are drawn.
inline GridCopula random_grid(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> count_dist(1, 2 * n);
  std::uniform_real_distribution<double> weight_dist(0.05, 1.0);
  const int count = count_dist(rng);
  std::vector<double> weights(count);
  for (auto& w : weights) w = weight_dist(rng);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  Eigen::MatrixXd masses = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> perm(n);
  for (int k = 0; k < count; ++k) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) masses(i, perm[i]) += weights[k] / total / n;
  }
  return GridCopula(std::move(masses));
}

/// One of W, M, Pi, a random Frechet member or a random Marshall-Olkin member.
inline CopulaSpec random_family_member(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (kind(rng)) {
    case 0: return CopulaSpec::lower_bound();
    case 1: return CopulaSpec::upper_bound();
    case 2: return CopulaSpec::independence();
    case 3: {
      const double a = unit(rng);
      const double b = unit(rng) * (1.0 - a);
      return CopulaSpec::frechet(a, b);
    }
    default: return CopulaSpec::marshall_olkin(unit(rng), unit(rng));
  }
}

inline std::vector<double> random_weights(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::vector<double> w(k);
  for (auto& v : w) v = unit(rng);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  // Put the rounding residue on the last weight so the sum is 1 to the ulp.
  w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
  return w;
}

}  // namespace copulalab::testing
