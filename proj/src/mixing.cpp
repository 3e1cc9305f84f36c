#include "copulalab/mixing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "copulalab/errors.hpp"
#include "parallel.hpp"

namespace copulalab {

std::string_view to_string(Coefficient c) {
  switch (c) {
    case Coefficient::Rho: return "rho";
    case Coefficient::Phi: return "phi";
    case Coefficient::Beta: return "beta";
    case Coefficient::PsiPrime: return "psi_prime";
    case Coefficient::Psi: return "psi";
  }
  return "?";
}

Coefficient parse_coefficient(std::string_view name) {
  for (auto c : {Coefficient::Rho, Coefficient::Phi, Coefficient::Beta, Coefficient::PsiPrime,
                 Coefficient::Psi}) {
    if (name == to_string(c)) return c;
  }
  if (name == "psi-prime") return Coefficient::PsiPrime;
  throw ValidationError(
      fmt::format("unknown coefficient '{}' (expected rho|phi|beta|psi_prime|psi)", name));
}

double rho(const GridCopula& g) {
  const int n = g.resolution();
  // Removing the constant singular pair (sigma = 1) leaves the operator on
  // mean-zero functions.
  const Eigen::MatrixXd centered =
      g.transition() - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  if (svd.info() != Eigen::Success) {
    throw NumericalError(fmt::format("rho: SVD failed at n = {} (Eigen status {})", n,
                                     static_cast<int>(svd.info())));
  }
  const double top = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  if (!std::isfinite(top)) throw NumericalError("rho: non-finite singular value");
  return std::clamp(top, 0.0, 1.0);
}

double phi(const GridCopula& g) { return coefficients(g).phi; }

double beta(const GridCopula& g) {
  const double n = g.resolution();
  return 0.5 * (g.masses().array() - 1.0 / (n * n)).abs().sum();
}

double psi_prime(const GridCopula& g) {
  const double n = g.resolution();
  return n * n * g.masses().minCoeff();
}

double psi(const GridCopula& g) {
  const double n = g.resolution();
  return std::max(n * n * g.masses().maxCoeff() - 1.0, 1.0 - n * n * g.masses().minCoeff());
}

double coefficient(const GridCopula& g, Coefficient which) {
  switch (which) {
    case Coefficient::Rho: return rho(g);
    case Coefficient::Phi: return phi(g);
    case Coefficient::Beta: return beta(g);
    case Coefficient::PsiPrime: return psi_prime(g);
    case Coefficient::Psi: return psi(g);
  }
  throw ValidationError("coefficient: unknown id");
}

Coefficients coefficients(const GridCopula& g) {
  const int n = g.resolution();
  const double nd = n;
  const auto& m = g.masses();
  Coefficients out;
  double worst = -1.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double row_tv = 0.0;
    for (int j = 0; j < n; ++j) {
      row_tv += std::abs(nd * m(i, j) - 1.0 / nd);
      if (m(i, j) < lo) {
        lo = m(i, j);
        out.min_cell = {i, j};
      }
      if (m(i, j) > hi) {
        hi = m(i, j);
        out.max_cell = {i, j};
      }
    }
    row_tv *= 0.5;
    if (row_tv > worst) {
      worst = row_tv;
      out.worst_row = i;
    }
  }
  out.phi = worst;
  out.beta = beta(g);
  out.psi_prime = nd * nd * lo;
  out.psi = std::max(nd * nd * hi - 1.0, 1.0 - nd * nd * lo);
  out.rho = rho(g);
  return out;
}

namespace {

// Best correlation sum_ij m_ij f_i g_j over cell-constant f, g with
// (1/n) sum f = 0 and (1/n) sum f^2 = 1 (same for g), by alternating
// maximization: for fixed g the optimal f is the centered, normalized
// conditional expectation of g.
double rho_search(const GridCopula& g, std::uint64_t seed) {
  const int n = g.resolution();
  const auto& m = g.masses();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;

  auto normalize = [n](std::vector<double>& f) -> bool {
    double mean = 0.0;
    for (double v : f) mean += v;
    mean /= n;
    double sq = 0.0;
    for (double& v : f) {
      v -= mean;
      sq += v * v;
    }
    const double norm = std::sqrt(sq / n);
    if (norm < 1e-300) return false;
    for (double& v : f) v /= norm;
    return true;
  };
  auto correlation = [&](const std::vector<double>& f, const std::vector<double>& h) {
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) c += m(i, j) * f[i] * h[j];
    }
    return c;
  };

  double best = 0.0;
  constexpr int kStarts = 16;
  constexpr int kSweeps = 5000;
  for (int start = 0; start < kStarts; ++start) {
    std::vector<double> f(n), h(n);
    for (auto& v : h) v = normal(rng);
    if (!normalize(h)) continue;
    for (auto& v : f) v = normal(rng);
    if (normalize(f)) best = std::max(best, std::abs(correlation(f, h)));
    double previous = -1.0;
    for (int sweep = 0; sweep < kSweeps; ++sweep) {
      for (int i = 0; i < n; ++i) {
        f[i] = 0.0;
        for (int j = 0; j < n; ++j) f[i] += m(i, j) * h[j];
      }
      if (!normalize(f)) break;
      for (int j = 0; j < n; ++j) {
        h[j] = 0.0;
        for (int i = 0; i < n; ++i) h[j] += m(i, j) * f[i];
      }
      if (!normalize(h)) break;
      const double value = correlation(f, h);
      best = std::max(best, value);
      if (std::abs(value - previous) < 1e-16) break;
      previous = value;
    }
  }
  return best;
}

}  // namespace

double brute_force_coefficient(const GridCopula& g, Coefficient which, std::uint64_t seed) {
  const int n = g.resolution();
  if (n > kBruteForceMaxResolution) {
    throw ValidationError(fmt::format(
        "brute_force_coefficient: resolution {} exceeds enumeration limit {}", n,
        kBruteForceMaxResolution));
  }
  if (which == Coefficient::Rho) return rho_search(g, seed);

  const auto& m = g.masses();
  const double nd = n;
  const unsigned full = (1u << n) - 1u;

  if (which == Coefficient::Beta) {
    // Every union of cells D in the product grid.
    const unsigned cells = static_cast<unsigned>(n * n);
    const std::uint64_t limit = std::uint64_t{1} << cells;
    double best = 0.0;
    for (std::uint64_t d = 1; d < limit; ++d) {
      double mu = 0.0;
      for (unsigned c = 0; c < cells; ++c) {
        if (d >> c & 1u) mu += m(static_cast<int>(c) / n, static_cast<int>(c) % n);
      }
      const double product = std::popcount(d) / (nd * nd);
      best = std::max(best, std::abs(mu - product));
    }
    return best;
  }

  double best = which == Coefficient::PsiPrime ? std::numeric_limits<double>::infinity() : 0.0;
  for (unsigned a = 1; a <= full; ++a) {
    const double la = std::popcount(a) / nd;
    for (unsigned b = 1; b <= full; ++b) {
      const double lb = std::popcount(b) / nd;
      double mu = 0.0;
      for (int i = 0; i < n; ++i) {
        if (!(a >> i & 1u)) continue;
        for (int j = 0; j < n; ++j) {
          if (b >> j & 1u) mu += m(i, j);
        }
      }
      switch (which) {
        case Coefficient::Phi: best = std::max(best, std::abs(mu / la - lb)); break;
        case Coefficient::PsiPrime: best = std::min(best, mu / (la * lb)); break;
        case Coefficient::Psi: best = std::max(best, std::abs(mu - la * lb) / (la * lb)); break;
        default: break;
      }
    }
  }
  return best;
}

MixingReport report(const CopulaSpec& spec, int n, std::span<const int> lags) {
  if (lags.empty()) throw ValidationError("report: lags must be nonempty");
  for (std::size_t k = 0; k < lags.size(); ++k) {
    if (lags[k] < 1) throw ValidationError(fmt::format("report: lag {} < 1", lags[k]));
    if (k > 0 && lags[k] <= lags[k - 1]) {
      throw ValidationError("report: lags must be strictly ascending");
    }
  }
  const GridCopula base = discretize(spec, n);
  MixingReport out;
  out.resolution = n;
  out.rows.resize(lags.size());
  detail::parallel_for(lags.size(), [&](std::size_t k) {
    out.rows[k] = {lags[k], coefficients(fold_power(base, lags[k]))};
  });
  return out;
}

}  // namespace copulalab
