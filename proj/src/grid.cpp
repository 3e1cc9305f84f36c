#include "copulalab/grid.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "copulalab/errors.hpp"

namespace copulalab {
namespace {

constexpr double kDust = 1e-15;
constexpr double kMarginTol = 1e-12;

void require_same_resolution(const GridCopula& g1, const GridCopula& g2, std::string_view op) {
  if (g1.resolution() != g2.resolution()) {
    throw ValidationError(fmt::format("{}: resolution mismatch ({} vs {})", op, g1.resolution(),
                                      g2.resolution()));
  }
}

// Neumaier summation keeps validation sums exact to a few ulps at large n.
template <typename Range>
double compensated_sum(const Range& values) {
  double sum = 0.0;
  double carry = 0.0;
  for (const double v : values) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

}  // namespace

GridCopula::GridCopula(Matrix masses) : masses_(std::move(masses)) {
  const Eigen::Index n = masses_.rows();
  if (n < 1 || masses_.cols() != n) {
    throw ValidationError(
        fmt::format("grid: square n x n masses required, got {} x {}", n, masses_.cols()));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double& m = masses_(i, j);
      if (!std::isfinite(m)) {
        throw ValidationError(fmt::format("grid: non-finite mass at cell ({}, {})", i, j));
      }
      if (m < 0.0) {
        if (m <= -kDust) {
          throw ValidationError(
              fmt::format("grid: negative mass {:.3e} at cell ({}, {})", m, i, j));
        }
        m = 0.0;
      }
    }
  }
  const double total = compensated_sum(masses_.reshaped());
  if (std::abs(total - 1.0) > kMarginTol) {
    throw ValidationError(fmt::format("grid: total mass {:.17g} != 1", total));
  }
  const double marginal = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double row = compensated_sum(masses_.row(i));
    const double col = compensated_sum(masses_.col(i));
    if (std::abs(row - marginal) > kMarginTol) {
      throw ValidationError(fmt::format("grid: row {} sums to {:.17g}, expected 1/n", i, row));
    }
    if (std::abs(col - marginal) > kMarginTol) {
      throw ValidationError(fmt::format("grid: column {} sums to {:.17g}, expected 1/n", i, col));
    }
  }
}

double GridCopula::density(int i, int j) const {
  const double n = resolution();
  return n * n * masses_(i, j);
}

GridCopula::Matrix GridCopula::transition() const {
  return static_cast<double>(resolution()) * masses_;
}

namespace {

GridCopula::Matrix inclusion_exclusion_masses(const CopulaSpec& spec, int n) {
  Eigen::MatrixXd cdf(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    for (int j = 0; j <= n; ++j) {
      cdf(i, j) = eval_cdf(spec, x, static_cast<double>(j) / n);
    }
  }
  GridCopula::Matrix masses(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      masses(i, j) = cdf(i + 1, j + 1) - cdf(i, j + 1) - cdf(i + 1, j) + cdf(i, j);
    }
  }
  return masses;
}

// W and M put mass 1/n on the anti-diagonal and diagonal cells, Pi spreads it evenly.
GridCopula::Matrix frechet_masses(const family::Frechet& f, int n) {
  const double dn = n;
  GridCopula::Matrix masses =
      GridCopula::Matrix::Constant(n, n, (1.0 - f.a - f.b) / (dn * dn));
  for (int i = 0; i < n; ++i) {
    masses(i, i) += f.b / dn;
    masses(i, n - 1 - i) += f.a / dn;
  }
  return masses;
}

GridCopula::Matrix cell_masses(const CopulaSpec& spec, int n) {
  if (const auto* mix = spec.get_if<family::Mixture>()) {
    GridCopula::Matrix masses = GridCopula::Matrix::Zero(n, n);
    for (std::size_t k = 0; k < mix->components.size(); ++k) {
      masses += mix->weights[k] * cell_masses(mix->components[k], n);
    }
    return masses;
  }
  if (const auto f = as_frechet(spec)) return frechet_masses(*f, n);
  return inclusion_exclusion_masses(spec, n);
}

}  // namespace

GridCopula discretize(const CopulaSpec& spec, int n) {
  if (n < 2) throw ValidationError(fmt::format("discretize: n >= 2 violated ({})", n));
  return GridCopula(cell_masses(spec, n));
}

GridCopula fold_product(const GridCopula& g1, const GridCopula& g2) {
  require_same_resolution(g1, g2, "fold_product");
  GridCopula::Matrix out = static_cast<double>(g1.resolution()) * (g1.masses() * g2.masses());
  return GridCopula(std::move(out));
}

GridCopula fold_power(const GridCopula& g, int m) {
  if (m < 1) throw ValidationError(fmt::format("fold_power: m >= 1 violated ({})", m));
  // Square-and-multiply on the transition matrix; masses are recovered at the end.
  const double n = g.resolution();
  GridCopula::Matrix base = g.transition();
  GridCopula::Matrix acc;
  bool have_acc = false;
  for (int e = m; e > 0; e >>= 1) {
    if (e & 1) {
      if (have_acc) {
        acc = (acc * base).eval();
      } else {
        acc = base;
        have_acc = true;
      }
    }
    if (e > 1) base = (base * base).eval();
  }
  return GridCopula(acc / n);
}

GridCopula mix_grids(std::span<const double> weights, std::span<const GridCopula> grids) {
  if (weights.empty() || weights.size() != grids.size()) {
    throw ValidationError(fmt::format("mix_grids: {} weights for {} grids", weights.size(),
                                      grids.size()));
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ValidationError("mix_grids: weights > 0 violated");
    total += w;
  }
  if (std::abs(total - 1.0) > kMarginTol) {
    throw ValidationError(fmt::format("mix_grids: weights sum to {:.17g}, expected 1", total));
  }
  GridCopula::Matrix out = GridCopula::Matrix::Zero(grids[0].resolution(), grids[0].resolution());
  for (std::size_t k = 0; k < grids.size(); ++k) {
    require_same_resolution(grids[0], grids[k], "mix_grids");
    out += weights[k] * grids[k].masses();
  }
  return GridCopula(std::move(out));
}

GridCopula coarsen(const GridCopula& g, int factor) {
  const int n = g.resolution();
  if (factor < 1 || n % factor != 0) {
    throw ValidationError(fmt::format("coarsen: factor {} does not divide n = {}", factor, n));
  }
  const int coarse = n / factor;
  GridCopula::Matrix out(coarse, coarse);
  for (int i = 0; i < coarse; ++i) {
    for (int j = 0; j < coarse; ++j) {
      out(i, j) = g.masses().block(i * factor, j * factor, factor, factor).sum();
    }
  }
  return GridCopula(std::move(out));
}

void write_grid_csv(std::ostream& out, const GridCopula& g) {
  const int n = g.resolution();
  out << n << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j > 0) out << ',';
      out << fmt::format("{:.17g}", g.mass(i, j));
    }
    out << '\n';
  }
}

GridCopula read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("grid csv: missing resolution line");
  int n = 0;
  try {
    std::size_t pos = 0;
    n = std::stoi(line, &pos);
    if (line.find_first_not_of(" \r", pos) != std::string::npos) throw std::invalid_argument(line);
  } catch (const std::exception&) {
    throw ValidationError(fmt::format("grid csv: bad resolution line '{}'", line));
  }
  if (n < 1) throw ValidationError(fmt::format("grid csv: resolution {} < 1", n));
  GridCopula::Matrix masses(n, n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw ValidationError(fmt::format("grid csv: expected {} rows, got {}", n, i));
    }
    std::stringstream row(line);
    std::string cell;
    int j = 0;
    while (std::getline(row, cell, ',')) {
      if (j >= n) throw ValidationError(fmt::format("grid csv: row {} has more than {} values", i, n));
      try {
        std::size_t pos = 0;
        masses(i, j) = std::stod(cell, &pos);
        if (cell.find_first_not_of(" \r", pos) != std::string::npos) {
          throw std::invalid_argument(cell);
        }
      } catch (const std::exception&) {
        throw ValidationError(fmt::format("grid csv: bad number '{}' at ({}, {})", cell, i, j));
      }
      ++j;
    }
    if (j != n) throw ValidationError(fmt::format("grid csv: row {} has {} values, expected {}", i, j, n));
  }
  return GridCopula(std::move(masses));
}

void save_grid_csv(const std::filesystem::path& path, const GridCopula& g) {
  std::ofstream out(path);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  write_grid_csv(out, g);
}

GridCopula load_grid_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot read grid file '{}'", path.string()));
  return read_grid_csv(in);
}

}  // namespace copulalab
