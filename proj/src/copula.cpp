#include "copulalab/copula.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "copulalab/errors.hpp"
#include "copulalab/grid.hpp"

namespace copulalab {
namespace {

constexpr double kParamTol = 1e-12;
// Points closer than this to a singular support are reported as lying on it.
constexpr double kSupportTol = 1e-14;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, std::string_view family, std::string_view what) {
  if (!ok) throw ValidationError(fmt::format("{}: {} violated", family, what));
}

void validate(const CopulaSpec::Variant& v) {
  std::visit(
      Overloaded{
          [](const family::Independence&) {}, [](const family::LowerBound&) {},
          [](const family::UpperBound&) {},
          [](const family::Frechet& f) {
            require(std::isfinite(f.a) && f.a >= 0.0, "frechet", "a >= 0");
            require(std::isfinite(f.b) && f.b >= 0.0, "frechet", "b >= 0");
            require(f.a + f.b <= 1.0 + kParamTol, "frechet", "a+b <= 1");
          },
          [](const family::Mardia& m) {
            require(std::isfinite(m.theta) && std::abs(m.theta) <= 1.0, "mardia", "|theta| <= 1");
          },
          [](const family::MarshallOlkin& mo) {
            require(std::isfinite(mo.a) && mo.a >= 0.0 && mo.a <= 1.0, "marshall-olkin",
                    "0 <= a <= 1");
            require(std::isfinite(mo.b) && mo.b >= 0.0 && mo.b <= 1.0, "marshall-olkin",
                    "0 <= b <= 1");
          },
          [](const family::Mixture& mix) {
            require(!mix.components.empty(), "mixture", "nonempty components");
            require(mix.weights.size() == mix.components.size(), "mixture",
                    "len(weights) == len(components)");
            for (double w : mix.weights) {
              require(std::isfinite(w) && w > 0.0, "mixture", "weights > 0");
            }
            const double total = std::accumulate(mix.weights.begin(), mix.weights.end(), 0.0);
            require(std::abs(total - 1.0) <= kParamTol, "mixture", "sum(weights) == 1");
          },
          [](const family::GridRef& g) { require(g.grid != nullptr, "grid", "masses loaded"); },
      },
      v);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double cdf_w(double x, double y) { return std::max(x + y - 1.0, 0.0); }
double cdf_m(double x, double y) { return std::min(x, y); }

double frechet_cdf(double a, double b, double x, double y) {
  return a * cdf_w(x, y) + b * cdf_m(x, y) + (1.0 - a - b) * x * y;
}

family::Frechet mardia_params(double theta) {
  const double t2 = theta * theta;
  return {t2 * (1.0 - theta) / 2.0, t2 * (1.0 + theta) / 2.0};
}

// Bilinear interpolation of the cumulative cell masses; exact for a measure
// that is uniform within each cell.
double grid_cdf(const GridCopula& g, double x, double y) {
  const int n = g.resolution();
  const double nx = x * n;
  const double ny = y * n;
  double total = 0.0;
  const int imax = std::min(n, static_cast<int>(std::ceil(nx)));
  const int jmax = std::min(n, static_cast<int>(std::ceil(ny)));
  for (int i = 0; i < imax; ++i) {
    const double fx = std::min(1.0, nx - i);
    for (int j = 0; j < jmax; ++j) {
      const double fy = std::min(1.0, ny - j);
      total += g.mass(i, j) * fx * fy;
    }
  }
  return total;
}

double grid_conditional(const GridCopula& g, double x, double y) {
  const int n = g.resolution();
  const int i = std::clamp(static_cast<int>(std::floor(x * n)), 0, n - 1);
  const double ny = y * n;
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    total += g.mass(i, j) * std::clamp(ny - j, 0.0, 1.0);
  }
  return clamp01(n * total);
}

}  // namespace

bool family::Mixture::operator==(const Mixture& other) const {
  return weights == other.weights && components == other.components;
}

bool family::GridRef::operator==(const GridRef& other) const {
  if (path != other.path) return false;
  if (grid == other.grid) return true;
  return grid && other.grid && *grid == *other.grid;
}

CopulaSpec::CopulaSpec(Variant v) : v_(std::move(v)) { validate(v_); }

CopulaSpec CopulaSpec::independence() { return CopulaSpec(family::Independence{}); }
CopulaSpec CopulaSpec::lower_bound() { return CopulaSpec(family::LowerBound{}); }
CopulaSpec CopulaSpec::upper_bound() { return CopulaSpec(family::UpperBound{}); }
CopulaSpec CopulaSpec::frechet(double a, double b) { return CopulaSpec(family::Frechet{a, b}); }
CopulaSpec CopulaSpec::mardia(double theta) { return CopulaSpec(family::Mardia{theta}); }
CopulaSpec CopulaSpec::marshall_olkin(double a, double b) {
  return CopulaSpec(family::MarshallOlkin{a, b});
}
CopulaSpec CopulaSpec::mixture(std::vector<double> weights, std::vector<CopulaSpec> components) {
  return CopulaSpec(family::Mixture{std::move(weights), std::move(components)});
}
CopulaSpec CopulaSpec::grid(std::shared_ptr<const GridCopula> grid, std::string path) {
  return CopulaSpec(family::GridRef{std::move(path), std::move(grid)});
}

std::string_view CopulaSpec::type_name() const {
  return std::visit(Overloaded{
                        [](const family::Independence&) { return "independence"; },
                        [](const family::LowerBound&) { return "w"; },
                        [](const family::UpperBound&) { return "m"; },
                        [](const family::Frechet&) { return "frechet"; },
                        [](const family::Mardia&) { return "mardia"; },
                        [](const family::MarshallOlkin&) { return "marshall-olkin"; },
                        [](const family::Mixture&) { return "mixture"; },
                        [](const family::GridRef&) { return "grid"; },
                    },
                    v_);
}

double eval_cdf(const CopulaSpec& spec, double x, double y) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw ValidationError(fmt::format("eval_cdf: point ({}, {}) outside [0,1]^2", x, y));
  }
  return std::visit(
      Overloaded{
          [&](const family::Independence&) { return x * y; },
          [&](const family::LowerBound&) { return cdf_w(x, y); },
          [&](const family::UpperBound&) { return cdf_m(x, y); },
          [&](const family::Frechet& f) { return frechet_cdf(f.a, f.b, x, y); },
          [&](const family::Mardia& m) {
            const auto f = mardia_params(m.theta);
            return frechet_cdf(f.a, f.b, x, y);
          },
          [&](const family::MarshallOlkin& mo) {
            return std::min(x * std::pow(y, 1.0 - mo.a), y * std::pow(x, 1.0 - mo.b));
          },
          [&](const family::Mixture& mix) {
            double total = 0.0;
            for (std::size_t k = 0; k < mix.components.size(); ++k) {
              total += mix.weights[k] * eval_cdf(mix.components[k], x, y);
            }
            return clamp01(total);
          },
          [&](const family::GridRef& g) { return clamp01(grid_cdf(*g.grid, x, y)); },
      },
      spec.variant());
}

std::optional<double> eval_ac_density(const CopulaSpec& spec, double x, double y) {
  if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)) {
    throw ValidationError(
        fmt::format("eval_ac_density: point ({}, {}) outside the open unit square", x, y));
  }
  const bool on_diagonal = std::abs(y - x) <= kSupportTol;
  const bool on_antidiagonal = std::abs(x + y - 1.0) <= kSupportTol;
  auto frechet_density = [&](double a, double b) -> std::optional<double> {
    if ((b > 0.0 && on_diagonal) || (a > 0.0 && on_antidiagonal)) return std::nullopt;
    return 1.0 - a - b;
  };
  return std::visit(
      Overloaded{
          [&](const family::Independence&) -> std::optional<double> { return 1.0; },
          [&](const family::LowerBound&) { return frechet_density(1.0, 0.0); },
          [&](const family::UpperBound&) { return frechet_density(0.0, 1.0); },
          [&](const family::Frechet& f) { return frechet_density(f.a, f.b); },
          [&](const family::Mardia& m) {
            const auto f = mardia_params(m.theta);
            return frechet_density(f.a, f.b);
          },
          [&](const family::MarshallOlkin& mo) -> std::optional<double> {
            const double ya = std::pow(y, mo.a);
            const double xb = std::pow(x, mo.b);
            if (mo.a > 0.0 && mo.b > 0.0 && std::abs(ya - xb) <= kSupportTol) return std::nullopt;
            // Above the curve C = x y^(1-a); below it C = y x^(1-b).
            if (ya > xb) return (1.0 - mo.a) * std::pow(y, -mo.a);
            return (1.0 - mo.b) * std::pow(x, -mo.b);
          },
          [&](const family::Mixture& mix) -> std::optional<double> {
            double total = 0.0;
            for (std::size_t k = 0; k < mix.components.size(); ++k) {
              const auto d = eval_ac_density(mix.components[k], x, y);
              if (!d) return std::nullopt;
              total += mix.weights[k] * *d;
            }
            return total;
          },
          [&](const family::GridRef&) -> std::optional<double> {
            throw UnsupportedError(
                "eval_ac_density: grid specs have piecewise densities; use the grid masses");
          },
      },
      spec.variant());
}

double conditional_cdf(const CopulaSpec& spec, double x, double y) {
  if (!(x > 0.0 && x < 1.0 && y >= 0.0 && y <= 1.0)) {
    throw ValidationError(
        fmt::format("conditional_cdf: need x in (0,1), y in [0,1], got ({}, {})", x, y));
  }
  auto frechet_conditional = [&](double a, double b) {
    return a * (y >= 1.0 - x ? 1.0 : 0.0) + b * (y >= x ? 1.0 : 0.0) + (1.0 - a - b) * y;
  };
  return std::visit(
      Overloaded{
          [&](const family::Independence&) { return y; },
          [&](const family::LowerBound&) { return frechet_conditional(1.0, 0.0); },
          [&](const family::UpperBound&) { return frechet_conditional(0.0, 1.0); },
          [&](const family::Frechet& f) { return frechet_conditional(f.a, f.b); },
          [&](const family::Mardia& m) {
            const auto f = mardia_params(m.theta);
            return frechet_conditional(f.a, f.b);
          },
          [&](const family::MarshallOlkin& mo) {
            // Right limit at the jump: the upper branch holds on the curve itself.
            if (std::pow(y, mo.a) >= std::pow(x, mo.b)) return std::pow(y, 1.0 - mo.a);
            return (1.0 - mo.b) * y * std::pow(x, -mo.b);
          },
          [&](const family::Mixture& mix) {
            double total = 0.0;
            for (std::size_t k = 0; k < mix.components.size(); ++k) {
              total += mix.weights[k] * conditional_cdf(mix.components[k], x, y);
            }
            return clamp01(total);
          },
          [&](const family::GridRef& g) { return grid_conditional(*g.grid, x, y); },
      },
      spec.variant());
}

FrechetParams frechet_fold_params(double a, double b, int n) {
  CopulaSpec::frechet(a, b);  // validates
  if (n < 1) throw ValidationError(fmt::format("frechet_fold_params: lag n >= 1 violated ({})", n));
  // W*W = M, W*M = M*W = W, M*M = M and Pi absorbs everything, so the pair
  // (a_n + b_n, b_n - a_n) evolves as ((a+b)^n, (b-a)^n).
  const double sum = std::pow(a + b, n);
  const double diff = std::pow(b - a, n);
  return {std::max(0.0, (sum - diff) / 2.0), std::max(0.0, (sum + diff) / 2.0), n};
}

std::optional<family::Frechet> as_frechet(const CopulaSpec& spec) {
  return std::visit(
      Overloaded{
          [](const family::Independence&) -> std::optional<family::Frechet> {
            return family::Frechet{0.0, 0.0};
          },
          [](const family::LowerBound&) -> std::optional<family::Frechet> {
            return family::Frechet{1.0, 0.0};
          },
          [](const family::UpperBound&) -> std::optional<family::Frechet> {
            return family::Frechet{0.0, 1.0};
          },
          [](const family::Frechet& f) -> std::optional<family::Frechet> { return f; },
          [](const family::Mardia& m) -> std::optional<family::Frechet> {
            return mardia_params(m.theta);
          },
          [](const family::MarshallOlkin&) -> std::optional<family::Frechet> {
            return std::nullopt;
          },
          [](const family::Mixture& mix) -> std::optional<family::Frechet> {
            family::Frechet out;
            for (std::size_t k = 0; k < mix.components.size(); ++k) {
              const auto f = as_frechet(mix.components[k]);
              if (!f) return std::nullopt;
              out.a += mix.weights[k] * f->a;
              out.b += mix.weights[k] * f->b;
            }
            return out;
          },
          [](const family::GridRef&) -> std::optional<family::Frechet> { return std::nullopt; },
      },
      spec.variant());
}

double ac_density_infimum(const CopulaSpec& spec) {
  return std::visit(
      Overloaded{
          [](const family::Independence&) { return 1.0; },
          [](const family::LowerBound&) { return 0.0; },
          [](const family::UpperBound&) { return 0.0; },
          [](const family::Frechet& f) { return std::max(0.0, 1.0 - f.a - f.b); },
          [](const family::Mardia& m) { return 1.0 - m.theta * m.theta; },
          [](const family::MarshallOlkin& mo) { return std::min(1.0 - mo.a, 1.0 - mo.b); },
          [](const family::Mixture& mix) {
            double total = 0.0;
            for (std::size_t k = 0; k < mix.components.size(); ++k) {
              total += mix.weights[k] * ac_density_infimum(mix.components[k]);
            }
            return total;
          },
          [](const family::GridRef& g) {
            const int n = g.grid->resolution();
            return static_cast<double>(n) * n * g.grid->masses().minCoeff();
          },
      },
      spec.variant());
}

}  // namespace copulalab
