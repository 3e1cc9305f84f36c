#pragma once

// Bivariate copula families and their pointwise evaluation.
//
// A CopulaSpec is an immutable, validated description of a copula: one of the
// elementary families (independence, the Hoeffding bounds W and M, Frechet,
// Mardia, Marshall-Olkin), a finite convex mixture of specs, or a reference to
// a discretized copula stored on a uniform grid.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace copulalab {

class GridCopula;
class CopulaSpec;

namespace family {

struct Independence {
  bool operator==(const Independence&) const = default;
};

/// Hoeffding lower bound W(x,y) = max(x+y-1, 0).
struct LowerBound {
  bool operator==(const LowerBound&) const = default;
};

/// Hoeffding upper bound M(x,y) = min(x,y).
struct UpperBound {
  bool operator==(const UpperBound&) const = default;
};

/// a W + b M + (1-a-b) Pi.
struct Frechet {
  double a = 0.0;
  double b = 0.0;
  bool operator==(const Frechet&) const = default;
};

/// Frechet member with a = theta^2 (1-theta)/2, b = theta^2 (1+theta)/2.
struct Mardia {
  double theta = 0.0;
  bool operator==(const Mardia&) const = default;
};

/// min(x y^(1-a), y x^(1-b)).
struct MarshallOlkin {
  double a = 0.0;
  double b = 0.0;
  bool operator==(const MarshallOlkin&) const = default;
};

struct Mixture {
  std::vector<double> weights;
  std::vector<CopulaSpec> components;
  bool operator==(const Mixture& other) const;
};

/// Piecewise-uniform copula given by a grid of cell masses.
struct GridRef {
  std::string path;
  std::shared_ptr<const GridCopula> grid;
  bool operator==(const GridRef& other) const;
};

}  // namespace family

class CopulaSpec {
 public:
  using Variant = std::variant<family::Independence, family::LowerBound, family::UpperBound,
                               family::Frechet, family::Mardia, family::MarshallOlkin,
                               family::Mixture, family::GridRef>;

  /// Throws ValidationError naming the violated constraint.
  explicit CopulaSpec(Variant v);

  static CopulaSpec independence();
  static CopulaSpec lower_bound();
  static CopulaSpec upper_bound();
  static CopulaSpec frechet(double a, double b);
  static CopulaSpec mardia(double theta);
  static CopulaSpec marshall_olkin(double a, double b);
  static CopulaSpec mixture(std::vector<double> weights, std::vector<CopulaSpec> components);
  static CopulaSpec grid(std::shared_ptr<const GridCopula> grid, std::string path = {});

  const Variant& variant() const { return v_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

  /// The JSON "type" tag of the variant.
  std::string_view type_name() const;

  bool operator==(const CopulaSpec& other) const { return v_ == other.v_; }

 private:
  Variant v_;
};

/// Lag-n parameters of a Frechet copula: C^n = a_n W + b_n M + (1-a_n-b_n) Pi.
struct FrechetParams {
  double a_n = 0.0;
  double b_n = 0.0;
  int n = 1;
};

/// C(x, y) for x, y in [0,1].
double eval_cdf(const CopulaSpec& spec, double x, double y);

/// Density of the absolutely continuous part at an interior point.
/// Returns std::nullopt when (x, y) lies on a singular support of the copula.
/// Throws UnsupportedError for grid-backed specs.
std::optional<double> eval_ac_density(const CopulaSpec& spec, double x, double y);

/// C_{,1}(x, y) = P(X_1 <= y | X_0 = x), right-continuous in y.
double conditional_cdf(const CopulaSpec& spec, double x, double y);

FrechetParams frechet_fold_params(double a, double b, int n);

/// (a, b) such that spec equals a W + b M + (1-a-b) Pi, if spec lies in the
/// Frechet family (independence, W, M, Frechet, Mardia and mixtures thereof).
std::optional<family::Frechet> as_frechet(const CopulaSpec& spec);

/// Essential infimum of the absolutely continuous density over the unit square.
/// For mixtures this is the weighted sum of component infima, a lower bound.
double ac_density_infimum(const CopulaSpec& spec);

}  // namespace copulalab
