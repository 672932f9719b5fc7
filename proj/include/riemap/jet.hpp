#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A Jet stores the Taylor coefficients of a scalar function at a base
// point, coeff(alpha) = d^alpha f / alpha!, for every multi-index with
// |alpha| <= order. Coefficients are kept densely in graded-lexicographic
// order, so the coefficients of a lower-order truncation form a prefix.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace riemap {

inline constexpr int kMaxJetVars = 8;
inline constexpr int kMaxJetOrder = 4;

using MultiIndex = std::array<std::uint8_t, kMaxJetVars>;

/// Builds a multi-index from a list of exponents, e.g. multi_index({1, 1}).
MultiIndex multi_index(std::initializer_list<int> exponents);
int degree(const MultiIndex& alpha);

/// Number of coefficients of a jet in `num_vars` variables up to `order`.
int jet_size(int num_vars, int order);

class Jet {
 public:
  Jet() = default;

  static Jet constant(double value, int num_vars, int order);
  /// The coordinate function x_{var_index} expanded at `value`.
  static Jet variable(double value, int var_index, int num_vars, int order);

  int num_vars() const noexcept { return num_vars_; }
  int order() const noexcept { return order_; }
  double value() const noexcept { return coeffs_[0]; }

  /// Taylor coefficient d^alpha f / alpha!; zero for |alpha| > order.
  double coeff(const MultiIndex& alpha) const;
  /// Partial derivative d^alpha f at the base point.
  double partial(const MultiIndex& alpha) const;
  std::span<const double> coeffs() const noexcept { return coeffs_; }

  /// Jet of d f / d x_var; valid to order - 1.
  Jet derivative(int var) const;
  Jet truncated(int order) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(const Jet& rhs);
  Jet& operator/=(const Jet& rhs);
  Jet& operator+=(double rhs);
  Jet& operator-=(double rhs);
  Jet& operator*=(double rhs);
  Jet& operator/=(double rhs);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double b) { return a += b; }
  friend Jet operator+(double a, Jet b) { return b += a; }
  friend Jet operator-(Jet a, double b) { return a -= b; }
  friend Jet operator-(double a, const Jet& b) { return (-b) += a; }
  friend Jet operator*(Jet a, double b) { return a *= b; }
  friend Jet operator*(double a, Jet b) { return b *= a; }
  friend Jet operator/(Jet a, double b) { return a /= b; }
  friend Jet operator/(double a, const Jet& b);

 private:
  Jet(int num_vars, int order);

  friend Jet compose_series(const Jet& a, std::span<const double> series);
  friend Jet compose(const Jet& outer, std::span<const Jet> inner);

  std::uint8_t num_vars_ = 0;
  std::uint8_t order_ = 0;
  std::vector<double> coeffs_;
};

/// Jet of the coordinate function x_{var_index}; throws a configuration
/// error for unsupported sizes.
Jet lift_variable(double value, int var_index, int num_vars, int order);

/// d^alpha f at the base point; throws a usage error when |alpha| > order.
double extract_partial(const Jet& a, const MultiIndex& alpha);

/// Evaluates sum_k series[k] * (a - a0)^k, truncated at the order of a.
Jet compose_series(const Jet& a, std::span<const double> series);

/// Substitutes jets for the variables of `outer`. `outer` is expanded at
/// y0 = (inner[i].value()), so the result is the jet of outer(inner(x)).
Jet compose(const Jet& outer, std::span<const Jet> inner);

Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tan(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet tanh(const Jet& a);
Jet atan(const Jet& a);
/// a^p for a real constant p. Non-integer p needs a positive base.
Jet pow(const Jet& a, double p);

/// Largest absolute coefficient, used by tests to compare jets.
double max_abs_diff(const Jet& a, const Jet& b);

}  // namespace riemap
