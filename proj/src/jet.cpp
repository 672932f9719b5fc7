#include "riemap/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "riemap/errors.hpp"

namespace riemap {

namespace {

// Per-variable-count tables shared by every jet order: the graded-lex
// multi-index list up to kMaxJetOrder, Cauchy product triples grouped by
// output rank, and derivative shift maps.
struct Layout {
  int num_vars = 0;
  std::vector<MultiIndex> indices;
  std::array<int, kMaxJetOrder + 2> prefix{};  // prefix[k] = count with degree < k
  std::map<MultiIndex, int> rank;
  struct Product {
    int lhs, rhs, out;
  };
  std::vector<Product> products;  // sorted by out
  std::array<std::vector<int>, kMaxJetVars> shift;  // rank of alpha + e_v, or -1
  std::vector<double> factorial_weight;             // alpha!
};

void enumerate(int num_vars, int deg, int var, MultiIndex& cur,
               std::vector<MultiIndex>& out) {
  if (var == num_vars - 1) {
    cur[var] = static_cast<std::uint8_t>(deg);
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int k = deg; k >= 0; --k) {
    cur[var] = static_cast<std::uint8_t>(k);
    enumerate(num_vars, deg - k, var + 1, cur, out);
  }
  cur[var] = 0;
}

Layout build_layout(int num_vars) {
  Layout L;
  L.num_vars = num_vars;
  for (int d = 0; d <= kMaxJetOrder; ++d) {
    L.prefix[d] = static_cast<int>(L.indices.size());
    if (num_vars == 0) {
      if (d == 0) L.indices.push_back(MultiIndex{});
      continue;
    }
    MultiIndex cur{};
    enumerate(num_vars, d, 0, cur, L.indices);
  }
  L.prefix[kMaxJetOrder + 1] = static_cast<int>(L.indices.size());
  const int n = static_cast<int>(L.indices.size());
  for (int r = 0; r < n; ++r) L.rank[L.indices[r]] = r;
  for (int out = 0; out < n; ++out) {
    const MultiIndex& a = L.indices[out];
    for (int lhs = 0; lhs < n; ++lhs) {
      const MultiIndex& b = L.indices[lhs];
      bool fits = true;
      MultiIndex c{};
      for (int v = 0; v < kMaxJetVars; ++v) {
        if (b[v] > a[v]) {
          fits = false;
          break;
        }
        c[v] = static_cast<std::uint8_t>(a[v] - b[v]);
      }
      if (fits) L.products.push_back({lhs, L.rank.at(c), out});
    }
  }
  for (int v = 0; v < num_vars; ++v) {
    L.shift[v].assign(n, -1);
    for (int r = 0; r < n; ++r) {
      MultiIndex up = L.indices[r];
      up[v] = static_cast<std::uint8_t>(up[v] + 1);
      auto it = L.rank.find(up);
      if (it != L.rank.end()) L.shift[v][r] = it->second;
    }
  }
  L.factorial_weight.resize(n);
  for (int r = 0; r < n; ++r) {
    double w = 1.0;
    for (int v = 0; v < kMaxJetVars; ++v)
      for (int k = 2; k <= L.indices[r][v]; ++k) w *= k;
    L.factorial_weight[r] = w;
  }
  return L;
}

const Layout& layout(int num_vars) {
  static const std::array<Layout, kMaxJetVars + 1> layouts = [] {
    std::array<Layout, kMaxJetVars + 1> all;
    for (int n = 0; n <= kMaxJetVars; ++n) all[n] = build_layout(n);
    return all;
  }();
  return layouts[num_vars];
}

void check_config(int num_vars, int order) {
  if (num_vars < 0 || num_vars > kMaxJetVars)
    throw Error(ErrorKind::Configuration,
                "jet variable count " + std::to_string(num_vars) +
                    " outside supported range [0, " +
                    std::to_string(kMaxJetVars) + "]");
  if (order < 0 || order > kMaxJetOrder)
    throw Error(ErrorKind::Configuration,
                "jet order " + std::to_string(order) +
                    " outside supported range [0, " +
                    std::to_string(kMaxJetOrder) + "]");
}

void check_compatible(const Jet& a, const Jet& b) {
  if (a.num_vars() != b.num_vars())
    throw Error(ErrorKind::Configuration,
                "jet variable counts differ: " + std::to_string(a.num_vars()) +
                    " vs " + std::to_string(b.num_vars()));
}

}  // namespace

MultiIndex multi_index(std::initializer_list<int> exponents) {
  MultiIndex alpha{};
  int v = 0;
  for (int e : exponents) {
    if (v >= kMaxJetVars || e < 0 || e > kMaxJetOrder + 1)
      throw Error(ErrorKind::Usage, "invalid multi-index");
    alpha[v++] = static_cast<std::uint8_t>(e);
  }
  return alpha;
}

int degree(const MultiIndex& alpha) {
  int d = 0;
  for (auto e : alpha) d += e;
  return d;
}

int jet_size(int num_vars, int order) {
  check_config(num_vars, order);
  return layout(num_vars).prefix[order + 1];
}

Jet::Jet(int num_vars, int order)
    : num_vars_(static_cast<std::uint8_t>(num_vars)),
      order_(static_cast<std::uint8_t>(order)),
      coeffs_(jet_size(num_vars, order), 0.0) {}

Jet Jet::constant(double value, int num_vars, int order) {
  Jet j(num_vars, order);
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(double value, int var_index, int num_vars, int order) {
  check_config(num_vars, order);
  if (var_index < 0 || var_index >= num_vars)
    throw Error(ErrorKind::Configuration,
                "variable index " + std::to_string(var_index) +
                    " out of range for " + std::to_string(num_vars) +
                    " variables");
  Jet j = Jet::constant(value, num_vars, order);
  // Degree-one coefficients follow the degree-zero one in variable order.
  if (order >= 1) j.coeffs_[1 + var_index] = 1.0;
  return j;
}

Jet lift_variable(double value, int var_index, int num_vars, int order) {
  return Jet::variable(value, var_index, num_vars, order);
}

double Jet::coeff(const MultiIndex& alpha) const {
  for (int v = num_vars_; v < kMaxJetVars; ++v)
    if (alpha[v] != 0) return 0.0;
  if (degree(alpha) > order_) return 0.0;
  return coeffs_[layout(num_vars_).rank.at(alpha)];
}

double Jet::partial(const MultiIndex& alpha) const {
  return extract_partial(*this, alpha);
}

double extract_partial(const Jet& a, const MultiIndex& alpha) {
  const int d = degree(alpha);
  if (d > a.order())
    throw Error(ErrorKind::Usage, "partial derivative of total order " +
                                      std::to_string(d) +
                                      " requested from a jet of order " +
                                      std::to_string(a.order()));
  for (int v = a.num_vars(); v < kMaxJetVars; ++v)
    if (alpha[v] != 0)
      throw Error(ErrorKind::Usage, "multi-index names an absent variable");
  const auto& L = layout(a.num_vars());
  const int r = L.rank.at(alpha);
  return L.factorial_weight[r] * a.coeffs()[r];
}

Jet Jet::derivative(int var) const {
  if (var < 0 || var >= num_vars_)
    throw Error(ErrorKind::Usage, "derivative variable out of range");
  if (order_ == 0)
    throw Error(ErrorKind::Configuration,
                "insufficient jet order: cannot differentiate an order-0 jet; "
                "rerun with jet order 4");
  Jet out(num_vars_, order_ - 1);
  const auto& L = layout(num_vars_);
  for (std::size_t r = 0; r < out.coeffs_.size(); ++r) {
    const int up = L.shift[var][r];
    out.coeffs_[r] = (L.indices[r][var] + 1) * coeffs_[up];
  }
  return out;
}

Jet Jet::truncated(int order) const {
  if (order >= order_) return *this;
  Jet out(num_vars_, std::max(order, 0));
  std::copy_n(coeffs_.begin(), out.coeffs_.size(), out.coeffs_.begin());
  return out;
}

Jet Jet::operator-() const {
  Jet out = *this;
  for (double& c : out.coeffs_) c = -c;
  return out;
}

Jet& Jet::operator+=(const Jet& rhs) {
  check_compatible(*this, rhs);
  if (rhs.order_ < order_) *this = truncated(rhs.order_);
  for (std::size_t r = 0; r < coeffs_.size(); ++r) coeffs_[r] += rhs.coeffs_[r];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  check_compatible(*this, rhs);
  if (rhs.order_ < order_) *this = truncated(rhs.order_);
  for (std::size_t r = 0; r < coeffs_.size(); ++r) coeffs_[r] -= rhs.coeffs_[r];
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_compatible(a, b);
  const int order = std::min(a.order_, b.order_);
  Jet out(a.num_vars_, order);
  const auto& L = layout(a.num_vars_);
  const int n = static_cast<int>(out.coeffs_.size());
  for (const auto& p : L.products) {
    if (p.out >= n) break;
    out.coeffs_[p.out] += a.coeffs_[p.lhs] * b.coeffs_[p.rhs];
  }
  return out;
}

Jet& Jet::operator*=(const Jet& rhs) { return *this = *this * rhs; }

Jet operator/(double a, const Jet& b) {
  const double b0 = b.value();
  if (b0 == 0.0 || !std::isfinite(b0))
    throw SingularityError("division by a jet with zero constant term");
  std::array<double, kMaxJetOrder + 1> series{};
  double inv = 1.0 / b0;
  double term = a * inv;
  for (int k = 0; k <= b.order(); ++k) {
    series[k] = term;
    term *= -inv;
  }
  return compose_series(b, std::span(series.data(), b.order() + 1));
}

Jet operator/(const Jet& a, const Jet& b) {
  check_compatible(a, b);
  return a * (1.0 / b);
}

Jet& Jet::operator/=(const Jet& rhs) { return *this = *this / rhs; }

Jet& Jet::operator+=(double rhs) {
  coeffs_[0] += rhs;
  return *this;
}
Jet& Jet::operator-=(double rhs) {
  coeffs_[0] -= rhs;
  return *this;
}
Jet& Jet::operator*=(double rhs) {
  for (double& c : coeffs_) c *= rhs;
  return *this;
}
Jet& Jet::operator/=(double rhs) {
  if (rhs == 0.0) throw SingularityError("division by zero constant");
  for (double& c : coeffs_) c /= rhs;
  return *this;
}

Jet compose_series(const Jet& a, std::span<const double> series) {
  // Horner in the nilpotent part h = a - a0.
  Jet h = a;
  h.coeffs_[0] = 0.0;
  const int top = std::min<int>(a.order(), static_cast<int>(series.size()) - 1);
  Jet acc = Jet::constant(series[top], a.num_vars(), a.order());
  for (int k = top - 1; k >= 0; --k) {
    acc = acc * h;
    acc.coeffs_[0] += series[k];
  }
  return acc;
}

Jet compose(const Jet& outer, std::span<const Jet> inner) {
  if (static_cast<int>(inner.size()) != outer.num_vars())
    throw Error(ErrorKind::Configuration,
                "composition needs one inner jet per outer variable");
  if (inner.empty()) return outer;
  const int n = inner[0].num_vars();
  int order = outer.order();
  for (const Jet& j : inner) {
    if (j.num_vars() != n)
      throw Error(ErrorKind::Configuration, "inner jets disagree on variables");
    order = std::min(order, j.order());
  }
  // powers[v][k] = (inner_v - inner_v(0))^k
  std::vector<std::vector<Jet>> powers(inner.size());
  for (std::size_t v = 0; v < inner.size(); ++v) {
    Jet h = inner[v].truncated(order);
    h.coeffs_[0] = 0.0;
    powers[v].push_back(Jet::constant(1.0, n, order));
    for (int k = 1; k <= order; ++k) powers[v].push_back(powers[v].back() * h);
  }
  const auto& L = layout(outer.num_vars());
  Jet out = Jet::constant(0.0, n, order);
  const int count = L.prefix[order + 1];
  for (int r = 0; r < count; ++r) {
    const double c = outer.coeffs_[r];
    if (c == 0.0) continue;
    Jet term = Jet::constant(c, n, order);
    for (std::size_t v = 0; v < inner.size(); ++v) {
      const int e = L.indices[r][v];
      if (e) term = term * powers[v][e];
    }
    out += term;
  }
  return out;
}

namespace {

using Series = std::array<double, kMaxJetOrder + 1>;

Jet expand(const Jet& a, const Series& s) {
  return compose_series(a, std::span(s.data(), a.order() + 1));
}

double inv_factorial(int k) {
  static constexpr std::array<double, 5> f{1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
  return f[k];
}

// Taylor coefficients of a function whose derivatives cycle with period 2
// or 4 (sin, cos, sinh, cosh).
Series cyclic_series(std::array<double, 4> derivs, int period) {
  Series s{};
  for (int k = 0; k <= kMaxJetOrder; ++k) s[k] = derivs[k % period] * inv_factorial(k);
  return s;
}

}  // namespace

Jet sin(const Jet& a) {
  const double x = a.value();
  return expand(a, cyclic_series({std::sin(x), std::cos(x), -std::sin(x), -std::cos(x)}, 4));
}

Jet cos(const Jet& a) {
  const double x = a.value();
  return expand(a, cyclic_series({std::cos(x), -std::sin(x), -std::cos(x), std::sin(x)}, 4));
}

Jet tan(const Jet& a) {
  const double c = std::cos(a.value());
  if (std::abs(c) < 1e-300) throw SingularityError("tan evaluated at a pole");
  const double x = a.value();
  const Jet t = lift_variable(x, 0, 1, a.order());
  const Jet q = sin(t) / cos(t);
  Series s{};
  for (int k = 1; k <= a.order(); ++k) s[k] = q.coeffs()[k];
  s[0] = std::tan(x);
  return expand(a, s);
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  Series s{};
  for (int k = 0; k <= kMaxJetOrder; ++k) s[k] = e * inv_factorial(k);
  return expand(a, s);
}

Jet log(const Jet& a) {
  const double x = a.value();
  if (!(x > 0.0)) throw SingularityError("log of a non-positive value");
  Series s{};
  s[0] = std::log(x);
  double p = 1.0;
  for (int k = 1; k <= kMaxJetOrder; ++k) {
    p /= x;
    s[k] = ((k % 2) ? 1.0 : -1.0) * p / k;
  }
  return expand(a, s);
}

Jet sqrt(const Jet& a) {
  if (!(a.value() > 0.0)) throw SingularityError("sqrt of a non-positive value");
  return pow(a, 0.5);
}

Jet sinh(const Jet& a) {
  const double x = a.value();
  return expand(a, cyclic_series({std::sinh(x), std::cosh(x), 0.0, 0.0}, 2));
}

Jet cosh(const Jet& a) {
  const double x = a.value();
  return expand(a, cyclic_series({std::cosh(x), std::sinh(x), 0.0, 0.0}, 2));
}

Jet tanh(const Jet& a) {
  const double x = a.value();
  const Jet t = lift_variable(x, 0, 1, a.order());
  const Jet q = sinh(t) / cosh(t);
  Series s{};
  for (int k = 1; k <= a.order(); ++k) s[k] = q.coeffs()[k];
  s[0] = std::tanh(x);
  return expand(a, s);
}

Jet atan(const Jet& a) {
  // Integrate the series of 1 / (1 + t^2) around t0.
  const double t0 = a.value();
  const int order = a.order();
  Series s{};
  s[0] = std::atan(t0);
  if (order > 0) {
    const Jet t = lift_variable(t0, 0, 1, order - 1);
    const Jet d = 1.0 / (1.0 + t * t);
    for (int k = 1; k <= order; ++k) s[k] = d.coeffs()[k - 1] / k;
  }
  return expand(a, s);
}

Jet pow(const Jet& a, double p) {
  const double x = a.value();
  const bool integral = std::floor(p) == p && std::abs(p) <= 64.0;
  if (integral && p >= 0.0) {
    Jet out = Jet::constant(1.0, a.num_vars(), a.order());
    Jet base = a;
    auto e = static_cast<long>(p);
    while (e > 0) {
      if (e & 1) out = out * base;
      e >>= 1;
      if (e) base = base * base;
    }
    return out;
  }
  if (integral) {
    if (x == 0.0) throw SingularityError("negative power of a zero value");
    return 1.0 / pow(a, -p);
  }
  if (!(x > 0.0))
    throw SingularityError("non-integer power of a non-positive value");
  Series s{};
  double binom = 1.0;
  for (int k = 0; k <= kMaxJetOrder; ++k) {
    s[k] = binom * std::pow(x, p - k);
    binom *= (p - k) / (k + 1);
  }
  return expand(a, s);
}

double max_abs_diff(const Jet& a, const Jet& b) {
  const int order = std::min(a.order(), b.order());
  double m = 0.0;
  const int n = jet_size(a.num_vars(), order);
  for (int r = 0; r < n; ++r) m = std::max(m, std::abs(a.coeffs()[r] - b.coeffs()[r]));
  return m;
}

}  // namespace riemap
