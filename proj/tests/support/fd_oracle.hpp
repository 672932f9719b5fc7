#pragma once

// Finite-difference reference for the tension and bitension fields. Works
// directly on the expression trees in long double with nested five-point
// central differences; shares no code with the jet pipeline.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "riemap/scene.hpp"
#include "support/plain_eval.hpp"

namespace riemap::testing {

using LD = long double;
using LVec = Eigen::Matrix<LD, Eigen::Dynamic, 1>;
using LMat = Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic>;
using LField = std::function<LVec(const LVec&)>;

class FdOracle {
 public:
  /// h: step of the inner differences (tension); h_outer: step used when
  /// differentiating the tension itself (larger, since the tension already
  /// carries difference noise).
  explicit FdOracle(const SmoothMap& f, LD h = 1e-3L, LD h_outer = 1e-2L)
      : f_(f), h_(h), h_outer_(h_outer) {}

  LVec map(const LVec& p) const {
    LVec y(f_.target->dim);
    for (int a = 0; a < y.size(); ++a) y[a] = eval(f_.components[a], p);
    return y;
  }

  /// d/dx_i of a vector-valued function, five-point stencil.
  LVec partial(const LField& fn, const LVec& p, int i, LD h) const {
    LVec e = LVec::Zero(p.size());
    e[i] = h;
    return (-fn(p + 2 * e) + 8 * fn(p + e) - 8 * fn(p - e) + fn(p - 2 * e)) / (12 * h);
  }

  /// Christoffel symbols gamma[k](i, j) of a chart metric at x.
  std::vector<LMat> christoffel(const ChartManifold& m, const LVec& x) const {
    const int d = m.dim;
    std::vector<LMat> dg;  // dg[l] = d_l g
    for (int l = 0; l < d; ++l) {
      LField flat = [&](const LVec& q) {
        const LMat g = metric(m, q);
        return LVec(Eigen::Map<const LVec>(g.data(), d * d));
      };
      const LVec v = partial(flat, x, l, 1e-4L);
      dg.push_back(Eigen::Map<const LMat>(v.data(), d, d));
    }
    const LMat gi = metric(m, x).inverse();
    std::vector<LMat> gamma(d, LMat::Zero(d, d));
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int l = 0; l < d; ++l)
            gamma[k](i, j) += 0.5L * gi(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
    return gamma;
  }

  LVec tension(const LVec& p) const {
    const int m = f_.source->dim, n = f_.target->dim;
    LField fmap = [&](const LVec& q) { return map(q); };
    std::vector<LVec> df;
    for (int i = 0; i < m; ++i) df.push_back(partial(fmap, p, i, h_));
    const LMat gi = metric(*f_.source, p).inverse();
    const auto g1 = christoffel(*f_.source, p);
    const auto g2 = christoffel(*f_.target, map(p));
    LVec tau = LVec::Zero(n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        LField dj = [&, j](const LVec& q) { return partial(fmap, q, j, h_); };
        LVec hij = partial(dj, p, i, h_);
        for (int k = 0; k < m; ++k) hij -= g1[k](i, j) * df[k];
        hij += apply(g2, df[i], df[j]);
        tau += gi(i, j) * hij;
      }
    return tau;
  }

  /// tau2 = tr nabla^2 tau - tr R2(dF, tau) dF.
  LVec bitension(const LVec& p) const {
    const int m = f_.source->dim, n = f_.target->dim;
    LField fmap = [&](const LVec& q) { return map(q); };
    LField tau = [&](const LVec& q) { return tension(q); };
    // nabla_j tau as a function of the point.
    auto dtau = [&](int j) -> LField {
      return [&, j](const LVec& q) {
        const LVec dfj = partial(fmap, q, j, h_);
        return LVec(partial(tau, q, j, h_outer_) + apply(christoffel(*f_.target, map(q)), dfj, tension(q)));
      };
    };
    std::vector<LVec> df, dt;
    for (int i = 0; i < m; ++i) {
      df.push_back(partial(fmap, p, i, h_));
      dt.push_back(dtau(i)(p));
    }
    const LVec t0 = tension(p);
    const LMat gi = metric(*f_.source, p).inverse();
    const auto g1 = christoffel(*f_.source, p);
    const LVec y = map(p);
    const auto g2 = christoffel(*f_.target, y);
    LVec out = LVec::Zero(n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        LVec hij = partial(dtau(j), p, i, h_outer_) + apply(g2, df[i], dt[j]);
        for (int k = 0; k < m; ++k) hij -= g1[k](i, j) * dt[k];
        out += gi(i, j) * hij;
      }
    // Target curvature from differences of the Christoffel symbols.
    std::vector<std::vector<LMat>> dgamma;  // dgamma[l][k](i, j) = d_l gamma^k_ij
    for (int l = 0; l < n; ++l) {
      LField flat = [&](const LVec& q) {
        const auto g = christoffel(*f_.target, q);
        LVec v(n * n * n);
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) v[(k * n + i) * n + j] = g[k](i, j);
        return v;
      };
      const LVec v = partial(flat, y, l, 1e-3L);
      std::vector<LMat> s(n, LMat(n, n));
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) s[k](i, j) = v[(k * n + i) * n + j];
      dgamma.push_back(std::move(s));
    }
    // R(X, Y)Z^l = R^l_kij X^i Y^j Z^k with
    // R^l_kij = d_i G^l_jk - d_j G^l_ik + G^l_iq G^q_jk - G^l_jq G^q_ik.
    auto riemann = [&](const LVec& x, const LVec& yv, const LVec& z) {
      LVec r = LVec::Zero(n);
      for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              LD c = dgamma[i][l](j, k) - dgamma[j][l](i, k);
              for (int q = 0; q < n; ++q) c += g2[l](i, q) * g2[q](j, k) - g2[l](j, q) * g2[q](i, k);
              r[l] += c * x[i] * yv[j] * z[k];
            }
      return r;
    };
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) out -= gi(a, b) * riemann(df[a], t0, df[b]);
    return out;
  }

 private:
  const SmoothMap& f_;
  LD h_;
  LD h_outer_;

  static LD eval(const Expr& e, const LVec& p) {
    BasicPlainEval<LD> ev{std::span<const LD>(p.data(), p.size())};
    return ev(*e);
  }

  static LMat metric(const ChartManifold& m, const LVec& x) {
    LMat g(m.dim, m.dim);
    for (int i = 0; i < m.dim; ++i)
      for (int j = 0; j < m.dim; ++j) g(i, j) = eval(m.metric[i][j], x);
    return g;
  }

  static LVec apply(const std::vector<LMat>& gamma, const LVec& x, const LVec& y) {
    LVec out(gamma.size());
    for (std::size_t k = 0; k < gamma.size(); ++k) out[k] = x.dot(gamma[k] * y);
    return out;
  }
};

inline LVec to_long(std::span<const double> p) {
  LVec v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = p[i];
  return v;
}

/// |a - b| / max(|a|, |b|, 1), with long double reference b.
inline double relative_gap(const Eigen::VectorXd& a, const LVec& b) {
  const Eigen::VectorXd bd = b.cast<double>();
  const double scale = std::max({a.norm(), bd.norm(), 1.0});
  return (a - bd).norm() / scale;
}

}  // namespace riemap::testing
