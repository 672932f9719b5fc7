#include "riemap/geometry.hpp"

#include <cmath>

#include "riemap/errors.hpp"

namespace riemap {

JetMatrix JetMatrix::zeros(int rows, int cols, int num_vars, int order) {
  return JetMatrix(rows, cols, Jet::constant(0.0, num_vars, order));
}

JetMatrix JetMatrix::identity(int n, int num_vars, int order) {
  JetMatrix m = zeros(n, n, num_vars, order);
  for (int i = 0; i < n; ++i) m(i, i) = Jet::constant(1.0, num_vars, order);
  return m;
}

JetVector JetMatrix::column(int j) const {
  JetVector v;
  v.reserve(rows_);
  for (int i = 0; i < rows_; ++i) v.push_back((*this)(i, j));
  return v;
}

JetMatrix JetMatrix::transpose() const {
  JetMatrix t;
  t.rows_ = cols_;
  t.cols_ = rows_;
  t.a_.resize(a_.size());
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Eigen::MatrixXd JetMatrix::value() const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).value();
  return m;
}

namespace {

void check_shape(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::Configuration, std::string("shape mismatch in ") + what);
}

}  // namespace

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
  check_shape(a.cols() == b.rows() && a.cols() > 0, "matrix product");
  JetMatrix c(a.rows(), b.cols(), Jet());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      Jet s = a(i, 0) * b(0, j);
      for (int k = 1; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = std::move(s);
    }
  return c;
}

JetMatrix operator+(const JetMatrix& a, const JetMatrix& b) {
  check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "matrix sum");
  JetMatrix c = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) += b(i, j);
  return c;
}

JetMatrix operator-(const JetMatrix& a, const JetMatrix& b) {
  check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "matrix difference");
  JetMatrix c = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
  return c;
}

JetVector operator*(const JetMatrix& a, const JetVector& x) {
  check_shape(a.cols() == static_cast<int>(x.size()) && a.cols() > 0, "matrix-vector product");
  JetVector y;
  y.reserve(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    Jet s = a(i, 0) * x[0];
    for (int k = 1; k < a.cols(); ++k) s += a(i, k) * x[k];
    y.push_back(std::move(s));
  }
  return y;
}

JetVector operator+(const JetVector& a, const JetVector& b) {
  check_shape(a.size() == b.size(), "vector sum");
  JetVector c = a;
  for (std::size_t i = 0; i < a.size(); ++i) c[i] += b[i];
  return c;
}

JetVector operator-(const JetVector& a, const JetVector& b) {
  check_shape(a.size() == b.size(), "vector difference");
  JetVector c = a;
  for (std::size_t i = 0; i < a.size(); ++i) c[i] -= b[i];
  return c;
}

JetVector operator*(const Jet& s, const JetVector& x) {
  JetVector y;
  y.reserve(x.size());
  for (const Jet& v : x) y.push_back(s * v);
  return y;
}

JetVector operator*(double s, const JetVector& x) {
  JetVector y = x;
  for (Jet& v : y) v *= s;
  return y;
}

Jet inner(const JetMatrix& g, const JetVector& x, const JetVector& y) {
  const JetVector gy = g * y;
  Jet s = x[0] * gy[0];
  for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * gy[i];
  return s;
}

JetMatrix inverse(const JetMatrix& a) {
  check_shape(a.rows() == a.cols() && a.rows() > 0, "inverse");
  const int n = a.rows();
  const int nv = a(0, 0).num_vars();
  int order = kMaxJetOrder;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) order = std::min(order, a(i, j).order());
  JetMatrix m = a;
  JetMatrix inv = JetMatrix::identity(n, nv, order);
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j).value()));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m(r, col).value()) > std::abs(m(piv, col).value())) piv = r;
    if (std::abs(m(piv, col).value()) <= 1e-14 * std::max(scale, 1e-300))
      throw SingularityError("singular matrix in jet inverse");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(m(piv, j), m(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    const Jet d = 1.0 / m(col, col);
    for (int j = 0; j < n; ++j) {
      m(col, j) = m(col, j) * d;
      inv(col, j) = inv(col, j) * d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Jet f = m(r, col);
      for (int j = 0; j < n; ++j) {
        m(r, j) -= f * m(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

JetVector zero_vector(int n, int num_vars, int order) {
  return JetVector(n, Jet::constant(0.0, num_vars, order));
}

JetVector constant_vector(const Eigen::VectorXd& v, int num_vars, int order) {
  JetVector out;
  out.reserve(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(Jet::constant(v[i], num_vars, order));
  return out;
}

JetVector derivative(const JetVector& v, int var) {
  JetVector out;
  out.reserve(v.size());
  for (const Jet& j : v) out.push_back(j.derivative(var));
  return out;
}

Eigen::VectorXd value(const JetVector& v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].value();
  return out;
}

JetVector truncated(const JetVector& v, int order) {
  JetVector out;
  out.reserve(v.size());
  for (const Jet& j : v) out.push_back(j.truncated(order));
  return out;
}

int min_order(const JetVector& v) {
  int o = kMaxJetOrder;
  for (const Jet& j : v) o = std::min(o, j.order());
  return o;
}

JetVector lift_point(std::span<const double> p, int order) {
  const int n = static_cast<int>(p.size());
  JetVector x;
  x.reserve(n);
  for (int i = 0; i < n; ++i) x.push_back(lift_variable(p[i], i, n, order));
  return x;
}

JetMatrix metric_jets(const ChartManifold& m, std::span<const Jet> coords) {
  if (static_cast<int>(coords.size()) != m.dim)
    throw Error(ErrorKind::DimensionMismatch, "metric of '" + m.name + "' needs " +
                                                  std::to_string(m.dim) + " coordinates");
  JetMatrix g(m.dim, m.dim, Jet());
  for (int i = 0; i < m.dim; ++i)
    for (int j = i; j < m.dim; ++j) {
      g(i, j) = eval_ast(m.metric[i][j], coords);
      if (j != i) g(j, i) = g(i, j);
    }
  return g;
}

void require_spd(const Eigen::MatrixXd& g, const ChartManifold& m, std::span<const double> p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 1e-10))
    throw Error(ErrorKind::Geometry,
                "metric of '" + m.name + "' is not positive definite at " +
                    format_point(std::vector<double>(p.begin(), p.end())));
}

JetMatrix metric_at(const ChartManifold& m, std::span<const double> p, int order) {
  const JetVector x = lift_point(p, order);
  JetMatrix g;
  try {
    g = metric_jets(m, x);
  } catch (SingularityError& e) {
    throw e.with_point(std::vector<double>(p.begin(), p.end()));
  }
  require_spd(g.value(), m, p);
  return g;
}

Christoffel christoffel_from_metric(const JetMatrix& g, const JetMatrix& g_inv) {
  const int n = g.rows();
  const int nv = g(0, 0).num_vars();
  if (nv != n)
    throw Error(ErrorKind::Configuration, "Christoffel symbols need jets in chart variables");
  if (g(0, 0).order() < 1)
    throw Error(ErrorKind::Configuration, "Christoffel symbols need metric jets of order >= 1");
  // dg[l](i, j) = d_l g_ij
  std::vector<JetMatrix> dg;
  dg.reserve(n);
  for (int l = 0; l < n; ++l) {
    JetMatrix d(n, n, Jet());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d(i, j) = g(i, j).derivative(l);
    dg.push_back(std::move(d));
  }
  const int order = dg[0](0, 0).order();
  // Christoffel symbols of the first kind, then raise the index.
  std::vector<JetMatrix> first(n, JetMatrix(n, n, Jet()));
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        first[l](i, j) = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        first[l](j, i) = first[l](i, j);
      }
  Christoffel gamma(n, JetMatrix::zeros(n, n, nv, order));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s = Jet::constant(0.0, nv, order);
        for (int l = 0; l < n; ++l) s += g_inv(k, l) * first[l](i, j);
        gamma[k](i, j) = s;
        gamma[k](j, i) = std::move(s);
      }
  return gamma;
}

Christoffel christoffel(const ChartManifold& m, std::span<const double> p, int order) {
  const JetMatrix g = metric_at(m, p, order + 1);
  return christoffel_from_metric(g, inverse(g));
}

std::vector<double> riemann_components(const Christoffel& gamma) {
  const int n = static_cast<int>(gamma.size());
  if (gamma[0](0, 0).order() < 1)
    throw Error(ErrorKind::Configuration, "curvature needs Christoffel jets of order >= 1");
  std::vector<double> r(static_cast<std::size_t>(n) * n * n * n, 0.0);
  auto d = [&](int l, int a, int b, int var) {
    MultiIndex alpha{};
    alpha[var] = 1;
    return gamma[l](a, b).partial(alpha);
  };
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = d(l, j, k, i) - d(l, i, k, j);
          for (int q = 0; q < n; ++q)
            s += gamma[l](i, q).value() * gamma[q](j, k).value() -
                 gamma[l](j, q).value() * gamma[q](i, k).value();
          r[((l * n + k) * n + i) * n + j] = s;
        }
  return r;
}

std::vector<double> riemann_components(const ChartManifold& m, std::span<const double> p) {
  return riemann_components(christoffel(m, p, 1));
}

Eigen::VectorXd apply_riemann(const std::vector<double>& r, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[l] += r[((l * n + k) * n + i) * n + j] * x[i] * y[j] * z[k];
  return out;
}

Eigen::VectorXd riemann_curvature(const ChartManifold& m, std::span<const double> p,
                                  const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& z) {
  return apply_riemann(riemann_components(m, p), x, y, z);
}

Eigen::VectorXd spaceform_curvature(double c, const Eigen::MatrixXd& g, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  return c * (y.dot(g * z) * x - x.dot(g * z) * y);
}

DistributionField constant_distribution(const ChartManifold& m,
                                        std::vector<Eigen::VectorXd> vectors) {
  for (const auto& v : vectors)
    if (v.size() != m.dim)
      throw Error(ErrorKind::DimensionMismatch, "distribution vector has the wrong dimension");
  DistributionField d;
  d.owner = &m;
  d.rank = static_cast<int>(vectors.size());
  d.span = [vectors, n = m.dim](std::span<const double>, int order) {
    std::vector<JetVector> out;
    for (const auto& v : vectors) out.push_back(constant_vector(v, n, order));
    return out;
  };
  return d;
}

JetMatrix span_projector(const JetMatrix& g, std::span<const JetVector> vectors) {
  const int n = g.rows();
  const int q = static_cast<int>(vectors.size());
  const int nv = g(0, 0).num_vars();
  int order = g(0, 0).order();
  for (const auto& v : vectors) order = std::min(order, min_order(v));
  if (q == 0) return JetMatrix::zeros(n, n, nv, order);
  JetMatrix v(n, q, Jet());
  for (int r = 0; r < q; ++r)
    for (int i = 0; i < n; ++i) v(i, r) = vectors[r][i];
  const JetMatrix vtg = v.transpose() * g;
  return v * (inverse(vtg * v) * vtg);
}

JetVector covariant_derivative(const Christoffel& gamma, const JetVector& x, const JetVector& y) {
  const int n = static_cast<int>(y.size());
  JetVector out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    Jet s = x[0] * y[k].derivative(0);
    for (int i = 1; i < n; ++i) s += x[i] * y[k].derivative(i);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += gamma[k](i, j) * x[i] * y[j];
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

/// Rank of a spanning set in the metric g, with the ambiguity band check.
void check_span_rank(const Eigen::MatrixXd& g, const std::vector<JetVector>& span, int rank,
                     double tol_rank, std::span<const double> p) {
  const int n = static_cast<int>(g.rows());
  if (static_cast<int>(span.size()) != rank)
    throw Error(ErrorKind::ConstantRank, "spanning set size differs from the declared rank");
  if (rank == 0) return;
  Eigen::MatrixXd v(n, rank);
  for (int r = 0; r < rank; ++r) v.col(r) = value(span[r]);
  const Eigen::LLT<Eigen::MatrixXd> llt(g);
  const Eigen::MatrixXd w = llt.matrixU() * v;
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(w).singularValues();
  const double thr = tol_rank * s[0];
  int found = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] >= thr / 10 && s[i] <= thr * 10 && s[i] != s[0])
      throw Error(ErrorKind::RankAmbiguity,
                  "ambiguous distribution rank at " +
                      format_point(std::vector<double>(p.begin(), p.end())));
    if (s[i] > thr) ++found;
  }
  if (found != rank || s[0] == 0.0)
    throw Error(ErrorKind::ConstantRank,
                "distribution rank drops to " + std::to_string(s[0] == 0.0 ? 0 : found) +
                    " at " + format_point(std::vector<double>(p.begin(), p.end())));
}

}  // namespace

Eigen::VectorXd sff_from_projectors(const Christoffel& gamma, const JetMatrix& from,
                                    const JetMatrix& to, const JetVector& e, const JetVector& f,
                                    SffKind which) {
  const int n = from.rows();
  const JetVector ef = from * e;
  const JetVector ff = from * f;
  const Eigen::MatrixXd to0 = to.value();
  auto a = [&](const JetVector& x, const JetVector& y) {
    return Eigen::VectorXd(to0 * value(covariant_derivative(gamma, x, y)));
  };
  switch (which) {
    case SffKind::AUnsym: return a(ef, ff);
    case SffKind::BSym:
    case SffKind::BHorizontal: return 0.5 * (a(ef, ff) + a(ff, ef));
    case SffKind::Integrability: {
      // A_E F - A_F E - H[VE, VF], with the bracket from plain derivatives.
      Eigen::VectorXd bracket = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
          MultiIndex d{};
          d[i] = 1;
          bracket[k] += ef[i].value() * ff[k].partial(d) - ff[i].value() * ef[k].partial(d);
        }
      return a(ef, ff) - a(ff, ef) - to0 * bracket;
    }
  }
  return Eigen::VectorXd::Zero(n);
}

Eigen::VectorXd distribution_sff(const ChartManifold& m, const DistributionField& v,
                                 std::span<const double> p, const Eigen::VectorXd& e,
                                 const Eigen::VectorXd& f, SffKind which, double tol_rank) {
  const int n = m.dim;
  const int order = 2;
  const JetMatrix g = metric_at(m, p, order);
  const Christoffel gamma = christoffel_from_metric(g, inverse(g));
  const std::vector<JetVector> span = v.span(p, order);
  check_span_rank(g.value(), span, v.rank, tol_rank, p);
  const JetMatrix pv = span_projector(g, span);
  const JetMatrix ph = JetMatrix::identity(n, n, pv(0, 0).order()) - pv;
  const bool horizontal = which == SffKind::BHorizontal;
  return sff_from_projectors(gamma, horizontal ? ph : pv, horizontal ? pv : ph,
                             constant_vector(e, n, order), constant_vector(f, n, order), which);
}

JetVector mean_curvature_jets(const JetMatrix& g, const Christoffel& gamma,
                              std::span<const JetVector> span, const JetMatrix& p_to) {
  const int n = g.rows();
  const int q = static_cast<int>(span.size());
  const int nv = g(0, 0).num_vars();
  if (q == 0) return zero_vector(n, nv, 0);
  JetMatrix gram(q, q, Jet());
  for (int r = 0; r < q; ++r)
    for (int s = r; s < q; ++s) {
      gram(r, s) = inner(g, span[r], span[s]);
      gram(s, r) = gram(r, s);
    }
  const JetMatrix gi = inverse(gram);
  JetVector acc;
  for (int r = 0; r < q; ++r)
    for (int s = 0; s < q; ++s) {
      const JetVector term = gi(r, s) * covariant_derivative(gamma, span[r], span[s]);
      acc = acc.empty() ? term : acc + term;
    }
  const JetVector mu = p_to * acc;
  return (1.0 / q) * mu;
}

MeanCurvature distribution_mean_curvature(const ChartManifold& m, const DistributionField& d,
                                          std::span<const double> p, double tol_rank) {
  MeanCurvature out;
  out.mu = Eigen::VectorXd::Zero(m.dim);
  if (d.rank == 0) {
    out.trivial = true;
    return out;
  }
  const int order = 2;
  const JetMatrix g = metric_at(m, p, order);
  const Christoffel gamma = christoffel_from_metric(g, inverse(g));
  const std::vector<JetVector> span = d.span(p, order);
  check_span_rank(g.value(), span, d.rank, tol_rank, p);
  const JetMatrix pv = span_projector(g, span);
  const JetMatrix ph = JetMatrix::identity(m.dim, m.dim, pv(0, 0).order()) - pv;
  out.mu = value(mean_curvature_jets(g, gamma, span, ph));
  return out;
}

}  // namespace riemap
