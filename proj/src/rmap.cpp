#include "riemap/rmap.hpp"

#include <cmath>

#include "riemap/errors.hpp"

namespace riemap {

namespace {

std::vector<double> to_vector(std::span<const double> p) { return {p.begin(), p.end()}; }

/// Chooses `count` candidates greedily by largest residual norm at the base
/// point, then orthonormalizes the chosen candidates as jets in that order.
/// Freezing the choice at the base point keeps the frame smooth nearby.
std::vector<JetVector> pivoted_gram_schmidt(const JetMatrix& metric,
                                            const std::vector<JetVector>& candidates, int count,
                                            std::span<const double> p) {
  const Eigen::MatrixXd g = metric.value();
  std::vector<Eigen::VectorXd> basis;
  std::vector<int> pivots;
  std::vector<bool> used(candidates.size(), false);
  for (int step = 0; step < count; ++step) {
    int best = -1;
    double best_norm = 0.0;
    Eigen::VectorXd best_vec;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      Eigen::VectorXd r = value(candidates[c]);
      for (const auto& b : basis) r -= b.dot(g * r) * b;
      const double nr = std::sqrt(std::max(0.0, r.dot(g * r)));
      if (nr > best_norm) {
        best = static_cast<int>(c);
        best_norm = nr;
        best_vec = r / nr;
      }
    }
    if (best < 0)
      throw Error(ErrorKind::ConstantRank, "frame construction lost rank at " + format_point(to_vector(p)));
    used[best] = true;
    pivots.push_back(best);
    basis.push_back(best_vec);
  }
  std::vector<JetVector> out;
  for (int piv : pivots) {
    JetVector u = candidates[piv];
    for (const auto& e : out) u = u - inner(metric, u, e) * e;
    out.push_back((1.0 / sqrt(inner(metric, u, u))) * u);
  }
  return out;
}

std::vector<JetVector> columns(const JetMatrix& a) {
  std::vector<JetVector> out;
  for (int j = 0; j < a.cols(); ++j) out.push_back(a.column(j));
  return out;
}

/// sum_a u_a u_a^T as a matrix.
JetMatrix outer_sum(const std::vector<JetVector>& u, int dim, int num_vars, int order) {
  JetMatrix s = JetMatrix::zeros(dim, dim, num_vars, order);
  for (const auto& v : u)
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) s(i, j) += v[i] * v[j];
  return s;
}

Eigen::MatrixXd value_columns(const std::vector<JetVector>& u, int dim) {
  Eigen::MatrixXd out(dim, u.size());
  for (std::size_t a = 0; a < u.size(); ++a) out.col(a) = value(u[a]);
  return out;
}

}  // namespace

MapPoint::MapPoint(const SmoothMap& f, std::span<const double> point, int k, double tol_rank)
    : map(&f), p(point.begin(), point.end()), order(k) {
  if (k < 2 || k > kMaxJetOrder)
    throw Error(ErrorKind::Configuration, "map analysis needs jet order 2..4");
  const ChartManifold& src = *f.source;
  const ChartManifold& dst = *f.target;
  m = src.dim;
  n = dst.dim;
  if (static_cast<int>(p.size()) != m)
    throw Error(ErrorKind::DimensionMismatch, "point has the wrong dimension for '" + src.name + "'");

  try {
    x = lift_point(p, k);
    g1 = metric_jets(src, x);
    require_spd(g1.value(), src, p);
    g1_inv = inverse(g1);
    gamma1 = christoffel_from_metric(g1, g1_inv);

    for (const Expr& c : f.components) F.push_back(eval_ast(c, x));
    y0 = std::vector<double>(n);
    for (int a = 0; a < n; ++a) y0[a] = F[a].value();
    if (!dst.contains(y0, 1e-9))
      throw Error(ErrorKind::Domain, "image " + format_point(y0) + " of " + format_point(p) +
                                         " leaves the domain of '" + dst.name + "'");
    J = JetMatrix(n, m, Jet());
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < m; ++i) J(a, i) = F[a].derivative(i);

    g2 = metric_jets(dst, F);
    require_spd(g2.value(), dst, y0);
    // Target Christoffel symbols in target variables at F(p), then pulled back.
    const JetMatrix gt = metric_at(dst, y0, k);
    const Christoffel gamma_t = christoffel_from_metric(gt, inverse(gt));
    r2 = riemann_components(gamma_t);
    gamma2.assign(n, JetMatrix(n, n, Jet()));
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
          gamma2[c](a, b) = compose(gamma_t[c](a, b), F);
          gamma2[c](b, a) = gamma2[c](a, b);
        }
  } catch (const SingularityError& e) {
    throw e.with_point(p);
  }

  sff.assign(n, JetMatrix::zeros(m, m, m, k - 2));
  for (int c = 0; c < n; ++c)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        Jet s = J(c, i).derivative(j);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s += gamma2[c](a, b) * J(a, i) * J(b, j);
        for (int q = 0; q < m; ++q) s -= gamma1[q](i, j) * J(c, q);
        sff[c](i, j) = s;
        sff[c](j, i) = std::move(s);
      }

  // Rank from the Jacobian between the inner-product spaces (T_p M1, g1) and
  // (T_F(p) M2, g2): L2^T J L1^{-T} with g = L L^T.
  const Eigen::MatrixXd l1 = g1.value().llt().matrixL();
  const Eigen::MatrixXd l2 = g2.value().llt().matrixL();
  const Eigen::MatrixXd l1_inv_t =
      l1.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::MatrixXd weighted = l2.transpose() * J.value() * l1_inv_t;
  singular_values = Eigen::JacobiSVD<Eigen::MatrixXd>(weighted).singularValues();
  const double smax = singular_values.size() ? singular_values[0] : 0.0;
  const double thr = tol_rank * smax;
  m2 = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
    const double s = singular_values[i];
    if (smax > 0 && s >= thr / 10 && s <= thr * 10)
      throw Error(ErrorKind::RankAmbiguity,
                  "ambiguous rank of '" + f.name + "' at " + format_point(p) + ": singular value " +
                      std::to_string(s) + " is near the threshold " + std::to_string(thr));
    if (smax > 0 && s > thr) ++m2;
  }
  m1 = m - m2;

  const int kf = k - 1;
  adjoint = g1_inv * (J.transpose() * g2);
  horizontal = pivoted_gram_schmidt(g1, columns(adjoint), m2, p);
  h_inv = outer_sum(horizontal, m, m, kf);
  p_horizontal = h_inv * g1;
  p_vertical = JetMatrix::identity(m, m, kf) - p_horizontal;
  vertical = pivoted_gram_schmidt(g1, columns(p_vertical), m1, p);

  std::vector<JetVector> images;
  for (const auto& e : horizontal) images.push_back(J * e);
  for (const auto& f_a : images) {
    JetVector u = f_a;
    for (const auto& r : range) u = u - inner(g2, u, r) * r;
    range.push_back((1.0 / sqrt(inner(g2, u, u))) * u);
  }
  p_range = n > 0 ? outer_sum(range, n, m, kf) * g2 : JetMatrix();
  p_normal = JetMatrix::identity(n, m, kf) - p_range;
  normal = pivoted_gram_schmidt(g2, columns(p_normal), n - m2, p);
}

double MapPoint::riemannian_residual() const {
  const Eigen::MatrixXd j = J.value();
  const Eigen::MatrixXd g = g2.value();
  const Eigen::MatrixXd e = value_columns(horizontal, m);
  const Eigen::MatrixXd gram = (j * e).transpose() * g * (j * e);
  if (gram.size() == 0) return 0.0;
  return (gram - Eigen::MatrixXd::Identity(m2, m2)).cwiseAbs().maxCoeff();
}

Eigen::VectorXd MapPoint::normal_component(const Eigen::VectorXd& w) const {
  return p_normal.value() * w;
}

double MapPoint::g2_norm(const Eigen::VectorXd& w) const {
  return std::sqrt(std::max(0.0, w.dot(g2.value() * w)));
}

void MapPoint::require_order(int needed, const char* what) const {
  if (order < needed)
    throw Error(ErrorKind::Configuration, std::string(what) + " needs jet order " +
                                              std::to_string(needed) + "; rerun with --order 4");
}

FieldAlongMap field_from_exprs(std::vector<Expr> components) {
  return [components = std::move(components)](const MapPoint& mp) {
    JetVector out;
    for (const Expr& e : components) out.push_back(eval_ast(e, mp.x));
    return out;
  };
}

Eigen::VectorXd differential(const SmoothMap& f, std::span<const double> p, const Eigen::VectorXd& x) {
  const JetVector lifted = lift_point(p, 1);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f.target->dim);
  for (int a = 0; a < f.target->dim; ++a) {
    const Jet c = eval_ast(f.components[a], lifted);
    for (int i = 0; i < f.source->dim; ++i) {
      MultiIndex d{};
      d[i] = 1;
      out[a] += c.partial(d) * x[i];
    }
  }
  return out;
}

FrameSplit frame_split(const MapPoint& mp) {
  FrameSplit s;
  s.kernel = value_columns(mp.vertical, mp.m);
  s.horizontal = value_columns(mp.horizontal, mp.m);
  s.range = value_columns(mp.range, mp.n);
  s.normal = value_columns(mp.normal, mp.n);
  s.singular_values = mp.singular_values;
  return s;
}

FrameSplit frame_split(const SmoothMap& f, std::span<const double> p, double tol_rank) {
  return frame_split(MapPoint(f, p, 2, tol_rank));
}

RiemannianCheck verify_riemannian(const SmoothMap& f, std::span<const std::vector<double>> points,
                                  double tol_residual, double tol_rank) {
  RiemannianCheck out;
  for (const auto& p : points) {
    const double r = MapPoint(f, p, 2, tol_rank).riemannian_residual();
    out.residuals.push_back(r);
    out.max_residual = std::max(out.max_residual, r);
  }
  out.pass = out.max_residual < tol_residual;
  return out;
}

Eigen::VectorXd adjoint(const MapPoint& mp, const Eigen::VectorXd& w, double tol_residual) {
  const double off = mp.g2_norm(mp.normal_component(w));
  if (off > tol_residual * std::max(1.0, mp.g2_norm(w)))
    throw Error(ErrorKind::Domain, "adjoint applied to a vector outside range F_* (normal part " +
                                       std::to_string(off) + ")");
  return mp.adjoint.value() * w;
}

Eigen::VectorXd second_fundamental_form(const MapPoint& mp, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& y) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mp.n);
  for (int c = 0; c < mp.n; ++c) out[c] = x.dot(mp.sff[c].value() * y);
  return out;
}

Eigen::VectorXd second_fundamental_form(const SmoothMap& f, std::span<const double> p,
                                        const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return second_fundamental_form(MapPoint(f, p, 2), x, y);
}

std::vector<JetVector> pullback_gradient(const MapPoint& mp, const JetVector& v) {
  if (min_order(v) < 1)
    throw Error(ErrorKind::Configuration,
                "field along the map cannot be differentiated at this jet order; rerun with --order 4");
  std::vector<JetVector> out;
  for (int i = 0; i < mp.m; ++i) {
    JetVector d = derivative(v, i);
    for (int c = 0; c < mp.n; ++c)
      for (int a = 0; a < mp.n; ++a)
        for (int b = 0; b < mp.n; ++b) d[c] += mp.gamma2[c](a, b) * mp.J(a, i) * v[b];
    out.push_back(std::move(d));
  }
  return out;
}

namespace {

void require_normal(const MapPoint& mp, const Eigen::VectorXd& v, double tol_residual) {
  const Eigen::VectorXd along = v - mp.normal_component(v);
  if (mp.g2_norm(along) > tol_residual * std::max(1.0, mp.g2_norm(v)))
    throw Error(ErrorKind::Domain, "shape operator needs a normal field; range part " +
                                       std::to_string(mp.g2_norm(along)));
}

}  // namespace

ShapeResult shape_operator(const MapPoint& mp, const JetVector& v, const Eigen::VectorXd& x,
                           double tol_residual) {
  require_normal(mp, value(v), tol_residual);
  const std::vector<JetVector> grad = pullback_gradient(mp, v);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(mp.n);
  for (int i = 0; i < mp.m; ++i) d += x[i] * value(grad[i]);
  return {-(mp.p_range.value() * d), mp.p_normal.value() * d};
}

Eigen::VectorXd shape_operator(const MapPoint& mp, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& x, double tol_residual) {
  // Any normal extension gives the same A_V; use the projected constant field.
  const JetVector ext = mp.p_normal * constant_vector(v, mp.m, mp.order - 1);
  return shape_operator(mp, ext, x, tol_residual).tangential;
}

JetVector tension_jets(const MapPoint& mp) {
  JetVector tau = zero_vector(mp.n, mp.m, mp.order - 2);
  for (int c = 0; c < mp.n; ++c)
    for (int i = 0; i < mp.m; ++i)
      for (int j = 0; j < mp.m; ++j) tau[c] += mp.g1_inv(i, j) * mp.sff[c](i, j);
  return tau;
}

JetVector mean_curvature_h2_jets(const MapPoint& mp) {
  JetVector h = zero_vector(mp.n, mp.m, mp.order - 2);
  if (mp.m2 == 0 || mp.m2 == mp.n) return h;
  for (int c = 0; c < mp.n; ++c)
    for (int i = 0; i < mp.m; ++i)
      for (int j = 0; j < mp.m; ++j) h[c] += mp.h_inv(i, j) * mp.sff[c](i, j);
  return (1.0 / mp.m2) * h;
}

JetVector kernel_mean_curvature_jets(const MapPoint& mp) {
  if (mp.m1 == 0) return zero_vector(mp.m, mp.m, mp.order - 2);
  return mean_curvature_jets(mp.g1, mp.gamma1, mp.vertical, mp.p_horizontal);
}

Eigen::VectorXd mean_curvature_H2(const MapPoint& mp, double tol_residual) {
  const double r = mp.riemannian_residual();
  if (!(r < tol_residual))
    throw Error(ErrorKind::Refused, "'" + mp.map->name + "' is not a Riemannian map at " +
                                        format_point(mp.p) + " (isometry residual " +
                                        std::to_string(r) + ")");
  return value(mean_curvature_h2_jets(mp));
}

PseudoUmbilical pseudo_umbilical_residual(const MapPoint& mp, double tol_residual) {
  PseudoUmbilical out;
  const Eigen::VectorXd h = value(mean_curvature_h2_jets(mp));
  const Eigen::MatrixXd g2 = mp.g2.value();
  out.lambda = h.dot(g2 * h);
  if (mp.m2 > 0) {
    const Eigen::MatrixXd e = value_columns(mp.horizontal, mp.m);
    const Eigen::MatrixXd fe = mp.J.value() * e;
    Eigen::MatrixXd op(mp.m2, mp.m2), bil(mp.m2, mp.m2);
    for (int a = 0; a < mp.m2; ++a) {
      const Eigen::VectorXd diff =
          shape_operator(mp, h, e.col(a), tol_residual) - out.lambda * fe.col(a);
      for (int b = 0; b < mp.m2; ++b) {
        op(b, a) = fe.col(b).dot(g2 * diff);
        bil(a, b) = second_fundamental_form(mp, e.col(a), e.col(b)).dot(g2 * h) -
                    (a == b ? out.lambda : 0.0);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> so(op), sb(bil);
    out.operator_residual = so.singularValues()[0];
    out.bilinear_residual = sb.singularValues()[0];
  }
  out.pass = out.operator_residual < tol_residual && out.bilinear_residual < tol_residual;
  return out;
}

DistributionField kernel_distribution(const SmoothMap& f, std::span<const double> reference,
                                      double tol_rank) {
  DistributionField d;
  d.owner = f.source.get();
  d.rank = MapPoint(f, reference, 2, tol_rank).m1;
  d.span = [f, tol_rank](std::span<const double> p, int order) {
    return MapPoint(f, p, std::min(order + 1, kMaxJetOrder), tol_rank).vertical;
  };
  return d;
}

Composition compose_submersion_immersion(const SmoothMap& f1, const SmoothMap& f2,
                                         std::span<const std::vector<double>> points,
                                         double tol_residual, double tol_rank) {
  if (f1.target != f2.source &&
      (f1.target->name != f2.source->name || f1.target->coords != f2.source->coords))
    throw Error(ErrorKind::Scene, "cannot compose '" + f2.name + "' after '" + f1.name +
                                      "': the target of the first is not the source of the second");
  Composition out;
  for (const auto& p : points) {
    const MapPoint a(f1, p, 2, tol_rank);
    if (a.m2 != a.n)
      throw Error(ErrorKind::Refused, "'" + f1.name + "' is not a submersion at " + format_point(p));
    out.submersion_residual = std::max(out.submersion_residual, a.riemannian_residual());
    const MapPoint b(f2, a.y0, 2, tol_rank);
    if (b.m1 != 0)
      throw Error(ErrorKind::Refused, "'" + f2.name + "' is not an immersion at " + format_point(a.y0));
    out.immersion_residual = std::max(out.immersion_residual, b.riemannian_residual());
  }
  if (!(out.submersion_residual < tol_residual))
    throw Error(ErrorKind::Refused, "'" + f1.name + "' is not a Riemannian submersion (residual " +
                                        std::to_string(out.submersion_residual) + ")");
  if (!(out.immersion_residual < tol_residual))
    throw Error(ErrorKind::Refused, "'" + f2.name + "' is not an isometric immersion (residual " +
                                        std::to_string(out.immersion_residual) + ")");
  out.map.name = f2.name + "_o_" + f1.name;
  out.map.source = f1.source;
  out.map.target = f2.target;
  for (const Expr& c : f2.components) out.map.components.push_back(substitute(c, f1.components));
  return out;
}

}  // namespace riemap
