#include "riemap/biharmonic.hpp"

#include <cmath>
#include <limits>

#include "riemap/errors.hpp"

namespace riemap {

namespace {

constexpr double kNoCheck = std::numeric_limits<double>::infinity();

using Hessian = std::vector<std::vector<Eigen::VectorXd>>;

/// Second covariant derivative (nabla^2 sigma)(d_i, d_j) of a field along F.
Hessian pullback_hessian(const MapPoint& mp, const JetVector& sigma) {
  const std::vector<JetVector> d = pullback_gradient(mp, sigma);
  Hessian h(mp.m, std::vector<Eigen::VectorXd>(mp.m));
  for (int j = 0; j < mp.m; ++j) {
    const std::vector<JetVector> dd = pullback_gradient(mp, d[j]);
    for (int i = 0; i < mp.m; ++i) {
      Eigen::VectorXd v = value(dd[i]);
      for (int k = 0; k < mp.m; ++k) v -= mp.gamma1[k](i, j).value() * value(d[k]);
      h[i][j] = std::move(v);
    }
  }
  return h;
}

Eigen::VectorXd trace(const Hessian& h, const Eigen::MatrixXd& m, int dim) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = 0; j < h.size(); ++j) out += m(i, j) * h[i][j];
  return out;
}

/// nabla_j V for a source vector field, one jet vector per direction j.
std::vector<JetVector> source_gradient(const MapPoint& mp, const JetVector& v) {
  std::vector<JetVector> out;
  for (int j = 0; j < mp.m; ++j) {
    JetVector d = derivative(v, j);
    for (int k = 0; k < mp.m; ++k)
      for (int l = 0; l < mp.m; ++l) d[k] += mp.gamma1[k](j, l) * v[l];
    out.push_back(std::move(d));
  }
  return out;
}

/// tr_M of (nabla_i T)_j for a source-vector-valued 1-form T_j.
Eigen::VectorXd source_divergence(const MapPoint& mp, const std::vector<JetVector>& t,
                                  const Eigen::MatrixXd& m) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mp.m);
  for (int i = 0; i < mp.m; ++i)
    for (int j = 0; j < mp.m; ++j) {
      if (m(i, j) == 0.0) continue;
      Eigen::VectorXd v(mp.m);
      for (int k = 0; k < mp.m; ++k) {
        MultiIndex d{};
        d[i] = 1;
        double s = t[j][k].partial(d);
        for (int l = 0; l < mp.m; ++l)
          s += mp.gamma1[k](i, l).value() * t[j][l].value() -
               mp.gamma1[l](i, j).value() * t[l][k].value();
        v[k] = s;
      }
      out += m(i, j) * v;
    }
  return out;
}

Eigen::VectorXd sff_value(const MapPoint& mp, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return second_fundamental_form(mp, x, y);
}

Eigen::VectorXd curvature_direct(const MapPoint& mp, const Eigen::VectorXd& tau,
                                 CurvatureModel model) {
  const Eigen::MatrixXd j = mp.J.value();
  const Eigen::MatrixXd gi = mp.g1_inv.value();
  const Eigen::MatrixXd g2 = mp.g2.value();
  std::optional<double> c = mp.map->target->curvature;
  if (model == CurvatureModel::SpaceForm && !c)
    throw Error(ErrorKind::Refused,
                "target '" + mp.map->target->name + "' is not declared as a space form");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mp.n);
  for (int a = 0; a < mp.m; ++a)
    for (int b = 0; b < mp.m; ++b) {
      if (gi(a, b) == 0.0) continue;
      const Eigen::VectorXd x = j.col(a), z = j.col(b);
      out += gi(a, b) * (model == CurvatureModel::Chart ? apply_riemann(mp.r2, x, tau, z)
                                                        : spaceform_curvature(*c, g2, x, tau, z));
    }
  return out;
}

double g1_norm(const MapPoint& mp, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(mp.g1.value() * v)));
}

}  // namespace

Eigen::VectorXd tension(const MapPoint& mp) { return value(tension_jets(mp)); }

Eigen::VectorXd tension(const SmoothMap& f, std::span<const double> p) {
  return tension(MapPoint(f, p, 2));
}

Eigen::VectorXd traced_laplacian(const MapPoint& mp, const JetVector& sigma,
                                 const Eigen::MatrixXd& m) {
  if (min_order(sigma) < 2)
    throw Error(ErrorKind::Configuration,
                "the Laplacian along the map needs fields of jet order >= 2; rerun with --order 4");
  return -trace(pullback_hessian(mp, sigma), m, mp.n);
}

Eigen::VectorXd rough_laplacian_along_map(const MapPoint& mp, const JetVector& sigma) {
  return traced_laplacian(mp, sigma, mp.g1_inv.value());
}

Eigen::VectorXd rough_laplacian_along_map(const MapPoint& mp, const FieldAlongMap& sigma) {
  return rough_laplacian_along_map(mp, sigma(mp));
}

Eigen::VectorXd bitension(const MapPoint& mp, CurvatureModel model) {
  mp.require_order(4, "the bitension field");
  const JetVector tau = tension_jets(mp);
  return -rough_laplacian_along_map(mp, tau) - curvature_direct(mp, value(tau), model);
}

Eigen::VectorXd bitension(const SmoothMap& f, std::span<const double> p) {
  return bitension(MapPoint(f, p, 4));
}

CurvatureTrace curvature_trace_term(const MapPoint& mp, const Eigen::VectorXd& tau, double c) {
  if (!mp.map->target->curvature)
    throw Error(ErrorKind::Refused,
                "target '" + mp.map->target->name + "' is not declared as a space form");
  CurvatureTrace out;
  const Eigen::MatrixXd j = mp.J.value();
  const Eigen::MatrixXd gi = mp.g1_inv.value();
  const Eigen::MatrixXd g2 = mp.g2.value();
  out.direct = Eigen::VectorXd::Zero(mp.n);
  for (int a = 0; a < mp.m; ++a)
    for (int b = 0; b < mp.m; ++b)
      out.direct += gi(a, b) * spaceform_curvature(c, g2, j.col(a), tau, j.col(b));
  const Eigen::VectorXd mu = value(kernel_mean_curvature_jets(mp));
  const Eigen::VectorXd h2 = value(mean_curvature_h2_jets(mp));
  out.closed_form = mp.m1 * c * (mp.m2 - 1) * (j * mu) - mp.m2 * mp.m2 * c * h2;
  out.difference = mp.g2_norm(out.direct - out.closed_form);
  return out;
}

Eigen::VectorXd normal_laplacian(const MapPoint& mp, const JetVector& v, double tol_residual) {
  const Eigen::VectorXd v0 = value(v);
  const Eigen::VectorXd along = v0 - mp.normal_component(v0);
  if (mp.g2_norm(along) > tol_residual * std::max(1.0, mp.g2_norm(v0)))
    throw Error(ErrorKind::Domain, "normal Laplacian needs a normal field");
  if (min_order(v) < 2)
    throw Error(ErrorKind::Configuration,
                "the normal Laplacian needs fields of jet order >= 2; rerun with --order 4");
  const Eigen::MatrixXd pn = mp.p_normal.value();
  const Eigen::MatrixXd h = mp.h_inv.value();
  const std::vector<JetVector> grad = pullback_gradient(mp, v);
  std::vector<JetVector> dperp;
  for (const auto& g : grad) dperp.push_back(mp.p_normal * g);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mp.n);
  for (int j = 0; j < mp.m; ++j) {
    const std::vector<JetVector> dd = pullback_gradient(mp, dperp[j]);
    for (int i = 0; i < mp.m; ++i) {
      if (h(i, j) == 0.0) continue;
      Eigen::VectorXd t = pn * value(dd[i]);
      for (int k = 0; k < mp.m; ++k) t -= mp.gamma1[k](i, j).value() * value(dperp[k]);
      out -= h(i, j) * t;
    }
  }
  return out;
}

BitensionBreakdown bitension_breakdown(const MapPoint& mp, double tol_residual) {
  (void)tol_residual;
  mp.require_order(4, "the bitension breakdown");
  BitensionBreakdown out;
  out.m1 = mp.m1;
  out.m2 = mp.m2;
  const Eigen::MatrixXd j0 = mp.J.value();
  const Eigen::MatrixXd gi = mp.g1_inv.value();
  const Eigen::MatrixXd hm = mp.h_inv.value();
  const Eigen::MatrixXd pr = mp.p_range.value();
  const Eigen::MatrixXd pn = mp.p_normal.value();

  const JetVector tau_j = tension_jets(mp);
  out.tau = value(tau_j);
  const Hessian hess = pullback_hessian(mp, tau_j);
  out.curvature_term = curvature_direct(mp, out.tau, CurvatureModel::Chart);
  const Eigen::VectorXd lap_full = -trace(hess, gi, mp.n);
  const Eigen::VectorXd lap_h = -trace(hess, hm, mp.n);
  out.vertical_trace_remainder = -trace(hess, gi - hm, mp.n);
  out.tau2_full = -lap_full - out.curvature_term;
  out.tau2_horizontal = -lap_h - out.curvature_term;
  out.tau2_range = pr * out.tau2_full;
  out.tau2_normal = pn * out.tau2_full;

  const JetVector mu_j = kernel_mean_curvature_jets(mp);
  const JetVector h2_j = mean_curvature_h2_jets(mp);
  out.mu = value(mu_j);
  out.h2 = value(h2_j);
  out.lemma32_residual = mp.g2_norm(out.tau + mp.m1 * (j0 * out.mu) - mp.m2 * out.h2);

  out.c = mp.map->target->curvature;
  if (!out.c) return out;
  const double c = *out.c;
  const int m1 = mp.m1, m2 = mp.m2;
  Thm41Terms& t = out.terms;
  Eigen::MatrixXd e(mp.m, m2);
  for (int a = 0; a < m2; ++a) e.col(a) = value(mp.horizontal[a]);

  // Range terms.
  t.t1 = Eigen::VectorXd::Zero(mp.n);
  for (int a = 0; a < m2; ++a)
    t.t1 += shape_operator(mp, Eigen::VectorXd(sff_value(mp, e.col(a), out.mu)), e.col(a), kNoCheck);

  const std::vector<JetVector> dmu = source_gradient(mp, mu_j);
  t.t2 = j0 * source_divergence(mp, dmu, hm);

  const std::vector<JetVector> grad_h = pullback_gradient(mp, h2_j);
  std::vector<JetVector> s;  // S(d_j) = *F_*(A_{H2} F_* d_j)
  for (int jj = 0; jj < mp.m; ++jj) s.push_back(mp.adjoint * (-1.0 * (mp.p_range * grad_h[jj])));
  t.t3 = j0 * source_divergence(mp, s, hm);

  t.t4 = Eigen::VectorXd::Zero(mp.n);
  for (int a = 0; a < m2; ++a) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(mp.n);
    for (int i = 0; i < mp.m; ++i) d += e(i, a) * value(grad_h[i]);
    t.t4 += shape_operator(mp, Eigen::VectorXd(pn * d), e.col(a), kNoCheck);
  }
  t.t5 = m1 * c * (m2 - 1) * (j0 * out.mu);

  // Normal terms.
  std::vector<JetVector> w;  // W_j = sff(d_j, mu)
  for (int jj = 0; jj < mp.m; ++jj) {
    JetVector wj = zero_vector(mp.n, mp.m, mp.order - 2);
    for (int g = 0; g < mp.n; ++g)
      for (int l = 0; l < mp.m; ++l) wj[g] += mp.sff[g](jj, l) * mu_j[l];
    w.push_back(std::move(wj));
  }
  t.n1 = Eigen::VectorXd::Zero(mp.n);
  t.n2 = Eigen::VectorXd::Zero(mp.n);
  t.n3 = Eigen::VectorXd::Zero(mp.n);
  for (int jj = 0; jj < mp.m; ++jj) {
    const std::vector<JetVector> gw = pullback_gradient(mp, w[jj]);
    for (int i = 0; i < mp.m; ++i) {
      if (hm(i, jj) == 0.0) continue;
      Eigen::VectorXd d = value(gw[i]);
      for (int k = 0; k < mp.m; ++k) d -= mp.gamma1[k](i, jj).value() * value(w[k]);
      t.n1 += hm(i, jj) * (pn * d);
      const Eigen::VectorXd ei = Eigen::VectorXd::Unit(mp.m, i);
      t.n2 += hm(i, jj) * sff_value(mp, ei, value(dmu[jj]));
      t.n3 += hm(i, jj) * sff_value(mp, ei, value(s[jj]));
    }
  }
  t.n4 = normal_laplacian(mp, h2_j, kNoCheck);
  t.n5 = m2 * m2 * c * out.h2;

  out.eq42_lhs = m1 * t.t1 - m1 * t.t2 - m2 * t.t3 - m2 * t.t4 - t.t5;
  out.eq43_lhs = m1 * t.n1 + m1 * t.n2 + m2 * t.n3 - m2 * t.n4 - t.n5;

  const CurvatureTrace ct = curvature_trace_term(mp, out.tau, c);
  out.curvature_identity_residual = ct.difference;
  const Eigen::VectorXd tau2_sf =
      -lap_full - curvature_direct(mp, out.tau, CurvatureModel::SpaceForm);
  out.spaceform_crosscheck = mp.g2_norm(out.tau2_full - tau2_sf);
  out.discrepancy_range = mp.g2_norm(out.eq42_lhs - out.tau2_range);
  out.discrepancy_normal = mp.g2_norm(out.eq43_lhs + out.tau2_normal);
  return out;
}

Thm41Point thm41_point(const MapPoint& mp, const Tolerances& tol) {
  if (!mp.map->target->curvature)
    throw Error(ErrorKind::Refused, "the biharmonic equations need a space-form target; '" +
                                        mp.map->target->name + "' has no declared curvature");
  const double iso = mp.riemannian_residual();
  if (!(iso < tol.residual))
    throw Error(ErrorKind::Refused, "'" + mp.map->name + "' is not a Riemannian map at " +
                                        format_point(mp.p) + " (isometry residual " +
                                        std::to_string(iso) + ")");
  const BitensionBreakdown b = bitension_breakdown(mp, tol.residual);
  Thm41Point out;
  out.eq42 = mp.g2_norm(b.eq42_lhs);
  out.eq43 = mp.g2_norm(b.eq43_lhs);
  out.tau2_range = mp.g2_norm(b.tau2_range);
  out.tau2_normal = mp.g2_norm(b.tau2_normal);
  out.discrepancy_range = b.discrepancy_range;
  out.discrepancy_normal = b.discrepancy_normal;
  out.vertical_remainder = mp.g2_norm(b.vertical_trace_remainder);
  out.curvature_identity = b.curvature_identity_residual;
  out.h2_norm = mp.g2_norm(b.h2);
  return out;
}

Thm41Report thm41_aggregate(std::vector<Thm41Point> points, const Tolerances& tol) {
  Thm41Report r;
  r.points = std::move(points);
  for (const auto& p : r.points) {
    r.max.eq42 = std::max(r.max.eq42, p.eq42);
    r.max.eq43 = std::max(r.max.eq43, p.eq43);
    r.max.tau2_range = std::max(r.max.tau2_range, p.tau2_range);
    r.max.tau2_normal = std::max(r.max.tau2_normal, p.tau2_normal);
    r.max.discrepancy_range = std::max(r.max.discrepancy_range, p.discrepancy_range);
    r.max.discrepancy_normal = std::max(r.max.discrepancy_normal, p.discrepancy_normal);
    r.max.vertical_remainder = std::max(r.max.vertical_remainder, p.vertical_remainder);
    r.max.curvature_identity = std::max(r.max.curvature_identity, p.curvature_identity);
    r.max.h2_norm = std::max(r.max.h2_norm, p.h2_norm);
  }
  r.biharmonic_by_equations = r.max.eq42 < tol.biharmonic && r.max.eq43 < tol.biharmonic;
  r.biharmonic_by_bitension =
      r.max.tau2_range < tol.biharmonic && r.max.tau2_normal < tol.biharmonic;
  r.agree = r.biharmonic_by_equations == r.biharmonic_by_bitension;
  r.pass = r.agree;
  return r;
}

Thm41Report thm41_verify(const SmoothMap& f, std::span<const std::vector<double>> points,
                         const Tolerances& tol) {
  std::vector<Thm41Point> out;
  for (const auto& p : points) out.push_back(thm41_point(MapPoint(f, p, 4, tol.rank), tol));
  return thm41_aggregate(std::move(out), tol);
}

ClassifyPoint classify_point(const MapPoint& mp, const Tolerances& tol) {
  mp.require_order(4, "classification");
  ClassifyPoint out;
  out.isometry = mp.riemannian_residual();
  out.riemannian = out.isometry < tol.residual;
  const PseudoUmbilical pu = pseudo_umbilical_residual(mp, tol.residual);
  out.pu_operator = pu.operator_residual;
  out.pu_bilinear = pu.bilinear_residual;
  out.h2_squared = pu.lambda;
  out.mu_norm = g1_norm(mp, value(kernel_mean_curvature_jets(mp)));
  const JetVector h2 = mean_curvature_h2_jets(mp);
  const std::vector<JetVector> grad = pullback_gradient(mp, h2);
  const Eigen::MatrixXd pn = mp.p_normal.value();
  for (const auto& ea : mp.horizontal) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(mp.n);
    for (int i = 0; i < mp.m; ++i) d += ea[i].value() * value(grad[i]);
    out.nabla_perp_h2 = std::max(out.nabla_perp_h2, mp.g2_norm(pn * d));
  }
  out.tau_norm = mp.g2_norm(tension(mp));
  out.tau2_norm = mp.g2_norm(bitension(mp));
  return out;
}

Thm42Report thm42_aggregate(std::vector<ClassifyPoint> points, std::optional<double> c,
                            const Tolerances& tol) {
  Thm42Report r;
  r.points = std::move(points);
  r.c = c;
  double pu = 0.0, mu = 0.0, par = 0.0, tau = 0.0, tau2 = 0.0;
  r.riemannian = true;
  for (const auto& p : r.points) {
    r.riemannian = r.riemannian && p.riemannian;
    pu = std::max({pu, p.pu_operator, p.pu_bilinear});
    mu = std::max(mu, p.mu_norm);
    par = std::max(par, p.nabla_perp_h2);
    tau = std::max(tau, p.tau_norm);
    tau2 = std::max(tau2, p.tau2_norm);
    r.h2_squared = std::max(r.h2_squared, p.h2_squared);
    if (c) {
      r.equality_gap = std::max(r.equality_gap, std::abs(p.h2_squared - *c));
      r.eq46_residual =
          std::max(r.eq46_residual, std::abs(p.h2_squared - *c) * std::sqrt(p.h2_squared));
    }
  }
  r.pseudo_umbilical = pu < tol.residual;
  r.minimal_fibers = mu < tol.residual;
  r.parallel_h2 = par < tol.residual;
  r.harmonic = tau < tol.residual;
  r.biharmonic = tau2 < tol.biharmonic;

  const bool hypotheses = r.riemannian && r.pseudo_umbilical && r.minimal_fibers && r.parallel_h2;
  if (!c) {
    r.verdict = "hypotheses-not-met";
    r.reason = "target is not a space form";
  } else if (!hypotheses) {
    r.verdict = "hypotheses-not-met";
    if (!r.riemannian)
      r.reason = "not a Riemannian map";
    else if (!r.pseudo_umbilical)
      r.reason = "not pseudo-umbilical";
    else if (!r.minimal_fibers)
      r.reason = "fibers are not minimal";
    else
      r.reason = "H2 is not parallel";
  } else if (r.harmonic) {
    r.verdict = "harmonic";
  } else if (r.biharmonic) {
    r.verdict = r.equality_gap < tol.biharmonic ? "equality" : "inconsistent-with-theorem";
    r.corollary42_contradiction = *c <= 0.0;
  } else {
    r.verdict = "not-biharmonic";
    r.reason = "the theorem assumes a biharmonic map";
  }
  return r;
}

Thm42Report thm42_classify(const SmoothMap& f, std::span<const std::vector<double>> points,
                           const Tolerances& tol) {
  std::vector<ClassifyPoint> out;
  for (const auto& p : points) out.push_back(classify_point(MapPoint(f, p, 4, tol.rank), tol));
  return thm42_aggregate(std::move(out), f.target->curvature, tol);
}

}  // namespace riemap
