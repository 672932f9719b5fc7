#pragma once

// Tension and bitension fields, the space-form decomposition of the
// bitension field into range and normal conditions, and the verifiers for
// the biharmonicity theorems.

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riemap/rmap.hpp"

namespace riemap {

struct Tolerances {
  double rank = 1e-7;        // relative singular-value threshold
  double residual = 1e-8;    // isometry, pseudo-umbilical, harmonic
  double identity = 1e-10;   // algebraic identities
  double biharmonic = 1e-7;  // order-4 quantities: bitension, theorem terms
};

Eigen::VectorXd tension(const MapPoint& mp);
Eigen::VectorXd tension(const SmoothMap& f, std::span<const double> p);

/// -tr_M(nabla^2 sigma) with M = g1^{-1}, the rough Laplacian on sections of
/// the pullback bundle. Other trace matrices restrict the trace, e.g. to the
/// horizontal directions.
Eigen::VectorXd rough_laplacian_along_map(const MapPoint& mp, const JetVector& sigma);
Eigen::VectorXd rough_laplacian_along_map(const MapPoint& mp, const FieldAlongMap& sigma);
Eigen::VectorXd traced_laplacian(const MapPoint& mp, const JetVector& sigma,
                                 const Eigen::MatrixXd& trace);

enum class CurvatureModel { Chart, SpaceForm };

/// tau2 = -Laplacian(tau) - tr R2(F_* ., tau) F_* . . The space-form model
/// needs a target declared with a curvature.
Eigen::VectorXd bitension(const MapPoint& mp, CurvatureModel model = CurvatureModel::Chart);
Eigen::VectorXd bitension(const SmoothMap& f, std::span<const double> p);

struct CurvatureTrace {
  Eigen::VectorXd direct;       // g1^{ij} R2(F_* d_i, tau) F_* d_j
  Eigen::VectorXd closed_form;  // m1 c (m2 - 1) F_* mu - m2^2 c H2
  double difference = 0.0;
};

/// Requires a space-form target (refused otherwise).
CurvatureTrace curvature_trace_term(const MapPoint& mp, const Eigen::VectorXd& tau, double c);

/// -h^{ij}(nabla-perp_i nabla-perp_j V - Gamma^k_ij nabla-perp_k V), traced over
/// horizontal directions. V must be normal at p.
Eigen::VectorXd normal_laplacian(const MapPoint& mp, const JetVector& v,
                                 double tol_residual = 1e-8);

/// The individual terms of the range (T) and normal (N) conditions.
struct Thm41Terms {
  Eigen::VectorXd t1;  // tr A_{sff(., mu)} F_* .
  Eigen::VectorXd t2;  // tr F_*(nabla nabla mu)
  Eigen::VectorXd t3;  // tr F_*(nabla *F_*(A_{H2} F_* .))
  Eigen::VectorXd t4;  // tr A_{nabla-perp H2} F_* .
  Eigen::VectorXd t5;  // m1 c (m2 - 1) F_* mu
  Eigen::VectorXd n1;  // tr nabla-perp sff(., mu)
  Eigen::VectorXd n2;  // tr sff(., nabla mu)
  Eigen::VectorXd n3;  // tr sff(., *F_*(A_{H2} F_* .))
  Eigen::VectorXd n4;  // normal Laplacian of H2
  Eigen::VectorXd n5;  // m2^2 c H2
};

struct BitensionBreakdown {
  int m1 = 0, m2 = 0;
  Eigen::VectorXd tau;
  Eigen::VectorXd tau2_full;
  Eigen::VectorXd tau2_range;
  Eigen::VectorXd tau2_normal;
  Eigen::VectorXd mu;  // kernel mean curvature (source vector)
  Eigen::VectorXd h2;
  /// tau2 contribution of the vertical directions of the trace:
  /// tau2_full = tau2_horizontal - vertical_trace_remainder.
  Eigen::VectorXd vertical_trace_remainder;
  Eigen::VectorXd tau2_horizontal;
  Eigen::VectorXd curvature_term;
  double lemma32_residual = 0.0;  // |tau + m1 F_* mu - m2 H2|

  // Available only for space-form targets.
  std::optional<double> c;
  Thm41Terms terms;
  Eigen::VectorXd eq42_lhs;
  Eigen::VectorXd eq43_lhs;
  double curvature_identity_residual = 0.0;  // direct trace vs closed form
  double spaceform_crosscheck = 0.0;         // |tau2(chart R) - tau2(space form R)|
  double discrepancy_range = 0.0;            // |eq42 - tau2_range|
  double discrepancy_normal = 0.0;           // |eq43 + tau2_normal|
};

/// Full per-point analysis. Needs jet order 4.
BitensionBreakdown bitension_breakdown(const MapPoint& mp, double tol_residual = 1e-8);

// Theorem verifiers. Per-point records are computed independently (and may
// run in parallel); the aggregators reduce them in point order.

struct Thm41Point {
  double eq42 = 0.0, eq43 = 0.0;
  double tau2_range = 0.0, tau2_normal = 0.0;
  double discrepancy_range = 0.0, discrepancy_normal = 0.0;
  double vertical_remainder = 0.0;
  double curvature_identity = 0.0;
  double h2_norm = 0.0;
};

struct Thm41Report {
  std::vector<Thm41Point> points;
  Thm41Point max;
  bool biharmonic_by_equations = false;
  bool biharmonic_by_bitension = false;
  bool agree = false;
  bool pass = false;  // both computations reach the same verdict
};

/// Refuses (error) when the target is not a space form or F is not a
/// Riemannian map at p.
Thm41Point thm41_point(const MapPoint& mp, const Tolerances& tol = {});
Thm41Report thm41_aggregate(std::vector<Thm41Point> points, const Tolerances& tol = {});
Thm41Report thm41_verify(const SmoothMap& f, std::span<const std::vector<double>> points,
                         const Tolerances& tol = {});

struct ClassifyPoint {
  bool riemannian = false;
  double isometry = 0.0;
  double pu_operator = 0.0;
  double pu_bilinear = 0.0;
  double mu_norm = 0.0;
  double nabla_perp_h2 = 0.0;
  double h2_squared = 0.0;
  double tau_norm = 0.0;
  double tau2_norm = 0.0;
};

struct Thm42Report {
  std::vector<ClassifyPoint> points;
  std::optional<double> c;
  bool riemannian = false;
  bool pseudo_umbilical = false;
  bool minimal_fibers = false;
  bool parallel_h2 = false;
  bool harmonic = false;
  bool biharmonic = false;
  double h2_squared = 0.0;      // largest over the samples
  double eq46_residual = 0.0;   // max |(|H2|^2 - c)| |H2|
  double equality_gap = 0.0;    // max ||H2|^2 - c|
  std::string verdict;  // harmonic | equality | inconsistent-with-theorem |
                        // hypotheses-not-met | not-biharmonic
  std::string reason;
  bool corollary42_contradiction = false;
};

ClassifyPoint classify_point(const MapPoint& mp, const Tolerances& tol = {});
Thm42Report thm42_aggregate(std::vector<ClassifyPoint> points, std::optional<double> c,
                            const Tolerances& tol = {});
Thm42Report thm42_classify(const SmoothMap& f, std::span<const std::vector<double>> points,
                           const Tolerances& tol = {});

}  // namespace riemap
