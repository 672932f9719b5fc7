#pragma once

// Map-level geometry: differentials, the four-way splitting of the source
// and target tangent spaces, the second fundamental form of a map, shape
// operators, mean curvatures and the composition of Riemannian maps.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "riemap/geometry.hpp"
#include "riemap/scene.hpp"

namespace riemap {

/// Jet data of a map at one source point. All jets are in the source
/// coordinates. With K = order:
///   x, g1, g1_inv, F, g2        order K
///   gamma1, J, gamma2, frames   order K-1
///   sff                         order K-2
class MapPoint {
 public:
  MapPoint(const SmoothMap& f, std::span<const double> p, int order = 4, double tol_rank = 1e-7);

  const SmoothMap* map = nullptr;
  std::vector<double> p;
  std::vector<double> y0;  // F(p)
  int order = 0;
  int m = 0;  // source dimension
  int n = 0;  // target dimension

  JetVector x;
  JetMatrix g1, g1_inv;
  Christoffel gamma1;
  JetVector F;
  JetMatrix J;  // J(alpha, i) = d_i F^alpha
  JetMatrix g2;  // target metric along F
  Christoffel gamma2;  // target Christoffel symbols along F
  std::vector<double> r2;  // target curvature components at F(p)
  std::vector<JetMatrix> sff;  // sff[gamma](i, j)

  /// Singular values of the metric-weighted Jacobian, descending.
  Eigen::VectorXd singular_values;
  int m1 = 0;  // dim ker F_*
  int m2 = 0;  // rank F_*
  std::vector<JetVector> vertical;    // g1-orthonormal basis of ker F_*
  std::vector<JetVector> horizontal;  // g1-orthonormal basis of (ker F_*)^perp
  std::vector<JetVector> range;       // g2-orthonormal basis of range F_*
  std::vector<JetVector> normal;      // g2-orthonormal basis of (range F_*)^perp
  JetMatrix p_horizontal, p_vertical;  // m x m projectors
  JetMatrix p_range, p_normal;         // n x n projectors
  JetMatrix h_inv;    // sum_a e_a e_a^T, the horizontal part of g1^{-1}
  JetMatrix adjoint;  // g1^{-1} J^T g2, m x n

  /// Largest m2-block residual |g2(F_* e_a, F_* e_b) - delta_ab|.
  double riemannian_residual() const;
  Eigen::VectorXd normal_component(const Eigen::VectorXd& w) const;
  double g2_norm(const Eigen::VectorXd& w) const;
  /// Throws a configuration error when order < needed.
  void require_order(int needed, const char* what) const;
};

/// A vector field along F, produced as jets in the source coordinates.
using FieldAlongMap = std::function<JetVector(const MapPoint&)>;

/// Field along F given by component expressions in the source coordinates.
FieldAlongMap field_from_exprs(std::vector<Expr> components);

struct FrameSplit {
  Eigen::MatrixXd kernel;      // m x m1
  Eigen::MatrixXd horizontal;  // m x m2
  Eigen::MatrixXd range;       // n x m2
  Eigen::MatrixXd normal;      // n x (n - m2)
  Eigen::VectorXd singular_values;
};

Eigen::VectorXd differential(const SmoothMap& f, std::span<const double> p, const Eigen::VectorXd& x);
FrameSplit frame_split(const MapPoint& mp);
FrameSplit frame_split(const SmoothMap& f, std::span<const double> p, double tol_rank = 1e-7);

struct RiemannianCheck {
  double max_residual = 0.0;
  std::vector<double> residuals;  // per point
  bool pass = false;
};

RiemannianCheck verify_riemannian(const SmoothMap& f, std::span<const std::vector<double>> points,
                                  double tol_residual = 1e-8, double tol_rank = 1e-7);

/// *F_* W for W in range F_*; throws a domain error when W has a normal
/// component above tol_residual.
Eigen::VectorXd adjoint(const MapPoint& mp, const Eigen::VectorXd& w, double tol_residual = 1e-8);

Eigen::VectorXd second_fundamental_form(const MapPoint& mp, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& y);
Eigen::VectorXd second_fundamental_form(const SmoothMap& f, std::span<const double> p,
                                        const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// nabla^F_i V for every source direction i; each entry has one order less
/// than V.
std::vector<JetVector> pullback_gradient(const MapPoint& mp, const JetVector& v);

struct ShapeResult {
  Eigen::VectorXd tangential;  // A_V F_* X
  Eigen::VectorXd normal;      // nabla^{F perp}_X V
};

/// Splits nabla^F_X V into -A_V F_* X (range) and nabla^{F perp}_X V. V must
/// be normal at p.
ShapeResult shape_operator(const MapPoint& mp, const JetVector& v, const Eigen::VectorXd& x,
                           double tol_residual = 1e-8);
/// A_V F_* X for a normal vector V at F(p); depends only on the value of V.
Eigen::VectorXd shape_operator(const MapPoint& mp, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& x, double tol_residual = 1e-8);

/// Jet fields along F (order K-2). H2 and mu are zero when the normal
/// bundle, respectively the kernel, is trivial.
JetVector tension_jets(const MapPoint& mp);
JetVector mean_curvature_h2_jets(const MapPoint& mp);
JetVector kernel_mean_curvature_jets(const MapPoint& mp);

/// H2 at p; refuses maps that are not Riemannian at p.
Eigen::VectorXd mean_curvature_H2(const MapPoint& mp, double tol_residual = 1e-8);

struct PseudoUmbilical {
  double lambda = 0.0;             // g2(H2, H2)
  double operator_residual = 0.0;  // |A_{H2} - lambda I| on range F_*
  double bilinear_residual = 0.0;  // |g2(sff(X, Y), H2) - lambda g1(X, Y)|
  bool pass = false;
};

PseudoUmbilical pseudo_umbilical_residual(const MapPoint& mp, double tol_residual = 1e-8);

/// Kernel distribution of a map, for the distribution calculus. The rank is
/// fixed at `reference`; other points with a different rank are rejected.
DistributionField kernel_distribution(const SmoothMap& f, std::span<const double> reference,
                                      double tol_rank = 1e-7);

struct Composition {
  SmoothMap map;
  double submersion_residual = 0.0;  // F1 as a Riemannian submersion
  double immersion_residual = 0.0;   // F2 as an isometric immersion
};

/// F2 o F1 by substitution of component expressions. F1 must be a Riemannian
/// submersion and F2 an isometric immersion at the sampled points.
Composition compose_submersion_immersion(const SmoothMap& f1, const SmoothMap& f2,
                                         std::span<const std::vector<double>> points,
                                         double tol_residual = 1e-8, double tol_rank = 1e-7);

}  // namespace riemap
