#pragma once

// Intrinsic geometry of a chart manifold: metric, Levi-Civita connection,
// curvature, and second fundamental forms of distributions.
//
// Quantities that must be differentiated again are returned as jets in the
// manifold's own coordinates; quantities needed only at the base point are
// returned as Eigen vectors.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "riemap/jet.hpp"
#include "riemap/scene.hpp"

namespace riemap {

using JetVector = std::vector<Jet>;

/// Dense row-major matrix of jets.
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int rows, int cols, const Jet& fill) : rows_(rows), cols_(cols), a_(rows * cols, fill) {}
  static JetMatrix zeros(int rows, int cols, int num_vars, int order);
  static JetMatrix identity(int n, int num_vars, int order);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  Jet& operator()(int i, int j) { return a_[i * cols_ + j]; }
  const Jet& operator()(int i, int j) const { return a_[i * cols_ + j]; }

  JetVector column(int j) const;
  JetMatrix transpose() const;
  Eigen::MatrixXd value() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Jet> a_;
};

/// Gamma[k](i, j) = Christoffel symbol of the second kind.
using Christoffel = std::vector<JetMatrix>;

// Jet-level linear algebra.
JetMatrix operator*(const JetMatrix& a, const JetMatrix& b);
JetMatrix operator+(const JetMatrix& a, const JetMatrix& b);
JetMatrix operator-(const JetMatrix& a, const JetMatrix& b);
JetVector operator*(const JetMatrix& a, const JetVector& x);
JetVector operator+(const JetVector& a, const JetVector& b);
JetVector operator-(const JetVector& a, const JetVector& b);
JetVector operator*(const Jet& s, const JetVector& x);
JetVector operator*(double s, const JetVector& x);
/// x^T g y.
Jet inner(const JetMatrix& g, const JetVector& x, const JetVector& y);
/// Inverse by Gauss-Jordan elimination, pivoting on constant terms.
JetMatrix inverse(const JetMatrix& a);
JetVector zero_vector(int n, int num_vars, int order);
JetVector constant_vector(const Eigen::VectorXd& v, int num_vars, int order);
JetVector derivative(const JetVector& v, int var);
Eigen::VectorXd value(const JetVector& v);
JetVector truncated(const JetVector& v, int order);
/// Lowest order among the entries.
int min_order(const JetVector& v);

/// Coordinate functions of an m-dimensional chart lifted at p.
JetVector lift_point(std::span<const double> p, int order);

/// Metric entries evaluated with the coordinate functions replaced by
/// `coords` (jets in any set of variables).
JetMatrix metric_jets(const ChartManifold& m, std::span<const Jet> coords);

/// Metric at p as jets of the given order; throws a geometry error when the
/// constant part is not positive definite.
JetMatrix metric_at(const ChartManifold& m, std::span<const double> p, int order);

/// Checks that g (constant part) is symmetric positive definite.
void require_spd(const Eigen::MatrixXd& g, const ChartManifold& m, std::span<const double> p);

/// Christoffel symbols from metric jets in the chart's own variables. The
/// result has order g.order - 1.
Christoffel christoffel_from_metric(const JetMatrix& g, const JetMatrix& g_inv);

/// Christoffel symbols at p as jets of the given order (the metric is
/// expanded one order higher).
Christoffel christoffel(const ChartManifold& m, std::span<const double> p, int order);

/// Curvature components R^l_{kij}, flattened as ((l*n + k)*n + i)*n + j.
/// Requires Christoffel jets of order >= 1.
std::vector<double> riemann_components(const Christoffel& gamma);
std::vector<double> riemann_components(const ChartManifold& m, std::span<const double> p);

/// R(X, Y)Z from precomputed components.
Eigen::VectorXd apply_riemann(const std::vector<double>& r, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, const Eigen::VectorXd& z);

/// R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z at p.
Eigen::VectorXd riemann_curvature(const ChartManifold& m, std::span<const double> p,
                                  const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& z);

/// c {g(Y, Z) X - g(X, Z) Y}.
Eigen::VectorXd spaceform_curvature(double c, const Eigen::MatrixXd& g, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& y, const Eigen::VectorXd& z);

/// Distribution on a chart manifold given by a spanning set of vector
/// fields, expanded as jets around any requested point.
struct DistributionField {
  const ChartManifold* owner = nullptr;
  int rank = 0;
  std::function<std::vector<JetVector>(std::span<const double> p, int order)> span;
};

/// Distribution spanned by fixed coordinate vectors.
DistributionField constant_distribution(const ChartManifold& m,
                                        std::vector<Eigen::VectorXd> vectors);

/// g-orthogonal projector V G^{-1} V^T g onto the span of `vectors`.
JetMatrix span_projector(const JetMatrix& g, std::span<const JetVector> vectors);

/// Covariant derivative of the vector field y along the field x.
JetVector covariant_derivative(const Christoffel& gamma, const JetVector& x, const JetVector& y);

enum class SffKind { AUnsym, BSym, Integrability, BHorizontal };

/// Second-fundamental-form calculus from projector fields: `from` projects
/// onto the distribution, `to` onto its complement. E and F are arbitrary
/// vector fields as jets; the result is the value at the base point.
Eigen::VectorXd sff_from_projectors(const Christoffel& gamma, const JetMatrix& from,
                                    const JetMatrix& to, const JetVector& e, const JetVector& f,
                                    SffKind which);

/// Second-fundamental-form calculus of V at p for vectors E, F, evaluated on
/// constant-coefficient extensions projected by the smooth projector field.
Eigen::VectorXd distribution_sff(const ChartManifold& m, const DistributionField& v,
                                 std::span<const double> p, const Eigen::VectorXd& e,
                                 const Eigen::VectorXd& f, SffKind which,
                                 double tol_rank = 1e-7);

/// (1/q) sum_{r,s} (G^{-1})^{rs} P_to(nabla_{v_r} v_s) as jets. Works for any
/// spanning set of fields tangent to the distribution.
JetVector mean_curvature_jets(const JetMatrix& g, const Christoffel& gamma,
                              std::span<const JetVector> span, const JetMatrix& p_to);

struct MeanCurvature {
  Eigen::VectorXd mu;
  bool trivial = false;  // rank 0: mu is zero by convention
};

MeanCurvature distribution_mean_curvature(const ChartManifold& m, const DistributionField& d,
                                          std::span<const double> p, double tol_rank = 1e-7);

}  // namespace riemap
