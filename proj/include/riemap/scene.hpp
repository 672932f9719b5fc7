#pragma once

// Chart manifolds, smooth maps and the scene files that declare them.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "riemap/expr.hpp"

namespace riemap {

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

/// A manifold covered by a single chart: coordinates, metric entries as
/// expressions in those coordinates, and the coordinate box it lives on.
struct ChartManifold {
  std::string name;
  int dim = 0;
  std::vector<std::string> coords;
  std::vector<std::vector<Expr>> metric;  // dim x dim, bound to coords
  std::vector<Interval> domain;
  /// Set when the manifold was declared as a space form; the metric is
  /// then the conformal model delta / (1 + c/4 |x|^2)^2.
  std::optional<double> curvature;

  bool contains(std::span<const double> p, double slack = 0.0) const;
};

using ManifoldPtr = std::shared_ptr<const ChartManifold>;

/// Builds the conformal model of the space form of curvature c.
ChartManifold make_spaceform(const std::string& name, int dim, double c,
                             std::vector<std::string> coords = {},
                             std::vector<Interval> domain = {});

struct SmoothMap {
  std::string name;
  ManifoldPtr source;
  ManifoldPtr target;
  std::vector<Expr> components;  // one per target coordinate, bound to source coords
};

struct AnalysisSettings {
  int jet_order = 4;
  int samples = 25;
  int grid = 0;  // > 0 selects a k-per-axis grid instead of random samples
  std::uint64_t seed = 42;
  double tol_rank = 1e-7;
  double tol_residual = 1e-8;
};

struct Scene {
  std::string name;
  std::string text;  // source text, hashed into report digests
  std::vector<ManifoldPtr> manifolds;
  std::vector<SmoothMap> maps;
  AnalysisSettings analysis;

  ManifoldPtr manifold(const std::string& name) const;
  const SmoothMap* map(const std::string& name) const;
};

/// Parses and validates scene text. `name` labels diagnostics and reports.
Scene parse_scene(std::string_view text, const std::string& name = "scene");
Scene load_scene(const std::filesystem::path& path);

/// Prints a scene back in the scene grammar.
std::string to_scene_text(const Scene& scene);

/// 64-bit FNV-1a digest of the scene text, as 16 hex digits.
std::string scene_digest(std::string_view text);

}  // namespace riemap
