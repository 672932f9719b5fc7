#pragma once

// Built-in scenes with known geometry. The texts are the files under
// gallery/ in the source tree, embedded at build time.

#include <string>
#include <vector>

#include "riemap/biharmonic.hpp"
#include "riemap/scene.hpp"

namespace riemap {

/// A pointwise quantity expected at every sample, within `tol`.
struct Expectation {
  std::string quantity;  // see gallery_quantity()
  double value = 0.0;
  double tol = 0.0;
  std::string provenance;
};

struct GalleryEntry {
  std::string name;
  std::string description;
  std::string file;     // file name under gallery/
  std::string subject;  // the map the expectations refer to
  Scene scene;
  std::vector<Expectation> expected;
  std::string thm42_verdict;
  bool pseudo_umbilical = false;
  bool biharmonic = false;
  std::string verdict_provenance;
};

std::vector<std::string> gallery_names();
GalleryEntry builtin_scene(const std::string& name);
/// Embedded text of a gallery file (g1.scene ... g6.scene, stretched.scene).
std::string gallery_text(const std::string& file);
std::vector<std::string> gallery_files();

/// Quantities: tension, bitension, h2_norm, h2_squared, isometry,
/// pseudo_umbilical, kernel_mean_curvature, lemma32, m1, m2.
double gallery_quantity(const MapPoint& mp, const std::string& quantity);

struct ExpectationResult {
  Expectation expectation;
  double worst = 0.0;  // value farthest from the expectation
  double deviation = 0.0;
  bool pass = false;
};

struct GalleryCheck {
  std::vector<ExpectationResult> results;
  Thm42Report thm42;
  bool verdict_pass = false;
  bool pass = false;
};

GalleryCheck check_gallery_entry(const GalleryEntry& entry,
                                 std::span<const std::vector<double>> points,
                                 const Tolerances& tol = {});

}  // namespace riemap
