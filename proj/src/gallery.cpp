#include "riemap/gallery.hpp"

#include <cmath>
#include <map>

#include "riemap/errors.hpp"

namespace riemap {

namespace detail {
const std::map<std::string, std::string>& gallery_texts();
}

namespace {

struct Registration {
  const char* name;
  const char* file;
  const char* subject;
  const char* description;
  std::vector<Expectation> expected;
  const char* thm42_verdict;
  bool pseudo_umbilical;
  bool biharmonic;
  const char* verdict_provenance;
};

const std::vector<Registration>& registry() {
  static const std::vector<Registration> r = {
      {"g1", "g1.scene", "id", "identity of the Euclidean plane",
       {{"tension", 0.0, 1e-12, "identity map: every second derivative vanishes"},
        {"bitension", 0.0, 1e-12, "identity map"},
        {"isometry", 0.0, 1e-12, "identity map"},
        {"lemma32", 0.0, 1e-10, "tension decomposition identity"}},
       "harmonic", true, true, "totally geodesic, hence harmonic"},
      {"g2", "g2.scene", "proj", "projection R^3 -> R^2",
       {{"tension", 0.0, 1e-12, "linear map between flat charts"},
        {"bitension", 0.0, 1e-12, "linear map between flat charts"},
        {"isometry", 0.0, 1e-12, "Riemannian submersion"},
        {"kernel_mean_curvature", 0.0, 1e-12, "fibers are straight lines"},
        {"m1", 1.0, 0.0, "kernel spanned by d/dz"},
        {"m2", 2.0, 0.0, "surjective differential"},
        {"lemma32", 0.0, 1e-10, "tension decomposition identity"}},
       "harmonic", true, true, "totally geodesic, hence harmonic"},
      {"g3", "g3.scene", "circle", "circle of radius 2 by arc length",
       {{"tension", 0.5, 1e-9, "curvature 1/r of a circle, r = 2"},
        {"bitension", 0.125, 1e-7, "1/r^3 for the arc-length circle, r = 2"},
        {"h2_norm", 0.5, 1e-9, "mean curvature 1/r"},
        {"isometry", 0.0, 1e-12, "unit-speed curve"},
        {"lemma32", 0.0, 1e-10, "tension decomposition identity"}},
       "not-biharmonic", true, false, "bitension 1/r^3 does not vanish"},
      {"g4", "g4.scene", "sphere", "unit sphere in R^3",
       {{"tension", 2.0, 1e-9, "tension of the unit sphere is -2 x"},
        {"bitension", 4.0, 1e-7, "coordinate functions are eigenfunctions with eigenvalue 2"},
        {"h2_norm", 1.0, 1e-9, "mean curvature 1/r, r = 1"},
        {"pseudo_umbilical", 0.0, 1e-9, "totally umbilical"},
        {"isometry", 0.0, 1e-12, "induced metric"},
        {"lemma32", 0.0, 1e-10, "tension decomposition identity"}},
       "not-biharmonic", true, false, "the bitension 4x of the unit sphere does not vanish"},
      {"g5", "g5.scene", "composite", "product S^2 x R onto the unit sphere in R^3",
       {{"tension", 2.0, 1e-9, "horizontal part equals the unit sphere"},
        {"bitension", 4.0, 1e-7, "same as the unit sphere, fibers are geodesics"},
        {"h2_norm", 1.0, 1e-9, "mean curvature of the unit sphere"},
        {"pseudo_umbilical", 0.0, 1e-9, "totally umbilical image"},
        {"kernel_mean_curvature", 0.0, 1e-12, "product fibers are geodesics"},
        {"isometry", 0.0, 1e-12, "submersion followed by isometric immersion"},
        {"m1", 1.0, 0.0, "kernel spanned by d/dw"},
        {"m2", 2.0, 0.0, "image is a surface"},
        {"lemma32", 0.0, 1e-10, "tension decomposition identity"}},
       "not-biharmonic", true, false, "flat target with nonzero mean curvature"},
      {"g6", "g6.scene", "composite", "product S^2(1/sqrt 2) x R onto a small sphere of S^3",
       {{"tension", 2.0, 1e-9, "m2 |H2| with |H2| = 1"},
        {"bitension", 0.0, 1e-7, "small hypersphere with |H2|^2 = c is biharmonic"},
        {"h2_squared", 1.0, 1e-7, "principal curvatures cot(pi/4) = 1"},
        {"pseudo_umbilical", 0.0, 1e-9, "totally umbilical image"},
        {"kernel_mean_curvature", 0.0, 1e-12, "product fibers are geodesics"},
        {"isometry", 0.0, 1e-10, "induced metric of a sphere of radius 1/sqrt 2"},
        {"lemma32", 0.0, 1e-10, "tension decomposition identity"}},
       "equality", true, true, "proper biharmonic, |H2|^2 = c = 1"},
  };
  return r;
}

}  // namespace

std::vector<std::string> gallery_names() {
  std::vector<std::string> out;
  for (const auto& r : registry()) out.push_back(r.name);
  return out;
}

std::vector<std::string> gallery_files() {
  std::vector<std::string> out;
  for (const auto& [file, text] : detail::gallery_texts()) out.push_back(file);
  return out;
}

std::string gallery_text(const std::string& file) {
  const auto& texts = detail::gallery_texts();
  auto it = texts.find(file);
  if (it == texts.end()) throw Error(ErrorKind::Scene, "no gallery file '" + file + "'");
  return it->second;
}

GalleryEntry builtin_scene(const std::string& name) {
  for (const auto& r : registry()) {
    if (name != r.name) continue;
    GalleryEntry e;
    e.name = r.name;
    e.description = r.description;
    e.file = r.file;
    e.subject = r.subject;
    e.scene = parse_scene(gallery_text(r.file), r.name);
    e.expected = r.expected;
    e.thm42_verdict = r.thm42_verdict;
    e.pseudo_umbilical = r.pseudo_umbilical;
    e.biharmonic = r.biharmonic;
    e.verdict_provenance = r.verdict_provenance;
    return e;
  }
  std::string known;
  for (const auto& n : gallery_names()) known += (known.empty() ? "" : ", ") + n;
  throw Error(ErrorKind::Scene, "unknown gallery scene '" + name + "' (known: " + known + ")");
}

double gallery_quantity(const MapPoint& mp, const std::string& q) {
  if (q == "tension") return mp.g2_norm(tension(mp));
  if (q == "bitension") return mp.g2_norm(bitension(mp));
  if (q == "h2_norm") return mp.g2_norm(value(mean_curvature_h2_jets(mp)));
  if (q == "h2_squared") {
    const double h = mp.g2_norm(value(mean_curvature_h2_jets(mp)));
    return h * h;
  }
  if (q == "isometry") return mp.riemannian_residual();
  if (q == "pseudo_umbilical") {
    const PseudoUmbilical pu = pseudo_umbilical_residual(mp);
    return std::max(pu.operator_residual, pu.bilinear_residual);
  }
  if (q == "kernel_mean_curvature") {
    const Eigen::VectorXd mu = value(kernel_mean_curvature_jets(mp));
    return std::sqrt(std::max(0.0, mu.dot(mp.g1.value() * mu)));
  }
  if (q == "lemma32") {
    const Eigen::VectorXd tau = tension(mp);
    const Eigen::VectorXd mu = value(kernel_mean_curvature_jets(mp));
    const Eigen::VectorXd h2 = value(mean_curvature_h2_jets(mp));
    return mp.g2_norm(tau + mp.m1 * (mp.J.value() * mu) - mp.m2 * h2);
  }
  if (q == "m1") return mp.m1;
  if (q == "m2") return mp.m2;
  throw Error(ErrorKind::Configuration, "unknown gallery quantity '" + q + "'");
}

GalleryCheck check_gallery_entry(const GalleryEntry& entry,
                                 std::span<const std::vector<double>> points,
                                 const Tolerances& tol) {
  const SmoothMap* f = entry.scene.map(entry.subject);
  if (!f) throw Error(ErrorKind::Scene, "gallery entry without map '" + entry.subject + "'");
  GalleryCheck out;
  for (const auto& e : entry.expected) out.results.push_back({e, e.value, 0.0, true});
  std::vector<ClassifyPoint> classified;
  for (const auto& p : points) {
    const MapPoint mp(*f, p, 4, tol.rank);
    for (auto& r : out.results) {
      const double v = gallery_quantity(mp, r.expectation.quantity);
      const double d = std::abs(v - r.expectation.value);
      if (d >= r.deviation) {
        r.deviation = d;
        r.worst = v;
      }
    }
    classified.push_back(classify_point(mp, tol));
  }
  out.pass = true;
  for (auto& r : out.results) {
    r.pass = r.deviation <= r.expectation.tol;
    out.pass = out.pass && r.pass;
  }
  out.thm42 = thm42_aggregate(std::move(classified), f->target->curvature, tol);
  out.verdict_pass = out.thm42.verdict == entry.thm42_verdict &&
                     out.thm42.pseudo_umbilical == entry.pseudo_umbilical &&
                     out.thm42.biharmonic == entry.biharmonic &&
                     !out.thm42.corollary42_contradiction;
  out.pass = out.pass && out.verdict_pass;
  return out;
}

}  // namespace riemap
