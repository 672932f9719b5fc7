#pragma once

// Shared helpers for the map-level tests: gallery maps, sample points and
// random tangent data.

#include <Eigen/Dense>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "riemap/errors.hpp"
#include "riemap/gallery.hpp"
#include "riemap/report.hpp"
#include "riemap/rmap.hpp"

namespace riemap::testing {

struct Fixture {
  GalleryEntry entry;
  const SmoothMap& map() const { return *entry.scene.map(entry.subject); }
  std::vector<std::vector<double>> points(int n = 25, std::uint64_t seed = 42,
                                          bool corners = false) const {
    SampleSpec s;
    s.samples = n;
    s.seed = seed;
    s.corners = corners;
    return grid_sample(s, map().source->domain);
  }
};

inline Fixture fixture(const std::string& name) { return Fixture{builtin_scene(name)}; }

inline Scene scene(const std::string& text) { return parse_scene(text, "test"); }

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

/// Random combination of the horizontal frame.
inline Eigen::VectorXd random_horizontal(std::mt19937_64& rng, const MapPoint& mp) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(mp.m);
  std::normal_distribution<double> d;
  for (const auto& e : mp.horizontal) x += d(rng) * value(e);
  return x;
}

/// Random vector of the normal space at F(p).
inline Eigen::VectorXd random_normal(std::mt19937_64& rng, const MapPoint& mp) {
  return mp.p_normal.value() * random_vector(rng, mp.n);
}

/// Kind of the riemap error thrown by fn, if any.
template <class Fn>
std::optional<ErrorKind> thrown_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace riemap::testing
