#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "riemap/cli.hpp"
#include "riemap/errors.hpp"
#include "riemap/report.hpp"
#include "support/fixtures.hpp"

using namespace riemap;
using namespace riemap::testing;
namespace fs = std::filesystem;

namespace {

const std::string kGallery = RIEMAP_GALLERY_DIR;

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() /
                     ("riemap-test-" + std::to_string(::getpid()) + "-" + tag);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Interval> box(std::initializer_list<std::pair<double, double>> ivs) {
  std::vector<Interval> d;
  for (auto [lo, hi] : ivs) d.push_back(Interval{lo, hi});
  return d;
}

}  // namespace

TEST_CASE("grid sampling uses cell centres, first axis slowest") {
  const auto d = box({{0, 1}, {-3, 3}});
  SampleSpec s;
  s.grid = 3;
  const auto pts = grid_sample(s, d);
  REQUIRE(pts.size() == 9);
  CHECK(pts[0][0] == doctest::Approx(1.0 / 6));
  CHECK(pts[0][1] == doctest::Approx(-2.0));
  CHECK(pts[1][0] == doctest::Approx(1.0 / 6));
  CHECK(pts[1][1] == doctest::Approx(0.0));
  CHECK(pts[8][0] == doctest::Approx(5.0 / 6));
}

TEST_CASE("random sampling is reproducible and keeps its margin") {
  const auto d = box({{0, 1}, {10, 12}, {-1, 1}});
  SampleSpec s;
  s.samples = 25;
  s.seed = 42;
  const auto a = grid_sample(s, d), b = grid_sample(s, d);
  CHECK(a == b);
  CHECK(a.size() == 25 + 8);
  for (const auto& p : a)
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double w = d[i].hi - d[i].lo;
      CHECK(p[i] >= d[i].lo + 1e-3 * w);
      CHECK(p[i] <= d[i].hi - 1e-3 * w);
    }
  s.seed = 43;
  CHECK(grid_sample(s, d) != a);
  s.corners = false;
  CHECK(grid_sample(s, d).size() == 25);
}

TEST_CASE("sampling rejects empty boxes") {
  SampleSpec s;
  const auto bad = box({{0, 1}, {2, 2}});
  CHECK(thrown_kind([&] { grid_sample(s, bad); }) == ErrorKind::Domain);
}

TEST_CASE("report emission") {
  const fs::path dir = scratch("emit");
  const Run r = run({"gallery", "run", "g1", "--out", dir.string(), "--format", "json,csv"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "gallery-g1.json"));
  CHECK(j["summary"]["max_tension"].get<double>() == 0.0);
  CHECK(j["pass"].get<bool>());
  CHECK(j["artifact"]["version"] == kArtifactVersion);

  // One CSV line per point and residual, plus the header.
  std::size_t rows = 0;
  for (const auto& s : j["sections"])
    for (const auto& p : s["points"]) rows += p["residuals"].size();
  const std::string csv = slurp(dir / "gallery-g1.csv");
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == rows + 1);
  CHECK(csv.rfind("scene,map,point,coords,residual,value,tolerance,verdict\n", 0) == 0);

  const std::string first = slurp(dir / "gallery-g1.json");
  CHECK(run({"gallery", "run", "g1", "--out", dir.string(), "--format", "json"}).code == 0);
  CHECK(slurp(dir / "gallery-g1.json") == first);
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  CHECK(run({"gallery", "run", "g1"}).code == 0);
  CHECK(run({"gallery", "list"}).code == 0);
  CHECK(run({"gallery", "show", "g3"}).code == 0);
  CHECK(run({"gallery", "show", "nope"}).code == 2);

  const Run v = run({"verify", kGallery + "/g6.scene", "--thm", "4.2"});
  CHECK(v.code == 0);
  const auto j = nlohmann::json::parse(v.out);
  bool seen = false;
  for (const auto& s : j["sections"])
    if (s["label"] == "composite") {
      seen = true;
      CHECK(s["verdicts"]["verdict"] == "equality");
    }
  CHECK(seen);

  const Run c = run({"check", kGallery + "/stretched.scene"});
  CHECK(c.code == 1);
  CHECK(nlohmann::json::parse(c.out)["summary"]["max_isometry"].get<double>() ==
        doctest::Approx(3.0));

  CHECK(run({"tension", kGallery + "/g3.scene"}).code == 1);
  CHECK(run({"bitension", kGallery + "/g6.scene"}).code == 0);
  CHECK(run({"bitension", kGallery + "/g6.scene", "--order", "2"}).code == 2);
  CHECK(run({"check", kGallery + "/missing.scene"}).code == 2);
  CHECK(run({"check"}).code == 2);
  CHECK(run({"verify", kGallery + "/g6.scene"}).code == 2);
  CHECK(run({"check", kGallery + "/g1.scene", "--bogus"}).code == 2);
  CHECK(run({"check", kGallery + "/g1.scene", "--tol", "speed=1"}).code == 2);
  CHECK(run({"check", kGallery + "/g1.scene", "--map", "nope"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("output does not depend on the worker count") {
  const fs::path a = scratch("t1"), b = scratch("t8");
  ::setenv("RIEMAP_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  CHECK(run({"gallery", "run", "--all", "--out", a.string(), "--format", "json,csv"}).code == 0);
  ::setenv("RIEMAP_THREADS", "8", 1);
  CHECK(worker_count() == 8);
  CHECK(run({"gallery", "run", "--all", "--out", b.string(), "--format", "json,csv"}).code == 0);
  ::unsetenv("RIEMAP_THREADS");
  for (const char* f : {"gallery-all.json", "gallery-all.csv"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK_FALSE(slurp(a / f).empty());
  }
  fs::remove_all(a);
  fs::remove_all(b);
}
