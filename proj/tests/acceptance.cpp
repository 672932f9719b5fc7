// Acceptance run: one PASS/FAIL line per criterion.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <unistd.h>

#include "riemap/biharmonic.hpp"
#include "riemap/cli.hpp"
#include "riemap/errors.hpp"
#include "riemap/expr.hpp"
#include "riemap/gallery.hpp"
#include "riemap/geometry.hpp"
#include "riemap/report.hpp"
#include "support/fd_oracle.hpp"
#include "support/fixtures.hpp"
#include "support/random_expr.hpp"

using namespace riemap;
using namespace riemap::testing;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const std::vector<std::string> kAll = {"g1", "g2", "g3", "g4", "g5", "g6"};

Outcome horizontal_sff_is_normal() {
  Outcome o;
  std::mt19937_64 rng(31);
  double worst = 0.0;
  for (const char* name : {"g2", "g4", "g5", "g6"}) {
    const Fixture f = fixture(name);
    for (const auto& p : f.points(25)) {
      const MapPoint mp(f.map(), p);
      const MatrixXd j = mp.J.value(), g2 = mp.g2.value();
      for (int trial = 0; trial < 10; ++trial) {
        const VectorXd x = random_horizontal(rng, mp), y = random_horizontal(rng, mp),
                       z = random_horizontal(rng, mp);
        worst = std::max(worst, std::abs(second_fundamental_form(mp, x, y).dot(g2 * (j * z))));
      }
    }
  }
  o.require(worst < 1e-10, "max " + num(worst));
  if (o.pass) o.detail = "max " + num(worst);
  return o;
}

Outcome tension_decomposition() {
  Outcome o;
  double worst = 0.0;
  for (const auto& name : kAll) {
    const GalleryEntry e = builtin_scene(name);
    for (const SmoothMap& f : e.scene.maps) {
      SampleSpec spec;
      for (const auto& p : grid_sample(spec, f.source->domain)) {
        const MapPoint mp(f, p);
        if (mp.riemannian_residual() > 1e-8) continue;
        worst = std::max(worst, gallery_quantity(mp, "lemma32"));
      }
    }
  }
  o.require(worst < 1e-10, "max " + num(worst));
  if (o.pass) o.detail = "max " + num(worst);
  return o;
}

Outcome shape_operator_duality() {
  Outcome o;
  std::mt19937_64 rng(17);
  double dual = 0.0, sym = 0.0;
  // Scenes whose subject has a nontrivial normal bundle.
  for (const char* name : {"g3", "g4", "g5", "g6"}) {
    const Fixture f = fixture(name);
    const auto pts = f.points(10);
    for (int trial = 0; trial < 100; ++trial) {
      const MapPoint mp(f.map(), pts[trial % pts.size()]);
      const MatrixXd j = mp.J.value(), g2 = mp.g2.value();
      const VectorXd v = random_normal(rng, mp);
      const VectorXd x = random_horizontal(rng, mp), y = random_horizontal(rng, mp);
      const VectorXd ax = shape_operator(mp, v, x), ay = shape_operator(mp, v, y);
      dual = std::max(dual, std::abs(ax.dot(g2 * (j * y)) -
                                     v.dot(g2 * second_fundamental_form(mp, x, y))));
      sym = std::max(sym, std::abs(ax.dot(g2 * (j * y)) - (j * x).dot(g2 * ay)));
    }
  }
  o.require(dual < 1e-10, "duality " + num(dual));
  o.require(sym < 1e-10, "symmetry " + num(sym));
  if (o.pass) o.detail = "duality " + num(dual) + ", symmetry " + num(sym);
  return o;
}

Outcome curvature_consistency() {
  Outcome o;
  std::mt19937_64 rng(5);
  double model = 0.0, trace = 0.0;
  for (const auto& name : kAll) {
    const GalleryEntry e = builtin_scene(name);
    for (const auto& m : e.scene.manifolds) {
      if (!m->curvature) continue;
      SampleSpec spec;
      spec.samples = 10;
      for (const auto& p : grid_sample(spec, m->domain)) {
        const MatrixXd g = metric_at(*m, p, 0).value();
        for (int trial = 0; trial < 5; ++trial) {
          const VectorXd x = random_vector(rng, m->dim), y = random_vector(rng, m->dim),
                         z = random_vector(rng, m->dim);
          const VectorXd a = riemann_curvature(*m, p, x, y, z);
          const VectorXd b = spaceform_curvature(*m->curvature, g, x, y, z);
          model = std::max(model, (a - b).norm() / std::max(1.0, b.norm()));
        }
      }
    }
    for (const SmoothMap& f : e.scene.maps) {
      if (!f.target->curvature) continue;
      SampleSpec spec;
      for (const auto& p : grid_sample(spec, f.source->domain)) {
        const MapPoint mp(f, p);
        if (mp.riemannian_residual() > 1e-8) continue;
        trace = std::max(trace,
                         curvature_trace_term(mp, tension(mp), *f.target->curvature).difference);
      }
    }
  }
  o.require(model < 1e-8, "curvature model " + num(model));
  o.require(trace < 1e-9, "curvature trace " + num(trace));
  if (o.pass) o.detail = "curvature model " + num(model) + ", trace " + num(trace);
  return o;
}

Outcome closed_form_values() {
  Outcome o;
  double tau = 0.0, tau2 = 0.0, h2 = 0.0, pu = 0.0;
  for (const auto& p : fixture("g3").points(25, 42, true)) {
    const MapPoint mp(fixture("g3").map(), p);
    tau = std::max(tau, std::abs(gallery_quantity(mp, "tension") - 0.5));
    tau2 = std::max(tau2, std::abs(gallery_quantity(mp, "bitension") - 0.125));
  }
  const Fixture g4 = fixture("g4");
  for (const auto& p : g4.points(25, 42, true))
    h2 = std::max(h2, std::abs(gallery_quantity(MapPoint(g4.map(), p), "h2_norm") - 1.0));
  const Fixture g5 = fixture("g5");
  for (const auto& p : g5.points(25, 42, true)) {
    const PseudoUmbilical r = pseudo_umbilical_residual(MapPoint(g5.map(), p));
    pu = std::max({pu, r.operator_residual, r.bilinear_residual});
  }
  o.require(tau <= 1e-9, "g3 |tau| off by " + num(tau));
  o.require(tau2 <= 1e-7, "g3 |tau2| off by " + num(tau2));
  o.require(h2 <= 1e-9, "g4 |H2| off by " + num(h2));
  o.require(pu < 1e-9, "g5 pseudo-umbilical residual " + num(pu));
  if (o.pass)
    o.detail = "g3 |tau| err " + num(tau) + ", |tau2| err " + num(tau2) + "; g4 |H2| err " +
               num(h2) + "; g5 PU " + num(pu);
  return o;
}

Outcome composition_suite() {
  Outcome o;
  const Fixture g5 = fixture("g5");
  const Scene& s = g5.entry.scene;
  const auto pts = g5.points(25, 42, true);
  const SmoothMap& f1 = *s.map("proj");
  const SmoothMap& f2 = *s.map("sphere");
  const Composition c = compose_submersion_immersion(f1, f2, pts);
  const double iso = verify_riemannian(c.map, pts).max_residual;
  double pu = 0.0, sff = 0.0;
  std::mt19937_64 rng(41);
  for (const auto& p : pts) {
    const MapPoint mc(c.map, p), m1(f1, p);
    const MapPoint m2(f2, m1.y0);
    const PseudoUmbilical r = pseudo_umbilical_residual(mc);
    pu = std::max({pu, r.operator_residual, r.bilinear_residual});
    const MatrixXd j1 = m1.J.value();
    const VectorXd x = random_vector(rng, mc.m), y = random_vector(rng, mc.m);
    const VectorXd gap = second_fundamental_form(mc, x, y) -
                         m2.J.value() * second_fundamental_form(m1, x, y) -
                         second_fundamental_form(m2, j1 * x, j1 * y);
    sff = std::max(sff, gap.norm());
  }
  o.require(iso < 1e-10, "isometry " + num(iso));
  o.require(pu < 1e-9, "pseudo-umbilical " + num(pu));
  o.require(sff < 1e-9, "composite sff " + num(sff));
  if (o.pass) o.detail = "isometry " + num(iso) + ", PU " + num(pu) + ", sff " + num(sff);
  return o;
}

Outcome biharmonic_equations() {
  Outcome o;
  const Fixture g6 = fixture("g6");
  const auto p6 = g6.points(25, 42, true);
  double worst6 = 0.0;
  for (const auto& p : p6) {
    const Thm41Point t = thm41_point(MapPoint(g6.map(), p));
    worst6 = std::max({worst6, t.eq42, t.eq43, t.tau2_range, t.tau2_normal});
  }
  const Fixture g5 = fixture("g5");
  const auto p5 = g5.points(25, 42, true);
  double margin = INFINITY;
  for (const auto& p : p5) {
    const MapPoint mp(g5.map(), p);
    const Thm41Point t = thm41_point(mp);
    const double bound = mp.m2 * mp.m2 * std::pow(t.h2_norm, 3) / 2;
    if (!(bound > 0)) margin = -1;
    margin = std::min(margin, t.eq43 - bound);
  }
  const Thm41Report r6 = thm41_verify(g6.map(), p6), r5 = thm41_verify(g5.map(), p5);
  o.require(worst6 < 1e-7, "g6 terms " + num(worst6));
  o.require(margin >= 0, "g5 lower bound margin " + num(margin));
  o.require(r6.agree && r6.biharmonic_by_equations, "g6 verdicts disagree");
  o.require(r5.agree && !r5.biharmonic_by_equations, "g5 verdicts disagree");
  if (o.pass)
    o.detail = "g6 max term " + num(worst6) + "; g5 eq43 - bound >= " + num(margin) +
               "; verdicts agree";
  return o;
}

Outcome classification() {
  Outcome o;
  for (const auto& name : kAll) {
    const Fixture f = fixture(name);
    const auto pts = f.points(25, 42, true);
    for (const SmoothMap& m : f.entry.scene.maps) {
      try {
        SampleSpec spec;
        const Thm42Report r = thm42_classify(m, grid_sample(spec, m.source->domain));
        o.require(!r.corollary42_contradiction, name + "/" + m.name + " raised the flag");
      } catch (const Error&) {
        // Not a Riemannian map; nothing to classify.
      }
    }
    const Thm42Report r = thm42_classify(f.map(), pts);
    if (name == "g2") o.require(r.verdict == "harmonic", "g2 verdict " + r.verdict);
    if (name == "g6") {
      o.require(r.verdict == "equality", "g6 verdict " + r.verdict);
      o.require(r.equality_gap < 1e-7, "g6 gap " + num(r.equality_gap));
      if (o.pass) o.detail = "g2 harmonic; g6 equality, gap " + num(r.equality_gap) + "; no flag";
    }
  }
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  double t1 = 0.0, t2 = 0.0;
  for (const auto& name : kAll) {
    const Fixture f = fixture(name);
    const FdOracle oracle(f.map());
    for (const auto& p : f.points(5, 2024)) {
      const MapPoint mp(f.map(), p);
      const LVec lp = to_long(p);
      t1 = std::max(t1, relative_gap(tension(mp), oracle.tension(lp)));
      t2 = std::max(t2, relative_gap(bitension(mp), oracle.bitension(lp)));
    }
  }
  o.require(t1 < 1e-6, "tension gap " + num(t1));
  o.require(t2 < 1e-5, "bitension gap " + num(t2));
  if (o.pass) o.detail = "tension gap " + num(t1) + ", bitension gap " + num(t2);
  return o;
}

std::optional<ErrorKind> kind_of(const std::function<void()>& fn) { return thrown_kind(fn); }

Outcome parser_suite() {
  Outcome o;
  std::mt19937_64 rng(99);
  const std::vector<std::string> vars = {"x", "y", "z"};
  int ok = 0;
  for (int i = 0; i < 500; ++i) {
    const Expr e = random_expr(rng, vars, 6);
    const Expr again = bind_coords(parse_expression(to_string(e)), vars, "roundtrip");
    if (structurally_equal(e, again)) ++ok;
  }
  o.require(ok == 500, std::to_string(500 - ok) + " round trips differ");

  auto value = [](const char* s) {
    return eval_ast(parse_expression(s), std::span<const Jet>{}).value();
  };
  o.require(structurally_equal(parse_expression("a + b * c"),
                               make_binary(NodeKind::Add, make_variable("a"),
                                           make_binary(NodeKind::Mul, make_variable("b"),
                                                       make_variable("c")))),
            "a + b * c");
  o.require(value("2^3^2") == 512.0, "2^3^2");
  o.require(value("8 / 4 / 2") == 1.0, "8 / 4 / 2");
  o.require(value("8 - 4 - 2") == 2.0, "8 - 4 - 2");
  o.require(value("-2^2") == -4.0, "-2^2");
  o.require(value("2^-1") == 0.5, "2^-1");

  o.require(kind_of([] {
              parse_scene(R"(manifold A { dim 2 coords x y metric [[1,0],[0,1]] }
                             manifold B { dim 2 coords u v metric [[1,0],[0,1]] }
                             map f : A -> B { u = x v = y w = x })");
            }) == ErrorKind::DimensionMismatch,
            "dimension mismatch");
  o.require(kind_of([] {
              parse_scene("manifold A { dim 2 coords x y metric [[1,x],[0,1]] }");
            }) == ErrorKind::AsymmetricMetric,
            "asymmetric metric");
  o.require(kind_of([] {
              parse_scene("manifold A { dim 2 coords x y metric [[1,0],[0,1 + q]] }");
            }) == ErrorKind::UnknownIdentifier,
            "unknown identifier");
  if (o.pass) o.detail = "500 round trips, precedence and error fixtures";
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / ("riemap-accept-" + std::to_string(::getpid()));
  std::vector<std::string> texts;
  for (const char* threads : {"1", "8"}) {
    ::setenv("RIEMAP_THREADS", threads, 1);
    const fs::path dir = base / threads;
    std::ostringstream out, err;
    const int code =
        run_command({"gallery", "run", "--all", "--out", dir.string(), "--format", "json,csv"},
                    out, err);
    o.require(code == 0, std::string("exit ") + std::to_string(code) + " with " + threads);
    texts.push_back(slurp(dir / "gallery-all.json") + slurp(dir / "gallery-all.csv"));
  }
  ::unsetenv("RIEMAP_THREADS");
  fs::remove_all(base);
  o.require(!texts[0].empty() && texts[0] == texts[1], "reports differ");
  if (o.pass) o.detail = "identical reports (" + std::to_string(texts[0].size()) + " bytes)";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"horizontal second fundamental form is normal", horizontal_sff_is_normal},
      {"tension decomposition", tension_decomposition},
      {"shape operator duality and symmetry", shape_operator_duality},
      {"space form curvature consistency", curvature_consistency},
      {"closed-form gallery values", closed_form_values},
      {"submersion-immersion composition", composition_suite},
      {"biharmonic equations", biharmonic_equations},
      {"space form classification", classification},
      {"jets vs finite differences", oracle_equivalence},
      {"parser", parser_suite},
      {"determinism across worker counts", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str());
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
