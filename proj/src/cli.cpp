#include "riemap/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include "riemap/biharmonic.hpp"
#include "riemap/errors.hpp"
#include "riemap/gallery.hpp"
#include "riemap/report.hpp"

namespace riemap {

using nlohmann::json;

int worker_count() {
  if (const char* env = std::getenv("RIEMAP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min(v, 256L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Options {
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  std::optional<int> order;
  std::vector<std::string> tol;
  std::string out_dir;
  std::vector<std::string> formats{"json"};
  std::string map;
  std::string thm;
  bool no_corners = false;
};

struct Settings {
  SampleSpec sample;
  int order = 4;
  Tolerances tol;
};

Settings resolve(const AnalysisSettings& a, const Options& o) {
  Settings s;
  s.sample.samples = o.samples.value_or(a.samples);
  s.sample.seed = o.seed.value_or(a.seed);
  s.sample.grid = o.grid.value_or(a.grid);
  s.sample.corners = !o.no_corners;
  s.order = o.order.value_or(a.jet_order);
  s.tol.rank = a.tol_rank;
  s.tol.residual = a.tol_residual;
  for (const auto& kv : o.tol) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Usage, "--tol expects NAME=VALUE, got '" + kv + "'");
    const std::string name = kv.substr(0, eq);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::Usage, "bad tolerance value in '" + kv + "'");
    }
    if (!(v > 0.0)) throw Error(ErrorKind::Usage, "tolerances must be positive: '" + kv + "'");
    if (name == "rank")
      s.tol.rank = v;
    else if (name == "residual")
      s.tol.residual = v;
    else if (name == "identity")
      s.tol.identity = v;
    else if (name == "biharmonic")
      s.tol.biharmonic = v;
    else
      throw Error(ErrorKind::Usage, "unknown tolerance '" + name +
                                        "' (rank, residual, identity, biharmonic)");
  }
  return s;
}

json sampling_json(const Settings& s) {
  json j;
  if (s.sample.grid > 0) {
    j["mode"] = "grid";
    j["per_axis"] = s.sample.grid;
  } else {
    j["mode"] = "random";
    j["samples"] = s.sample.samples;
    j["seed"] = s.sample.seed;
    j["corners"] = s.sample.corners;
    j["generator"] = "mt19937_64";
  }
  j["margin"] = "1e-3 of the box width";
  return j;
}

json tolerance_json(const Tolerances& t) {
  return {{"rank", t.rank},
          {"residual", t.residual},
          {"identity", t.identity},
          {"biharmonic", t.biharmonic}};
}

bool is_analysis_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::Singularity:
    case ErrorKind::Geometry:
    case ErrorKind::ConstantRank:
    case ErrorKind::RankAmbiguity:
    case ErrorKind::Domain:
    case ErrorKind::Refused:
      return true;
    default:
      return false;
  }
}

using PointFn = std::function<PointRecord(int, const std::vector<double>&)>;

/// Evaluates fn on every point on the worker pool. Results keep point
/// order; the error of the lowest failing index is rethrown.
std::vector<PointRecord> run_points(const std::vector<std::vector<double>>& points,
                                    const PointFn& fn) {
  const int n = static_cast<int>(points.size());
  std::vector<PointRecord> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        results[i] = fn(i, points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::min(worker_count(), std::max(n, 1));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

PointRecord record(int index, const std::vector<double>& p) {
  PointRecord r;
  r.index = index;
  r.coords = p;
  return r;
}

Row check(std::string name, double value, double tol) {
  return Row{std::move(name), value, Row::Kind::Check, tol, std::nullopt};
}

Row info(std::string name, double value) {
  return Row{std::move(name), value, Row::Kind::Info, 0.0, std::nullopt};
}

bool rows_pass(const std::vector<PointRecord>& pts) {
  for (const auto& p : pts)
    for (const auto& r : p.rows)
      if (!r.pass()) return false;
  return true;
}

double row_max(const std::vector<PointRecord>& pts, const std::string& name) {
  double m = 0.0;
  for (const auto& p : pts)
    for (const auto& r : p.rows)
      if (r.name == name) m = std::max(m, r.value);
  return m;
}

void require_order(const Settings& s, int needed, const char* what) {
  if (s.order < needed)
    throw Error(ErrorKind::Configuration, std::string(what) + " needs jet order " +
                                              std::to_string(needed) + "; rerun with --order 4");
}

double g1_norm(const MapPoint& mp, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(mp.g1.value() * v)));
}

// Per-map analyses. Each fills points, verdicts and pass of a section.

void analyse_check(Section& s, const SmoothMap& f, const Settings& st,
                   const std::vector<std::vector<double>>& pts) {
  s.points = run_points(pts, [&](int i, const std::vector<double>& p) {
    PointRecord r = record(i, p);
    const MapPoint mp(f, p, 2, st.tol.rank);
    r.rows.push_back(check("isometry", mp.riemannian_residual(), st.tol.residual));
    r.rows.push_back(info("rank", mp.m2));
    return r;
  });
  s.pass = rows_pass(s.points);
  s.verdicts["riemannian"] = s.pass;
  s.verdicts["max_isometry_residual"] = row_max(s.points, "isometry");
}

void analyse_tension(Section& s, const SmoothMap& f, const Settings& st,
                     const std::vector<std::vector<double>>& pts) {
  require_order(st, 2, "the tension field");
  s.points = run_points(pts, [&](int i, const std::vector<double>& p) {
    PointRecord r = record(i, p);
    const MapPoint mp(f, p, st.order, st.tol.rank);
    const Eigen::VectorXd tau = tension(mp);
    const Eigen::VectorXd mu = value(kernel_mean_curvature_jets(mp));
    const Eigen::VectorXd h2 = value(mean_curvature_h2_jets(mp));
    const double iso = mp.riemannian_residual();
    const double l32 = mp.g2_norm(tau + mp.m1 * (mp.J.value() * mu) - mp.m2 * h2);
    r.rows.push_back(check("tension", mp.g2_norm(tau), st.tol.residual));
    // The decomposition presumes a Riemannian map.
    r.rows.push_back(iso < st.tol.residual ? check("lemma32", l32, st.tol.identity)
                                           : info("lemma32", l32));
    r.rows.push_back(info("isometry", iso));
    r.rows.push_back(info("kernel_mean_curvature", g1_norm(mp, mu)));
    r.rows.push_back(info("h2_norm", mp.g2_norm(h2)));
    r.vectors["tau"] = tau;
    r.vectors["mu"] = mu;
    r.vectors["h2"] = h2;
    return r;
  });
  s.pass = rows_pass(s.points);
  s.verdicts["harmonic"] = row_max(s.points, "tension") < st.tol.residual;
}

void analyse_bitension(Section& s, const SmoothMap& f, const Settings& st,
                       const std::vector<std::vector<double>>& pts) {
  require_order(st, 4, "the bitension field");
  s.points = run_points(pts, [&](int i, const std::vector<double>& p) {
    PointRecord r = record(i, p);
    const MapPoint mp(f, p, st.order, st.tol.rank);
    const BitensionBreakdown b = bitension_breakdown(mp, st.tol.residual);
    const bool riemannian = mp.riemannian_residual() < st.tol.residual;
    r.rows.push_back(info("tension", mp.g2_norm(b.tau)));
    r.rows.push_back(check("bitension", mp.g2_norm(b.tau2_full), st.tol.biharmonic));
    r.rows.push_back(info("tau2_range", mp.g2_norm(b.tau2_range)));
    r.rows.push_back(info("tau2_normal", mp.g2_norm(b.tau2_normal)));
    r.rows.push_back(info("vertical_trace_remainder", mp.g2_norm(b.vertical_trace_remainder)));
    if (b.c) {
      r.rows.push_back(check("spaceform_crosscheck", b.spaceform_crosscheck, 1e-8));
      r.rows.push_back(riemannian
                           ? check("curvature_identity", b.curvature_identity_residual, 1e-9)
                           : info("curvature_identity", b.curvature_identity_residual));
    }
    r.vectors["tau"] = b.tau;
    r.vectors["tau2"] = b.tau2_full;
    return r;
  });
  s.pass = rows_pass(s.points);
  const bool harmonic = row_max(s.points, "tension") < st.tol.residual;
  const bool biharmonic = row_max(s.points, "bitension") < st.tol.biharmonic;
  s.verdicts["harmonic"] = harmonic;
  s.verdicts["biharmonic"] = biharmonic;
  s.verdicts["proper_biharmonic"] = biharmonic && !harmonic;
}

json thm42_json(const Thm42Report& t) {
  json j;
  j["verdict"] = t.verdict;
  j["reason"] = t.reason;
  j["riemannian"] = t.riemannian;
  j["pseudo_umbilical"] = t.pseudo_umbilical;
  j["minimal_fibers"] = t.minimal_fibers;
  j["parallel_h2"] = t.parallel_h2;
  j["harmonic"] = t.harmonic;
  j["biharmonic"] = t.biharmonic;
  j["h2_squared"] = t.h2_squared;
  j["equality_gap"] = t.equality_gap;
  j["eq46_residual"] = t.eq46_residual;
  j["corollary42_contradiction"] = t.corollary42_contradiction;
  j["c"] = t.c ? json(*t.c) : json(nullptr);
  return j;
}

PointRecord classify_record(int i, const std::vector<double>& p, const ClassifyPoint& c) {
  PointRecord r = record(i, p);
  r.rows = {info("isometry", c.isometry),         info("pu_operator", c.pu_operator),
            info("pu_bilinear", c.pu_bilinear),   info("kernel_mean_curvature", c.mu_norm),
            info("nabla_perp_h2", c.nabla_perp_h2), info("h2_squared", c.h2_squared),
            info("tension", c.tau_norm),          info("bitension", c.tau2_norm)};
  return r;
}

void analyse_classify(Section& s, const SmoothMap& f, const Settings& st,
                      const std::vector<std::vector<double>>& pts) {
  require_order(st, 4, "classification");
  std::vector<ClassifyPoint> cps(pts.size());
  s.points = run_points(pts, [&](int i, const std::vector<double>& p) {
    const MapPoint mp(f, p, st.order, st.tol.rank);
    cps[i] = classify_point(mp, st.tol);
    return classify_record(i, p, cps[i]);
  });
  const Thm42Report t = thm42_aggregate(std::move(cps), f.target->curvature, st.tol);
  s.verdicts = thm42_json(t);
  s.pass = t.verdict != "inconsistent-with-theorem" && !t.corollary42_contradiction;
}

void analyse_thm41(Section& s, const SmoothMap& f, const Settings& st,
                   const std::vector<std::vector<double>>& pts) {
  require_order(st, 4, "--thm 4.1");
  std::vector<Thm41Point> tps(pts.size());
  s.points = run_points(pts, [&](int i, const std::vector<double>& p) {
    const MapPoint mp(f, p, st.order, st.tol.rank);
    const Thm41Point t = thm41_point(mp, st.tol);
    tps[i] = t;
    PointRecord r = record(i, p);
    r.rows = {info("eq42", t.eq42),
              info("eq43", t.eq43),
              info("tau2_range", t.tau2_range),
              info("tau2_normal", t.tau2_normal),
              info("discrepancy_range", t.discrepancy_range),
              info("discrepancy_normal", t.discrepancy_normal),
              info("vertical_trace_remainder", t.vertical_remainder),
              check("curvature_identity", t.curvature_identity, 1e-9),
              info("h2_norm", t.h2_norm)};
    return r;
  });
  const Thm41Report rep = thm41_aggregate(std::move(tps), st.tol);
  s.verdicts["biharmonic_by_equations"] = rep.biharmonic_by_equations;
  s.verdicts["biharmonic_by_bitension"] = rep.biharmonic_by_bitension;
  s.verdicts["agree"] = rep.agree;
  s.pass = rep.pass && rows_pass(s.points);
}

Section run_section(const std::string& label, const Scene& scene, const SmoothMap& f,
                    const Settings& st,
                    const std::function<void(Section&, const SmoothMap&, const Settings&,
                                             const std::vector<std::vector<double>>&)>& fn) {
  Section s;
  s.label = label;
  s.scene = scene.name;
  s.digest = scene_digest(scene.text);
  const auto pts = grid_sample(st.sample, f.source->domain);
  try {
    fn(s, f, st, pts);
  } catch (const Error& e) {
    if (!is_analysis_error(e.kind())) throw;
    s.points.clear();
    s.verdicts = json::object();
    s.pass = false;
    s.status = e.kind() == ErrorKind::Refused ? "skipped" : "error";
    s.message = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return s;
}

/// --thm 3.1 over every pair F1: A -> B, F2: B -> C of the scene.
std::vector<Section> analyse_thm31(const Scene& scene, const Settings& st,
                                   const std::string& only) {
  std::vector<Section> out;
  for (const auto& f1 : scene.maps)
    for (const auto& f2 : scene.maps) {
      if (f1.target != f2.source) continue;
      if (!only.empty() && only != f1.name && only != f2.name) continue;
      const SmoothMap& src = f1;
      Section s = run_section(
          f2.name + "_o_" + f1.name, scene, src, st,
          [&](Section& sec, const SmoothMap&, const Settings& set,
              const std::vector<std::vector<double>>& pts) {
            require_order(set, 2, "--thm 3.1");
            const Composition comp =
                compose_submersion_immersion(f1, f2, pts, set.tol.residual, set.tol.rank);
            sec.points = run_points(pts, [&](int i, const std::vector<double>& p) {
              PointRecord r = record(i, p);
              const MapPoint m1(f1, p, set.order, set.tol.rank);
              const MapPoint m2(f2, m1.y0, set.order, set.tol.rank);
              const MapPoint mc(comp.map, p, set.order, set.tol.rank);
              r.rows.push_back(check("submersion", m1.riemannian_residual(), set.tol.residual));
              r.rows.push_back(check("immersion", m2.riemannian_residual(), set.tol.residual));
              r.rows.push_back(check("composite_isometry", mc.riemannian_residual(),
                                     set.tol.residual));
              const Eigen::MatrixXd j1 = m1.J.value();
              double sff_gap = 0.0;
              for (int a = 0; a < mc.m; ++a)
                for (int b = 0; b < mc.m; ++b) {
                  const Eigen::VectorXd x = Eigen::VectorXd::Unit(mc.m, a);
                  const Eigen::VectorXd y = Eigen::VectorXd::Unit(mc.m, b);
                  const Eigen::VectorXd lhs = second_fundamental_form(mc, x, y);
                  const Eigen::VectorXd rhs = m2.J.value() * second_fundamental_form(m1, x, y) +
                                              second_fundamental_form(m2, j1 * x, j1 * y);
                  sff_gap = std::max(sff_gap, mc.g2_norm(lhs - rhs));
                }
              r.rows.push_back(check("sff_identity", sff_gap, 1e-9));
              if (set.order >= 3) {
                const PseudoUmbilical pu2 = pseudo_umbilical_residual(m2, set.tol.residual);
                const PseudoUmbilical puc = pseudo_umbilical_residual(mc, set.tol.residual);
                const double v = std::max(puc.operator_residual, puc.bilinear_residual);
                r.rows.push_back(info("immersion_pseudo_umbilical",
                                      std::max(pu2.operator_residual, pu2.bilinear_residual)));
                r.rows.push_back(pu2.pass ? check("composite_pseudo_umbilical", v, 1e-9)
                                          : info("composite_pseudo_umbilical", v));
              }
              return r;
            });
            sec.verdicts["riemannian_map"] = row_max(sec.points, "composite_isometry") <
                                             set.tol.residual;
            sec.pass = rows_pass(sec.points);
          });
      out.push_back(std::move(s));
    }
  return out;
}

void analyse_gallery_entry(Section& s, const GalleryEntry& e, const SmoothMap& f,
                           const Settings& st, const std::vector<std::vector<double>>& pts) {
  require_order(st, 4, "gallery runs");
  std::vector<ClassifyPoint> cps(pts.size());
  s.points = run_points(pts, [&](int i, const std::vector<double>& p) {
    PointRecord r = record(i, p);
    const MapPoint mp(f, p, st.order, st.tol.rank);
    for (const auto& x : e.expected)
      r.rows.push_back(
          Row{x.quantity, gallery_quantity(mp, x.quantity), Row::Kind::Check, x.tol, x.value});
    cps[i] = classify_point(mp, st.tol);
    return r;
  });
  const Thm42Report t = thm42_aggregate(std::move(cps), f.target->curvature, st.tol);
  const bool verdict_ok = t.verdict == e.thm42_verdict &&
                          t.pseudo_umbilical == e.pseudo_umbilical &&
                          t.biharmonic == e.biharmonic && !t.corollary42_contradiction;
  s.verdicts = thm42_json(t);
  s.verdicts["expected_verdict"] = e.thm42_verdict;
  s.verdicts["verdict_provenance"] = e.verdict_provenance;
  json prov = json::object();
  for (const auto& x : e.expected) prov[x.quantity] = x.provenance;
  s.verdicts["provenance"] = prov;
  s.verdicts["expectations_pass"] = rows_pass(s.points);
  s.pass = rows_pass(s.points) && verdict_ok;
}

int finish(const Report& rep, const Options& o, std::ostream& out) {
  if (o.out_dir.empty()) {
    const bool csv_only = o.formats.size() == 1 && o.formats[0] == "csv";
    out << (csv_only ? rep.to_csv() : dump_json(rep.to_json()));
  } else {
    for (const auto& path : emit_report(rep, o.formats, o.out_dir))
      out << "wrote " << path.string() << "\n";
    for (const auto& s : rep.sections) {
      out << s.label << ": "
          << (s.status == "ok" ? (s.pass ? "PASS" : "FAIL") : s.status.c_str());
      if (!s.message.empty()) out << " (" << s.message << ")";
      out << "\n";
    }
    out << (rep.pass ? "PASS" : "FAIL") << "\n";
  }
  return rep.pass ? 0 : 1;
}

/// A report passes when every analysed section passes. Refused sections
/// are skipped unless they were explicitly selected or nothing else ran.
bool report_pass(const std::vector<Section>& sections, bool explicit_selection) {
  bool any = false, ok = true;
  for (const auto& s : sections) {
    if (s.status == "skipped") {
      if (explicit_selection) ok = false;
      continue;
    }
    any = true;
    ok = ok && s.pass;
  }
  return ok && any;
}

std::string file_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

int scene_command(const std::string& command, const std::string& path, const Options& o,
                  std::ostream& out) {
  const Scene scene = load_scene(path);
  const Settings st = resolve(scene.analysis, o);
  Report rep;
  rep.command = command == "verify" ? "verify-" + o.thm : command;
  rep.name = file_stem(path) + "-" + rep.command;
  rep.sampling = sampling_json(st);
  rep.tolerances = tolerance_json(st.tol);
  rep.jet_order = st.order;
  if (!o.map.empty() && !scene.map(o.map))
    throw Error(ErrorKind::Scene, "scene '" + scene.name + "' has no map '" + o.map + "'");
  if (scene.maps.empty()) throw Error(ErrorKind::Scene, "scene '" + scene.name + "' has no maps");

  if (command == "verify" && o.thm == "3.1") {
    rep.sections = analyse_thm31(scene, st, o.map);
    if (rep.sections.empty())
      throw Error(ErrorKind::Scene, "no composable pair of maps in scene '" + scene.name + "'");
  } else {
    std::function<void(Section&, const SmoothMap&, const Settings&,
                       const std::vector<std::vector<double>>&)>
        fn;
    if (command == "check")
      fn = analyse_check;
    else if (command == "tension")
      fn = analyse_tension;
    else if (command == "bitension")
      fn = analyse_bitension;
    else if (command == "classify" || (command == "verify" && o.thm == "4.2"))
      fn = analyse_classify;
    else if (command == "verify" && o.thm == "4.1")
      fn = analyse_thm41;
    else
      throw Error(ErrorKind::Usage, "--thm must be one of 3.1, 4.1, 4.2");
    for (const auto& f : scene.maps) {
      if (!o.map.empty() && f.name != o.map) continue;
      rep.sections.push_back(run_section(f.name, scene, f, st, fn));
    }
  }
  rep.pass = report_pass(rep.sections, !o.map.empty());
  return finish(rep, o, out);
}

int gallery_run(const std::vector<std::string>& names, const Options& o, std::ostream& out) {
  Report rep;
  rep.command = "gallery";
  rep.name = names.size() == 1 ? "gallery-" + names[0] : "gallery-all";
  bool first = true;
  for (const auto& name : names) {
    const GalleryEntry e = builtin_scene(name);
    const Settings st = resolve(e.scene.analysis, o);
    if (first) {
      rep.sampling = sampling_json(st);
      rep.tolerances = tolerance_json(st.tol);
      rep.jet_order = st.order;
      first = false;
    }
    const SmoothMap* f = e.scene.map(e.subject);
    rep.sections.push_back(run_section(
        e.name, e.scene, *f, st,
        [&](Section& s, const SmoothMap& m, const Settings& set,
            const std::vector<std::vector<double>>& pts) {
          analyse_gallery_entry(s, e, m, set, pts);
        }));
  }
  rep.pass = report_pass(rep.sections, true);
  return finish(rep, o, out);
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--samples", o.samples, "random sample count")->check(CLI::PositiveNumber);
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--grid", o.grid, "grid points per axis (replaces random samples)")
      ->check(CLI::PositiveNumber);
  app->add_option("--order", o.order, "jet order")->check(CLI::IsMember({2, 4}));
  app->add_option("--tol", o.tol, "tolerance override NAME=VALUE")->take_all();
  app->add_option("--out", o.out_dir, "write reports into this directory");
  app->add_option("--format", o.formats, "report formats: json, csv")
      ->delimiter(',')
      ->check(CLI::IsMember({"json", "csv"}));
  app->add_flag("--no-corners", o.no_corners, "do not add corner-adjacent points");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"riemap: geometry of Riemannian maps", "riemap"};
  app.require_subcommand(1);
  Options o;
  std::string scene_path;
  std::string gallery_name;
  bool gallery_all = false;

  std::vector<CLI::App*> scene_cmds;
  for (const char* name : {"check", "tension", "bitension", "classify", "verify"}) {
    static const std::map<std::string, std::string> help = {
        {"check", "verify the Riemannian-map condition at the samples"},
        {"tension", "tension field and its kernel/range decomposition"},
        {"bitension", "bitension field with harmonic and biharmonic verdicts"},
        {"classify", "pseudo-umbilicity and the biharmonic dichotomy"},
        {"verify", "theorem verifiers"}};
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("scene", scene_path, "scene file")->required();
    sub->add_option("--map", o.map, "analyse only this map");
    add_common(sub, o);
    scene_cmds.push_back(sub);
  }
  scene_cmds.back()
      ->add_option("--thm", o.thm, "theorem: 3.1, 4.1 or 4.2")
      ->required()
      ->check(CLI::IsMember({"3.1", "4.1", "4.2"}));

  CLI::App* gallery = app.add_subcommand("gallery", "built-in scenes");
  gallery->require_subcommand(1);
  CLI::App* glist = gallery->add_subcommand("list", "list gallery scenes");
  CLI::App* grun = gallery->add_subcommand("run", "run gallery scenes against their expectations");
  grun->add_option("name", gallery_name, "gallery scene name");
  grun->add_flag("--all", gallery_all, "run every gallery scene");
  add_common(grun, o);
  CLI::App* gshow = gallery->add_subcommand("show", "print the scene text of a gallery entry");
  gshow->add_option("name", gallery_name, "gallery scene name")->required();

  std::vector<std::string> argv_store{"riemap"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "riemap: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    for (CLI::App* sub : scene_cmds)
      if (sub->parsed()) return scene_command(sub->get_name(), scene_path, o, out);
    if (glist->parsed()) {
      for (const auto& n : gallery_names())
        out << n << "  " << builtin_scene(n).description << "\n";
      return 0;
    }
    if (gshow->parsed()) {
      out << gallery_text(builtin_scene(gallery_name).file);
      return 0;
    }
    if (grun->parsed()) {
      if (gallery_all == !gallery_name.empty()) {
        err << "riemap: gallery run needs exactly one of NAME or --all\n\n" << grun->help();
        return 2;
      }
      return gallery_run(gallery_all ? gallery_names() : std::vector<std::string>{gallery_name},
                         o, out);
    }
  } catch (const Error& e) {
    err << "riemap: " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return is_analysis_error(e.kind()) ? 1 : 2;
  } catch (const std::exception& e) {
    err << "riemap: " << e.what() << "\n";
    return 2;
  }
  err << app.help();
  return 2;
}

}  // namespace riemap
