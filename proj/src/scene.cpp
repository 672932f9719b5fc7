#include "riemap/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace riemap {

bool ChartManifold::contains(std::span<const double> p, double slack) const {
  if (static_cast<int>(p.size()) != dim) return false;
  for (int i = 0; i < dim; ++i) {
    const double w = (domain[i].hi - domain[i].lo) * slack;
    if (p[i] < domain[i].lo - w || p[i] > domain[i].hi + w) return false;
  }
  return true;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ChartManifold make_spaceform(const std::string& name, int dim, double c,
                             std::vector<std::string> coords,
                             std::vector<Interval> domain) {
  if (dim < 1 || dim > kMaxJetVars)
    throw Error(ErrorKind::Scene, "space form '" + name + "' has unsupported dimension " +
                                      std::to_string(dim));
  ChartManifold m;
  m.name = name;
  m.dim = dim;
  m.curvature = c;
  if (coords.empty())
    for (int i = 0; i < dim; ++i) coords.push_back("x" + std::to_string(i + 1));
  if (static_cast<int>(coords.size()) != dim)
    throw Error(ErrorKind::DimensionMismatch,
                "space form '" + name + "' declares " + std::to_string(coords.size()) +
                    " coordinates for dimension " + std::to_string(dim));
  m.coords = std::move(coords);
  if (domain.empty()) {
    double half = 1.0;
    // The conformal model only covers |x|^2 < -4/c when c < 0.
    if (c < 0.0) half = std::min(1.0, 0.9 * std::sqrt(-4.0 / c / dim));
    domain.assign(dim, Interval{-half, half});
  }
  m.domain = std::move(domain);

  std::string diag = "1";
  if (c != 0.0) {
    std::string r2;
    for (int i = 0; i < dim; ++i) {
      if (i) r2 += " + ";
      r2 += m.coords[i] + "^2";
    }
    diag = "1/(1 + " + fmt17(c / 4.0) + "*(" + r2 + "))^2";
    if (c < 0.0) diag = "1/(1 - " + fmt17(-c / 4.0) + "*(" + r2 + "))^2";
  }
  const Expr one = bind_coords(parse_expression(diag), m.coords, "space form metric");
  const Expr zero = make_number(0.0);
  m.metric.assign(dim, std::vector<Expr>(dim, zero));
  for (int i = 0; i < dim; ++i) m.metric[i][i] = one;
  return m;
}

ManifoldPtr Scene::manifold(const std::string& n) const {
  for (const auto& m : manifolds)
    if (m->name == n) return m;
  return nullptr;
}

const SmoothMap* Scene::map(const std::string& n) const {
  for (const auto& m : maps)
    if (m.name == n) return &m;
  return nullptr;
}

namespace {

class SceneParser {
 public:
  SceneParser(std::string_view text, std::string name)
      : tokens_(tokenize(text)), name_(std::move(name)) {}

  Scene parse() {
    Scene scene;
    scene.name = name_;
    while (peek().kind != TokenKind::End) {
      const Token& t = next();
      if (t.is_keyword("manifold")) {
        add_manifold(scene, manifold());
      } else if (t.is_keyword("spaceform")) {
        add_manifold(scene, spaceform());
      } else if (t.is_keyword("map")) {
        scene.maps.push_back(map(scene));
      } else if (t.is_keyword("analysis")) {
        analysis(scene.analysis);
      } else {
        throw ParseError("expected 'manifold', 'spaceform', 'map' or 'analysis', found '" +
                             t.text + "'",
                         t.pos);
      }
    }
    return scene;
  }

 private:
  const Token& peek() const { return tokens_[at_]; }
  const Token& next() { return tokens_[at_++]; }

  void expect_symbol(std::string_view s) {
    const Token& t = next();
    if (!t.is_symbol(s))
      throw ParseError("expected '" + std::string(s) + "', found '" + describe(t) + "'", t.pos);
  }

  static std::string describe(const Token& t) {
    if (t.kind == TokenKind::End) return "end of input";
    if (t.kind == TokenKind::Number) return t.text;
    return t.text;
  }

  std::string ident() {
    const Token& t = next();
    if (t.kind != TokenKind::Ident)
      throw ParseError("expected an identifier, found '" + describe(t) + "'", t.pos);
    return t.text;
  }

  int integer() {
    const Token& t = next();
    if (t.kind != TokenKind::Number || t.number != std::floor(t.number))
      throw ParseError("expected an integer, found '" + describe(t) + "'", t.pos);
    return static_cast<int>(t.number);
  }

  double constant() {
    ExprParser p(tokens_, at_);
    const SourcePos pos = peek().pos;
    Expr e = p.parse();
    at_ = p.position();
    if (has_variables(e)) throw ParseError("expected a constant", pos);
    try {
      return eval_ast(e, std::span<const Jet>{}).value();
    } catch (const SingularityError& err) {
      throw ParseError("constant does not evaluate: " + err.detail(), pos);
    }
  }

  std::vector<Interval> domain_spec() {
    std::vector<Interval> out;
    for (;;) {
      expect_symbol("[");
      Interval iv;
      iv.lo = constant();
      expect_symbol(",");
      iv.hi = constant();
      expect_symbol("]");
      out.push_back(iv);
      if (peek().kind == TokenKind::Ident && peek().text == "x" &&
          tokens_[at_ + 1].is_symbol("[")) {
        next();
        continue;
      }
      return out;
    }
  }

  std::vector<std::string> coord_list() {
    std::vector<std::string> out;
    while (peek().kind == TokenKind::Ident) out.push_back(next().text);
    return out;
  }

  void add_manifold(Scene& scene, ChartManifold m) {
    if (scene.manifold(m.name))
      throw Error(ErrorKind::Scene, "duplicate manifold '" + m.name + "'");
    scene.manifolds.push_back(std::make_shared<const ChartManifold>(std::move(m)));
  }

  ChartManifold manifold() {
    ChartManifold m;
    const SourcePos where = peek().pos;
    m.name = ident();
    expect_symbol("{");
    std::vector<std::vector<Expr>> raw;
    bool have_dim = false;
    while (!peek().is_symbol("}")) {
      const Token& t = next();
      if (t.is_keyword("dim")) {
        m.dim = integer();
        have_dim = true;
      } else if (t.is_keyword("coords")) {
        m.coords = coord_list();
      } else if (t.is_keyword("metric")) {
        raw = metric_matrix();
      } else if (t.is_keyword("domain")) {
        m.domain = domain_spec();
      } else {
        throw ParseError("unexpected '" + describe(t) + "' in manifold body", t.pos);
      }
    }
    next();
    if (!have_dim) throw ParseError("manifold '" + m.name + "' lacks 'dim'", where);
    if (m.dim < 1 || m.dim > kMaxJetVars)
      throw Error(ErrorKind::Scene, "manifold '" + m.name + "' has unsupported dimension " +
                                        std::to_string(m.dim));
    if (static_cast<int>(m.coords.size()) != m.dim)
      throw Error(ErrorKind::DimensionMismatch,
                  "manifold '" + m.name + "' declares " + std::to_string(m.coords.size()) +
                      " coordinates for dimension " + std::to_string(m.dim));
    for (std::size_t i = 0; i < m.coords.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (m.coords[i] == m.coords[j])
          throw Error(ErrorKind::Scene, "manifold '" + m.name + "' repeats coordinate '" +
                                            m.coords[i] + "'");
    if (static_cast<int>(raw.size()) != m.dim)
      throw Error(ErrorKind::DimensionMismatch,
                  "metric of '" + m.name + "' has " + std::to_string(raw.size()) +
                      " rows, expected " + std::to_string(m.dim));
    for (const auto& row : raw)
      if (static_cast<int>(row.size()) != m.dim)
        throw Error(ErrorKind::DimensionMismatch,
                    "metric row of '" + m.name + "' has " + std::to_string(row.size()) +
                        " entries, expected " + std::to_string(m.dim));
    if (m.domain.empty()) m.domain.assign(m.dim, Interval{});
    check_domain(m.name, m.domain, m.dim);
    m.metric.assign(m.dim, {});
    for (int i = 0; i < m.dim; ++i)
      for (int j = 0; j < m.dim; ++j)
        m.metric[i].push_back(bind_coords(raw[i][j], m.coords, "metric of '" + m.name + "'"));
    check_symmetric(m);
    return m;
  }

  static void check_domain(const std::string& name, const std::vector<Interval>& d, int dim) {
    if (static_cast<int>(d.size()) != dim)
      throw Error(ErrorKind::DimensionMismatch,
                  "domain of '" + name + "' has " + std::to_string(d.size()) +
                      " intervals, expected " + std::to_string(dim));
    for (const Interval& iv : d)
      if (!(iv.lo < iv.hi))
        throw Error(ErrorKind::Scene, "domain of '" + name + "' has an empty interval");
  }

  // Entry (i,j) must equal (j,i) textually, or numerically to 1e-12 at a
  // few deterministic points of the domain.
  static void check_symmetric(const ChartManifold& m) {
    static constexpr double kFractions[] = {0.5, 0.31, 0.77, 0.12, 0.63};
    for (int i = 0; i < m.dim; ++i) {
      for (int j = i + 1; j < m.dim; ++j) {
        if (to_string(m.metric[i][j]) == to_string(m.metric[j][i])) continue;
        for (int s = 0; s < 5; ++s) {
          std::vector<Jet> p;
          for (int k = 0; k < m.dim; ++k) {
            const double f = kFractions[(s + k) % 5];
            p.push_back(Jet::constant(m.domain[k].lo + f * (m.domain[k].hi - m.domain[k].lo),
                                      m.dim, 0));
          }
          double a, b;
          try {
            a = eval_ast(m.metric[i][j], p).value();
            b = eval_ast(m.metric[j][i], p).value();
          } catch (const SingularityError&) {
            continue;
          }
          if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
            throw Error(ErrorKind::AsymmetricMetric,
                        "metric of '" + m.name + "' is not symmetric: entry (" +
                            std::to_string(i + 1) + "," + std::to_string(j + 1) + ") = " +
                            to_string(m.metric[i][j]) + " but (" + std::to_string(j + 1) +
                            "," + std::to_string(i + 1) + ") = " + to_string(m.metric[j][i]));
        }
      }
    }
  }

  std::vector<std::vector<Expr>> metric_matrix() {
    std::vector<std::vector<Expr>> rows;
    expect_symbol("[");
    for (;;) {
      expect_symbol("[");
      std::vector<Expr> row;
      for (;;) {
        ExprParser p(tokens_, at_);
        row.push_back(p.parse());
        at_ = p.position();
        if (peek().is_symbol(",")) {
          next();
          continue;
        }
        expect_symbol("]");
        break;
      }
      rows.push_back(std::move(row));
      if (peek().is_symbol(",")) {
        next();
        continue;
      }
      expect_symbol("]");
      return rows;
    }
  }

  ChartManifold spaceform() {
    const SourcePos where = peek().pos;
    const std::string name = ident();
    expect_symbol("{");
    int dim = 0;
    std::optional<double> c;
    std::vector<std::string> coords;
    std::vector<Interval> domain;
    while (!peek().is_symbol("}")) {
      const Token& t = next();
      if (t.is_keyword("dim")) {
        dim = integer();
      } else if (t.is_keyword("curvature")) {
        c = constant();
      } else if (t.is_keyword("coords")) {
        coords = coord_list();
      } else if (t.is_keyword("domain")) {
        domain = domain_spec();
      } else {
        throw ParseError("unexpected '" + describe(t) + "' in spaceform body", t.pos);
      }
    }
    next();
    if (dim == 0) throw ParseError("spaceform '" + name + "' lacks 'dim'", where);
    if (!c) throw ParseError("spaceform '" + name + "' lacks 'curvature'", where);
    if (!domain.empty()) check_domain(name, domain, dim);
    ChartManifold m = make_spaceform(name, dim, *c, coords, domain);
    if (*c < 0.0) {
      double r2 = 0.0;
      for (const Interval& iv : m.domain) {
        const double e = std::max(std::abs(iv.lo), std::abs(iv.hi));
        r2 += e * e;
      }
      if (r2 >= -4.0 / *c)
        throw Error(ErrorKind::Scene, "domain of space form '" + name +
                                          "' leaves the conformal model (|x|^2 < -4/c)");
    }
    return m;
  }

  SmoothMap map(const Scene& scene) {
    SmoothMap f;
    f.name = ident();
    if (scene.map(f.name)) throw Error(ErrorKind::Scene, "duplicate map '" + f.name + "'");
    expect_symbol(":");
    const Token src_tok = peek();
    const std::string src = ident();
    expect_symbol("->");
    const Token dst_tok = peek();
    const std::string dst = ident();
    f.source = scene.manifold(src);
    f.target = scene.manifold(dst);
    if (!f.source)
      throw Error(ErrorKind::UnknownIdentifier, "map '" + f.name + "' names unknown manifold '" +
                                                    src + "' at line " +
                                                    std::to_string(src_tok.pos.line));
    if (!f.target)
      throw Error(ErrorKind::UnknownIdentifier, "map '" + f.name + "' names unknown manifold '" +
                                                    dst + "' at line " +
                                                    std::to_string(dst_tok.pos.line));
    expect_symbol("{");
    std::vector<std::pair<Token, Expr>> assigns;
    while (!peek().is_symbol("}")) {
      const Token out = peek();
      ident();
      expect_symbol("=");
      ExprParser p(tokens_, at_);
      Expr e = p.parse();
      at_ = p.position();
      assigns.emplace_back(out, e);
    }
    next();
    const int n = f.target->dim;
    if (static_cast<int>(assigns.size()) != n)
      throw Error(ErrorKind::DimensionMismatch,
                  "map '" + f.name + "' has " + std::to_string(assigns.size()) +
                      " components but target '" + dst + "' has dimension " +
                      std::to_string(n));
    f.components.assign(n, nullptr);
    for (const auto& [tok, e] : assigns) {
      auto it = std::find(f.target->coords.begin(), f.target->coords.end(), tok.text);
      if (it == f.target->coords.end())
        throw Error(ErrorKind::UnknownIdentifier,
                    "map '" + f.name + "' assigns '" + tok.text +
                        "', which is not a coordinate of '" + dst + "'");
      const auto k = it - f.target->coords.begin();
      if (f.components[k])
        throw Error(ErrorKind::Scene, "map '" + f.name + "' assigns '" + tok.text + "' twice");
      f.components[k] = bind_coords(e, f.source->coords, "map '" + f.name + "'");
    }
    return f;
  }

  void analysis(AnalysisSettings& a) {
    expect_symbol("{");
    while (!peek().is_symbol("}")) {
      const Token key = next();
      if (key.kind != TokenKind::Ident)
        throw ParseError("expected an analysis setting, found '" + describe(key) + "'", key.pos);
      if (key.text == "jet_order") {
        a.jet_order = integer();
        if (a.jet_order < 2 || a.jet_order > kMaxJetOrder)
          throw Error(ErrorKind::Configuration, "jet_order must be 2, 3 or 4");
      } else if (key.text == "samples") {
        a.samples = integer();
      } else if (key.text == "grid") {
        a.grid = integer();
      } else if (key.text == "seed") {
        a.seed = static_cast<std::uint64_t>(integer());
      } else if (key.text == "tol_rank") {
        a.tol_rank = constant();
      } else if (key.text == "tol_residual") {
        a.tol_residual = constant();
      } else {
        throw ParseError("unknown analysis setting '" + key.text + "'", key.pos);
      }
    }
    next();
  }

  std::vector<Token> tokens_;
  std::size_t at_ = 0;
  std::string name_;
};

}  // namespace

Scene parse_scene(std::string_view text, const std::string& name) {
  Scene s = SceneParser(text, name).parse();
  s.text = std::string(text);
  return s;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open scene file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), path.stem().string());
}

std::string to_scene_text(const Scene& scene) {
  std::ostringstream out;
  auto domain = [&](const ChartManifold& m) {
    std::string s;
    for (int i = 0; i < m.dim; ++i) {
      if (i) s += " x ";
      s += "[" + fmt17(m.domain[i].lo) + ", " + fmt17(m.domain[i].hi) + "]";
    }
    return s;
  };
  for (const auto& m : scene.manifolds) {
    if (m->curvature) {
      out << "spaceform " << m->name << " { dim " << m->dim << " curvature "
          << fmt17(*m->curvature) << " coords";
      for (const auto& c : m->coords) out << ' ' << c;
      out << " domain " << domain(*m) << " }\n";
      continue;
    }
    out << "manifold " << m->name << " {\n  dim " << m->dim << "\n  coords";
    for (const auto& c : m->coords) out << ' ' << c;
    out << "\n  metric [";
    for (int i = 0; i < m->dim; ++i) {
      out << (i ? ", [" : "[");
      for (int j = 0; j < m->dim; ++j) out << (j ? ", " : "") << to_string(m->metric[i][j]);
      out << "]";
    }
    out << "]\n  domain " << domain(*m) << "\n}\n";
  }
  for (const auto& f : scene.maps) {
    out << "map " << f.name << " : " << f.source->name << " -> " << f.target->name << " {\n";
    for (int k = 0; k < f.target->dim; ++k)
      out << "  " << f.target->coords[k] << " = " << to_string(f.components[k]) << "\n";
    out << "}\n";
  }
  const auto& a = scene.analysis;
  out << "analysis { jet_order " << a.jet_order << " samples " << a.samples;
  if (a.grid > 0) out << " grid " << a.grid;
  out << " seed " << a.seed << " tol_rank " << fmt17(a.tol_rank) << " tol_residual "
      << fmt17(a.tol_residual) << " }\n";
  return out.str();
}

std::string scene_digest(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace riemap
