#include "riemap/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "riemap/errors.hpp"

namespace riemap {

using nlohmann::json;

std::vector<std::vector<double>> grid_sample(const SampleSpec& spec,
                                             std::span<const Interval> domain) {
  if (domain.empty()) throw Error(ErrorKind::Domain, "cannot sample a zero-dimensional box");
  for (const Interval& iv : domain)
    if (!(iv.hi > iv.lo))
      throw Error(ErrorKind::Domain, "cannot sample an empty domain interval [" +
                                         std::to_string(iv.lo) + ", " + std::to_string(iv.hi) +
                                         "]");
  const std::size_t dim = domain.size();
  std::vector<std::vector<double>> out;
  if (spec.grid > 0) {
    const int k = spec.grid;
    std::size_t total = 1;
    for (std::size_t a = 0; a < dim; ++a) total *= static_cast<std::size_t>(k);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::vector<double> p(dim);
      std::size_t rest = idx;
      // First coordinate varies slowest.
      for (std::size_t a = dim; a-- > 0;) {
        const int i = static_cast<int>(rest % k);
        rest /= k;
        const Interval& iv = domain[a];
        p[a] = iv.lo + (iv.hi - iv.lo) * (i + 0.5) / k;
      }
      out.push_back(std::move(p));
    }
    return out;
  }
  if (spec.samples < 1 && !spec.corners)
    throw Error(ErrorKind::Configuration, "sample count must be at least 1");
  std::mt19937_64 rng(spec.seed);
  for (int s = 0; s < spec.samples; ++s) {
    std::vector<double> p(dim);
    for (std::size_t a = 0; a < dim; ++a) {
      const Interval& iv = domain[a];
      const double w = iv.hi - iv.lo, margin = 1e-3 * w;
      const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
      p[a] = iv.lo + margin + u * (w - 2.0 * margin);
    }
    out.push_back(std::move(p));
  }
  if (spec.corners) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << dim); ++mask) {
      std::vector<double> p(dim);
      for (std::size_t a = 0; a < dim; ++a) {
        const Interval& iv = domain[a];
        const double inset = 1e-2 * (iv.hi - iv.lo);
        p[a] = (mask >> a) & 1 ? iv.hi - inset : iv.lo + inset;
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

bool Row::pass() const {
  if (kind == Kind::Info) return true;
  if (!std::isfinite(value)) return false;
  if (expected) return std::abs(value - *expected) <= tol;
  return value < tol;
}

const char* Row::verdict() const {
  if (kind == Kind::Info) return "info";
  return pass() ? "pass" : "fail";
}

json Section::summary() const {
  json s = json::object();
  std::map<std::string, std::pair<double, double>> acc;  // max, sum
  std::map<std::string, int> count;
  for (const auto& p : points)
    for (const auto& r : p.rows) {
      auto [it, fresh] = acc.try_emplace(r.name, r.value, 0.0);
      if (!fresh) it->second.first = std::max(it->second.first, r.value);
      it->second.second += r.value;
      ++count[r.name];
    }
  for (const auto& [name, v] : acc) {
    s["max_" + name] = v.first;
    s["mean_" + name] = v.second / count[name];
  }
  return s;
}

namespace {

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json point_json(const PointRecord& p) {
  json j;
  j["index"] = p.index;
  j["coords"] = p.coords;
  json rows = json::object();
  for (const auto& r : p.rows) {
    json row;
    row["value"] = r.value;
    row["verdict"] = r.verdict();
    if (r.kind == Row::Kind::Check) row["tolerance"] = r.tol;
    if (r.expected) row["expected"] = *r.expected;
    rows[r.name] = row;
  }
  j["residuals"] = rows;
  json vecs = json::object();
  for (const auto& [name, v] : p.vectors) vecs[name] = vector_json(v);
  j["vectors"] = vecs;
  return j;
}

void dump(const json& j, std::string& out, int indent) {
  const std::string pad(indent, ' ');
  const std::string inner(indent + 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 2);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of numbers stay on one line.
      bool scalars = true;
      for (const auto& e : j) scalars = scalars && (e.is_number() || e.is_boolean());
      out += scalars ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += scalars ? ", " : ",\n";
        first = false;
        if (!scalars) out += inner;
        dump(e, out, indent + 2);
      }
      out += scalars ? "]" : "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string dump_json(const json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

json Report::to_json() const {
  json j;
  j["artifact"] = {{"name", "riemap"}, {"version", kArtifactVersion}};
  j["command"] = command;
  j["sampling"] = sampling;
  j["tolerances"] = tolerances;
  j["jet_order"] = jet_order;
  json secs = json::array();
  json summary = json::object();
  for (const auto& s : sections) {
    json sj;
    sj["label"] = s.label;
    sj["scene"] = s.scene;
    sj["digest"] = s.digest;
    sj["status"] = s.status;
    if (!s.message.empty()) sj["message"] = s.message;
    sj["verdicts"] = s.verdicts;
    sj["pass"] = s.pass;
    const json sum = s.summary();
    sj["summary"] = sum;
    for (auto it = sum.begin(); it != sum.end(); ++it) {
      if (it.key().rfind("max_", 0) != 0) continue;
      const double v = it.value().get<double>();
      if (!summary.contains(it.key()) || summary[it.key()].get<double>() < v) summary[it.key()] = v;
    }
    json pts = json::array();
    for (const auto& p : s.points) pts.push_back(point_json(p));
    sj["points"] = pts;
    secs.push_back(sj);
  }
  summary["pass"] = pass;
  j["sections"] = secs;
  j["summary"] = summary;
  j["pass"] = pass;
  return j;
}

std::string Report::to_csv() const {
  std::string out = "scene,map,point,coords,residual,value,tolerance,verdict\n";
  for (const auto& s : sections)
    for (const auto& p : s.points) {
      std::string coords;
      for (std::size_t i = 0; i < p.coords.size(); ++i)
        coords += (i ? ";" : "") + fmt17(p.coords[i]);
      for (const auto& r : p.rows) {
        out += csv_field(s.scene) + "," + csv_field(s.label) + "," + std::to_string(p.index) +
               "," + coords + "," + csv_field(r.name) + "," + fmt17(r.value) + "," +
               (r.kind == Row::Kind::Check ? fmt17(r.tol) : std::string()) + "," + r.verdict() +
               "\n";
      }
    }
  return out;
}

std::vector<std::filesystem::path> emit_report(const Report& report,
                                               const std::vector<std::string>& formats,
                                               const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw Error(ErrorKind::Io,
                "cannot create output directory '" + out_dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& fmt : formats) {
    std::string text;
    if (fmt == "json")
      text = dump_json(report.to_json());
    else if (fmt == "csv")
      text = report.to_csv();
    else
      throw Error(ErrorKind::Usage, "unknown report format '" + fmt + "' (json, csv)");
    const auto path = out_dir / (report.name + "." + fmt);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write report '" + path.string() + "'");
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

}  // namespace riemap
