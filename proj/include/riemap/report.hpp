#pragma once

// Sample sets and analysis reports (JSON and CSV).

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "riemap/scene.hpp"

namespace riemap {

struct SampleSpec {
  int samples = 25;  // random mode
  int grid = 0;      // > 0: k points per axis, cell centres
  std::uint64_t seed = 42;
  bool corners = true;  // random mode adds one point near every box corner
};

/// Points strictly inside the box: no coordinate closer than 1e-3 of the
/// box width to a face. Random mode draws uniform coordinates from
/// mt19937_64 (53-bit mantissas) in the order point, axis.
std::vector<std::vector<double>> grid_sample(const SampleSpec& spec,
                                             std::span<const Interval> domain);

struct Row {
  enum class Kind { Check, Info };
  std::string name;
  double value = 0.0;
  Kind kind = Kind::Info;
  double tol = 0.0;
  std::optional<double> expected;  // checks against |value - expected| <= tol

  bool pass() const;
  const char* verdict() const;  // pass | fail | info
};

struct PointRecord {
  int index = 0;
  std::vector<double> coords;
  std::vector<Row> rows;
  std::map<std::string, Eigen::VectorXd> vectors;
};

/// One analysed map (or gallery entry, or map pair).
struct Section {
  std::string label;
  std::string scene;
  std::string digest;
  std::string status = "ok";  // ok | skipped | error
  std::string message;
  std::vector<PointRecord> points;
  nlohmann::json verdicts = nlohmann::json::object();
  bool pass = false;

  /// max_NAME and mean_NAME over points for every row name.
  nlohmann::json summary() const;
};

struct Report {
  std::string name;  // file stem
  std::string command;
  nlohmann::json sampling = nlohmann::json::object();
  nlohmann::json tolerances = nlohmann::json::object();
  int jet_order = 4;
  std::vector<Section> sections;
  bool pass = false;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

inline constexpr const char* kArtifactVersion = "1.0.0";

/// Serialises with sorted keys, two-space indent and doubles printed with
/// 17 significant digits, so equal reports give equal bytes.
std::string dump_json(const nlohmann::json& j);

/// Writes NAME.json and/or NAME.csv into out_dir, creating it if needed.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_report(const Report& report,
                                               const std::vector<std::string>& formats,
                                               const std::filesystem::path& out_dir);

}  // namespace riemap
