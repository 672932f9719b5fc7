#include "riemap/errors.hpp"

#include <cstdio>

namespace riemap {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Lex: return "lex";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Scene: return "scene";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::AsymmetricMetric: return "asymmetric-metric";
    case ErrorKind::UnknownIdentifier: return "unknown-identifier";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::ConstantRank: return "constant-rank";
    case ErrorKind::RankAmbiguity: return "rank-ambiguity";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Refused: return "refused";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace {

std::string at(const std::string& message, SourcePos pos) {
  return message + " at line " + std::to_string(pos.line) + ", column " +
         std::to_string(pos.column);
}

std::string singularity_message(const std::string& detail, SourcePos pos,
                                const std::vector<double>& point) {
  std::string out = detail;
  if (pos.line > 0) out = at(out, pos);
  if (!point.empty()) out += " (base point " + format_point(point) + ")";
  return out;
}

}  // namespace

LexError::LexError(const std::string& message, SourcePos pos)
    : Error(ErrorKind::Lex, at(message, pos)), pos_(pos) {}

ParseError::ParseError(const std::string& message, SourcePos pos)
    : Error(ErrorKind::Parse, at(message, pos)), pos_(pos) {}

SingularityError::SingularityError(const std::string& message, SourcePos pos,
                                   std::vector<double> point)
    : Error(ErrorKind::Singularity, singularity_message(message, pos, point)),
      detail_(message),
      pos_(pos),
      point_(std::move(point)) {}

SingularityError SingularityError::with_pos(SourcePos pos) const {
  if (pos_.line > 0) return *this;
  return SingularityError(detail_, pos, point_);
}

SingularityError SingularityError::with_point(std::vector<double> point) const {
  return SingularityError(detail_, pos_, std::move(point));
}

std::string format_point(const std::vector<double>& p) {
  std::string out = "(";
  char buf[32];
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", p[i]);
    if (i) out += ", ";
    out += buf;
  }
  return out + ")";
}

}  // namespace riemap
