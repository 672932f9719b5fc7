#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace riemap {

enum class ErrorKind {
  Configuration,
  Singularity,
  Usage,
  Lex,
  Parse,
  Scene,
  DimensionMismatch,
  AsymmetricMetric,
  UnknownIdentifier,
  Geometry,
  ConstantRank,
  RankAmbiguity,
  Domain,
  Refused,
  Io,
};

const char* to_string(ErrorKind kind);

/// Base of every error raised by the library. The kind is the stable
/// classification used by tests and by the CLI exit-status logic.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Position inside a source text, 1-based.
struct SourcePos {
  int line = 0;
  int column = 0;
};

class LexError : public Error {
 public:
  LexError(const std::string& message, SourcePos pos);
  SourcePos pos() const noexcept { return pos_; }

 private:
  SourcePos pos_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, SourcePos pos);
  SourcePos pos() const noexcept { return pos_; }

 private:
  SourcePos pos_;
};

/// Raised when a jet operation leaves the domain of the function being
/// expanded (pole, log of a non-positive number, ...). The evaluator
/// attaches the source position; geometry code attaches the base point.
class SingularityError : public Error {
 public:
  explicit SingularityError(const std::string& message)
      : Error(ErrorKind::Singularity, message), detail_(message) {}
  SingularityError(const std::string& message, SourcePos pos,
                   std::vector<double> point);

  SourcePos pos() const noexcept { return pos_; }
  const std::vector<double>& point() const noexcept { return point_; }
  const std::string& detail() const noexcept { return detail_; }

  SingularityError with_pos(SourcePos pos) const;
  SingularityError with_point(std::vector<double> point) const;

 private:
  std::string detail_;
  SourcePos pos_{};
  std::vector<double> point_;
};

std::string format_point(const std::vector<double>& p);

}  // namespace riemap
