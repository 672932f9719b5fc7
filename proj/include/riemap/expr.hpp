#pragma once

// Scalar expression language: tokens, AST, parser, printer and jet
// evaluator.

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riemap/errors.hpp"
#include "riemap/jet.hpp"

namespace riemap {

enum class TokenKind { Number, Ident, Keyword, Symbol, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // identifier, keyword or symbol spelling
  double number = 0.0;
  SourcePos pos;

  bool is_symbol(std::string_view s) const {
    return kind == TokenKind::Symbol && text == s;
  }
  bool is_keyword(std::string_view s) const {
    return kind == TokenKind::Keyword && text == s;
  }
};

/// Splits text into tokens. Whitespace and #-comments are skipped; the
/// final token is always End.
std::vector<Token> tokenize(std::string_view text);

enum class NodeKind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh, Atan };

const char* func_name(Func f);
bool lookup_func(std::string_view name, Func& out);

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind = NodeKind::Number;
  double number = 0.0;  // literal value, or the folded exponent of Pow
  std::string name;     // variable name
  int slot = -1;        // variable slot after bind_coords()
  Func func = Func::Sin;
  std::vector<Expr> children;
  SourcePos pos;
};

Expr make_number(double v, SourcePos pos = {});
Expr make_variable(std::string name, int slot = -1, SourcePos pos = {});
Expr make_unary(NodeKind kind, Expr child, SourcePos pos = {});
Expr make_binary(NodeKind kind, Expr lhs, Expr rhs, SourcePos pos = {});
Expr make_call(Func f, Expr arg, SourcePos pos = {});

/// Recursive-descent parser over a token vector. Precedence, loosest
/// first: + -, * /, unary -, ^ (right-associative, constant exponent).
class ExprParser {
 public:
  explicit ExprParser(std::span<const Token> tokens, std::size_t start = 0)
      : tokens_(tokens), at_(start) {}

  Expr parse();
  std::size_t position() const { return at_; }

 private:
  const Token& peek() const { return tokens_[at_]; }
  const Token& next() { return tokens_[at_++]; }
  Expr additive();
  Expr multiplicative();
  Expr unary();
  Expr power();
  Expr exponent();
  Expr primary();

  std::span<const Token> tokens_;
  std::size_t at_;
};

/// Parses a whole token stream as one expression.
Expr parse_expression(std::span<const Token> tokens);
Expr parse_expression(std::string_view text);

/// Prints with the minimal parentheses that re-parse to the same tree.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);
void collect_variables(const Expr& e, std::vector<std::string>& out);
bool has_variables(const Expr& e);

/// Resolves variable names to slots in `coords`; unknown names raise an
/// UnknownIdentifier error naming `context`.
Expr bind_coords(const Expr& e, std::span<const std::string> coords,
          const std::string& context);

/// Replaces every variable slot k by replacements[k].
Expr substitute(const Expr& e, std::span<const Expr> replacements);

/// Evaluates a bound expression with slot k taking values[k].
Jet eval_ast(const Expr& e, std::span<const Jet> values);
/// Evaluates by variable name, for unbound trees.
Jet eval_ast(const Expr& e, const std::map<std::string, Jet>& env);

}  // namespace riemap
