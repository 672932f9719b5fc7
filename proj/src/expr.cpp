#include "riemap/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <functional>

namespace riemap {

namespace {

constexpr std::array<std::string_view, 9> kKeywords = {
    "manifold", "spaceform", "map",       "analysis", "dim",
    "coords",   "metric",    "curvature", "domain"};

bool is_keyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

constexpr std::array<std::pair<std::string_view, Func>, 10> kFuncs = {{
    {"sin", Func::Sin},
    {"cos", Func::Cos},
    {"tan", Func::Tan},
    {"exp", Func::Exp},
    {"log", Func::Log},
    {"sqrt", Func::Sqrt},
    {"sinh", Func::Sinh},
    {"cosh", Func::Cosh},
    {"tanh", Func::Tanh},
    {"atan", Func::Atan},
}};

}  // namespace

const char* func_name(Func f) {
  for (const auto& [name, fn] : kFuncs)
    if (fn == f) return name.data();
  return "?";
}

bool lookup_func(std::string_view name, Func& out) {
  for (const auto& [n, fn] : kFuncs) {
    if (n == name) {
      out = fn;
      return true;
    }
  }
  return false;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.pos = {line, col};
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < text.size() &&
         std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
          j = k;
        }
      }
      tok.kind = TokenKind::Number;
      tok.text = std::string(text.substr(i, j - i));
      tok.number = std::strtod(tok.text.c_str(), nullptr);
      out.push_back(tok);
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      tok.text = std::string(text.substr(i, j - i));
      tok.kind = is_keyword(tok.text) ? TokenKind::Keyword : TokenKind::Ident;
      out.push_back(tok);
      advance(j - i);
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      tok.kind = TokenKind::Symbol;
      tok.text = "->";
      out.push_back(tok);
      advance(2);
      continue;
    }
    static constexpr std::string_view kSymbols = "+-*/^(),[]{}:=";
    if (kSymbols.find(c) != std::string_view::npos) {
      tok.kind = TokenKind::Symbol;
      tok.text = std::string(1, c);
      out.push_back(tok);
      advance(1);
      continue;
    }
    throw LexError(std::string("illegal character '") + c + "'", {line, col});
  }
  Token end;
  end.kind = TokenKind::End;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

Expr make_number(double v, SourcePos pos) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Number;
  n->number = v;
  n->pos = pos;
  return n;
}

Expr make_variable(std::string name, int slot, SourcePos pos) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Variable;
  n->name = std::move(name);
  n->slot = slot;
  n->pos = pos;
  return n;
}

Expr make_unary(NodeKind kind, Expr child, SourcePos pos) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->children = {std::move(child)};
  n->pos = pos;
  return n;
}

Expr make_binary(NodeKind kind, Expr lhs, Expr rhs, SourcePos pos) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->children = {std::move(lhs), std::move(rhs)};
  n->pos = pos;
  if (kind == NodeKind::Pow) {
    if (has_variables(n->children[1]))
      throw ParseError("non-constant exponent", n->children[1]->pos);
    try {
      n->number = eval_ast(n->children[1], std::span<const Jet>{}).value();
    } catch (const SingularityError& e) {
      throw ParseError("exponent does not evaluate: " + e.detail(), n->children[1]->pos);
    }
  }
  return n;
}

Expr make_call(Func f, Expr arg, SourcePos pos) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Call;
  n->func = f;
  n->children = {std::move(arg)};
  n->pos = pos;
  return n;
}

Expr ExprParser::parse() { return additive(); }

Expr ExprParser::additive() {
  Expr lhs = multiplicative();
  while (peek().is_symbol("+") || peek().is_symbol("-")) {
    const Token& op = next();
    Expr rhs = multiplicative();
    lhs = make_binary(op.text == "+" ? NodeKind::Add : NodeKind::Sub, lhs, rhs, op.pos);
  }
  return lhs;
}

Expr ExprParser::multiplicative() {
  Expr lhs = unary();
  while (peek().is_symbol("*") || peek().is_symbol("/")) {
    const Token& op = next();
    Expr rhs = unary();
    lhs = make_binary(op.text == "*" ? NodeKind::Mul : NodeKind::Div, lhs, rhs, op.pos);
  }
  return lhs;
}

Expr ExprParser::unary() {
  if (peek().is_symbol("-")) {
    const Token& op = next();
    return make_unary(NodeKind::Neg, unary(), op.pos);
  }
  if (peek().is_symbol("+")) {
    next();
    return unary();
  }
  return power();
}

Expr ExprParser::power() {
  Expr base = primary();
  if (peek().is_symbol("^")) {
    const Token& op = next();
    return make_binary(NodeKind::Pow, base, exponent(), op.pos);
  }
  return base;
}

// Right operand of ^: a signed power, so 2^-1 and 2^3^2 parse.
Expr ExprParser::exponent() {
  if (peek().is_symbol("-")) {
    const Token& op = next();
    return make_unary(NodeKind::Neg, exponent(), op.pos);
  }
  return power();
}

Expr ExprParser::primary() {
  const Token& t = peek();
  switch (t.kind) {
    case TokenKind::Number:
      next();
      return make_number(t.number, t.pos);
    case TokenKind::Ident: {
      next();
      if (peek().is_symbol("(")) {
        Func f;
        if (!lookup_func(t.text, f)) throw ParseError("unknown function '" + t.text + "'", t.pos);
        next();
        Expr arg = additive();
        if (!peek().is_symbol(")")) throw ParseError("expected ')' to close call", peek().pos);
        next();
        return make_call(f, arg, t.pos);
      }
      Func f;
      if (lookup_func(t.text, f))
        throw ParseError("function '" + t.text + "' requires parentheses", t.pos);
      return make_variable(t.text, -1, t.pos);
    }
    case TokenKind::Symbol:
      if (t.text == "(") {
        next();
        Expr inner = additive();
        if (!peek().is_symbol(")")) throw ParseError("unbalanced parentheses", peek().pos);
        next();
        return inner;
      }
      throw ParseError("unexpected token '" + t.text + "'", t.pos);
    case TokenKind::Keyword:
      throw ParseError("unexpected keyword '" + t.text + "'", t.pos);
    case TokenKind::End:
      throw ParseError("unexpected end of input", t.pos);
  }
  throw ParseError("unexpected token", t.pos);
}

Expr parse_expression(std::span<const Token> tokens) {
  ExprParser p(tokens);
  Expr e = p.parse();
  const Token& rest = tokens[p.position()];
  if (rest.kind != TokenKind::End) {
    if (rest.is_symbol(")")) throw ParseError("unbalanced parentheses", rest.pos);
    throw ParseError("unexpected token '" + rest.text + "'", rest.pos);
  }
  return e;
}

Expr parse_expression(std::string_view text) {
  const auto tokens = tokenize(text);
  return parse_expression(tokens);
}

namespace {

int precedence(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest spelling that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    char shortbuf[40];
    std::snprintf(shortbuf, sizeof shortbuf, "%.*g", prec, v);
    if (std::strtod(shortbuf, nullptr) == v) return shortbuf;
  }
  return buf;
}

void print(const ExprNode& n, std::string& out);

void print_child(const ExprNode& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print(child, out);
  if (parens) out += ')';
}

void print(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Number:
      out += format_number(n.number);
      return;
    case NodeKind::Variable:
      out += n.name;
      return;
    case NodeKind::Neg:
      out += '-';
      print_child(*n.children[0], precedence(*n.children[0]) < 3, out);
      return;
    case NodeKind::Call:
      out += func_name(n.func);
      out += '(';
      print(*n.children[0], out);
      out += ')';
      return;
    case NodeKind::Pow: {
      print_child(*n.children[0], precedence(*n.children[0]) < 5, out);
      out += '^';
      print_child(*n.children[1], precedence(*n.children[1]) < 3, out);
      return;
    }
    default: {
      const int p = precedence(n);
      const char* op = n.kind == NodeKind::Add   ? " + "
                       : n.kind == NodeKind::Sub ? " - "
                       : n.kind == NodeKind::Mul ? "*"
                                                 : "/";
      print_child(*n.children[0], precedence(*n.children[0]) < p, out);
      out += op;
      print_child(*n.children[1], precedence(*n.children[1]) <= p, out);
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(*e, out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a->kind != b->kind || a->children.size() != b->children.size()) return false;
  switch (a->kind) {
    case NodeKind::Number:
      if (a->number != b->number) return false;
      break;
    case NodeKind::Variable:
      if (a->name != b->name) return false;
      break;
    case NodeKind::Call:
      if (a->func != b->func) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!structurally_equal(a->children[i], b->children[i])) return false;
  return true;
}

void collect_variables(const Expr& e, std::vector<std::string>& out) {
  if (e->kind == NodeKind::Variable) {
    if (std::find(out.begin(), out.end(), e->name) == out.end()) out.push_back(e->name);
    return;
  }
  for (const Expr& c : e->children) collect_variables(c, out);
}

bool has_variables(const Expr& e) {
  if (e->kind == NodeKind::Variable) return true;
  return std::any_of(e->children.begin(), e->children.end(),
                     [](const Expr& c) { return has_variables(c); });
}

Expr bind_coords(const Expr& e, std::span<const std::string> coords, const std::string& context) {
  if (e->kind == NodeKind::Variable) {
    auto it = std::find(coords.begin(), coords.end(), e->name);
    if (it == coords.end())
      throw Error(ErrorKind::UnknownIdentifier,
                  "unknown identifier '" + e->name + "' in " + context + " at line " +
                      std::to_string(e->pos.line) + ", column " +
                      std::to_string(e->pos.column));
    return make_variable(e->name, static_cast<int>(it - coords.begin()), e->pos);
  }
  if (e->children.empty()) return e;
  auto n = std::make_shared<ExprNode>(*e);
  for (Expr& c : n->children) c = bind_coords(c, coords, context);
  return n;
}

Expr substitute(const Expr& e, std::span<const Expr> replacements) {
  if (e->kind == NodeKind::Variable) {
    if (e->slot < 0 || e->slot >= static_cast<int>(replacements.size()))
      throw Error(ErrorKind::Configuration, "substitution of an unbound variable '" + e->name + "'");
    return replacements[e->slot];
  }
  if (e->children.empty()) return e;
  auto n = std::make_shared<ExprNode>(*e);
  for (Expr& c : n->children) c = substitute(c, replacements);
  return n;
}

namespace {

template <class Lookup>
Jet eval_impl(const ExprNode& n, const Lookup& lookup, int num_vars, int order) {
  try {
    switch (n.kind) {
      case NodeKind::Number:
        return Jet::constant(n.number, num_vars, order);
      case NodeKind::Variable:
        return lookup(n);
      case NodeKind::Neg:
        return -eval_impl(*n.children[0], lookup, num_vars, order);
      case NodeKind::Add:
        return eval_impl(*n.children[0], lookup, num_vars, order) +
               eval_impl(*n.children[1], lookup, num_vars, order);
      case NodeKind::Sub:
        return eval_impl(*n.children[0], lookup, num_vars, order) -
               eval_impl(*n.children[1], lookup, num_vars, order);
      case NodeKind::Mul:
        return eval_impl(*n.children[0], lookup, num_vars, order) *
               eval_impl(*n.children[1], lookup, num_vars, order);
      case NodeKind::Div:
        return eval_impl(*n.children[0], lookup, num_vars, order) /
               eval_impl(*n.children[1], lookup, num_vars, order);
      case NodeKind::Pow:
        return pow(eval_impl(*n.children[0], lookup, num_vars, order), n.number);
      case NodeKind::Call: {
        const Jet a = eval_impl(*n.children[0], lookup, num_vars, order);
        switch (n.func) {
          case Func::Sin: return sin(a);
          case Func::Cos: return cos(a);
          case Func::Tan: return tan(a);
          case Func::Exp: return exp(a);
          case Func::Log: return log(a);
          case Func::Sqrt: return sqrt(a);
          case Func::Sinh: return sinh(a);
          case Func::Cosh: return cosh(a);
          case Func::Tanh: return tanh(a);
          case Func::Atan: return atan(a);
        }
      }
    }
  } catch (const SingularityError& e) {
    throw e.with_pos(n.pos);
  }
  throw Error(ErrorKind::Configuration, "corrupt expression node");
}

}  // namespace

Jet eval_ast(const Expr& e, std::span<const Jet> values) {
  const int num_vars = values.empty() ? 0 : values[0].num_vars();
  int order = values.empty() ? 0 : kMaxJetOrder;
  for (const Jet& v : values) order = std::min(order, v.order());
  auto lookup = [&](const ExprNode& n) -> Jet {
    if (n.slot < 0 || n.slot >= static_cast<int>(values.size()))
      throw Error(ErrorKind::UnknownIdentifier, "unbound variable '" + n.name + "'");
    return values[n.slot];
  };
  return eval_impl(*e, lookup, num_vars, order);
}

Jet eval_ast(const Expr& e, const std::map<std::string, Jet>& env) {
  const int num_vars = env.empty() ? 0 : env.begin()->second.num_vars();
  int order = env.empty() ? 0 : kMaxJetOrder;
  for (const auto& [name, v] : env) order = std::min(order, v.order());
  auto lookup = [&](const ExprNode& n) -> Jet {
    auto it = env.find(n.name);
    if (it == env.end())
      throw Error(ErrorKind::UnknownIdentifier, "unbound variable '" + n.name + "'");
    return it->second;
  };
  return eval_impl(*e, lookup, num_vars, order);
}

}  // namespace riemap
