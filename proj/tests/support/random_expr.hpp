#pragma once

#include <random>
#include <string>
#include <vector>

#include "riemap/expr.hpp"

namespace riemap::testing {

/// Random bound expression of depth <= max_depth over `vars`.
inline Expr random_expr(std::mt19937_64& rng, const std::vector<std::string>& vars,
                        int max_depth) {
  std::uniform_int_distribution<int> pick(0, 99);
  const int roll = pick(rng);
  if (max_depth <= 1 || roll < 20) {
    if (roll % 2 == 0) {
      std::uniform_real_distribution<double> d(0.1, 3.0);
      // Mix integers and reals so literals print in both styles.
      const double v = roll % 4 == 0 ? std::floor(d(rng) * 3) + 1 : d(rng);
      return make_number(v);
    }
    std::uniform_int_distribution<int> v(0, static_cast<int>(vars.size()) - 1);
    const int k = v(rng);
    return make_variable(vars[k], k);
  }
  if (roll < 30) return make_unary(NodeKind::Neg, random_expr(rng, vars, max_depth - 1));
  if (roll < 70) {
    static constexpr NodeKind kOps[] = {NodeKind::Add, NodeKind::Sub, NodeKind::Mul,
                                        NodeKind::Div};
    const NodeKind op = kOps[pick(rng) % 4];
    return make_binary(op, random_expr(rng, vars, max_depth - 1),
                       random_expr(rng, vars, max_depth - 1));
  }
  if (roll < 80) {
    static constexpr double kExps[] = {2.0, 3.0, 0.5, -1.0, 1.5};
    const double p = kExps[pick(rng) % 5];
    Expr ex = p < 0 ? make_unary(NodeKind::Neg, make_number(-p)) : make_number(p);
    return make_binary(NodeKind::Pow, random_expr(rng, vars, max_depth - 1), ex);
  }
  static constexpr Func kFuncs[] = {Func::Sin,  Func::Cos,  Func::Tan,  Func::Exp,
                                    Func::Log,  Func::Sqrt, Func::Sinh, Func::Cosh,
                                    Func::Tanh, Func::Atan};
  return make_call(kFuncs[pick(rng) % 10], random_expr(rng, vars, max_depth - 1));
}

}  // namespace riemap::testing
