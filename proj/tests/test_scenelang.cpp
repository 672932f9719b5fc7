#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "riemap/expr.hpp"
#include "riemap/scene.hpp"
#include "support/plain_eval.hpp"
#include "support/random_expr.hpp"

using namespace riemap;

namespace {

template <class Fn>
ErrorKind error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Usage;
}

Expr bound(const std::string& text, std::vector<std::string> vars) {
  return bind_coords(parse_expression(text), vars, "test");
}

}  // namespace

TEST_CASE("tokenize") {
  const auto t = tokenize("2*x + sin(y)");
  REQUIRE(t.size() == 9);
  CHECK(t[0].kind == TokenKind::Number);
  CHECK(t[0].number == 2.0);
  CHECK(t[1].is_symbol("*"));
  CHECK(t[2].kind == TokenKind::Ident);
  CHECK(t[2].text == "x");
  CHECK(t[3].is_symbol("+"));
  CHECK(t[4].text == "sin");
  CHECK(t[5].is_symbol("("));
  CHECK(t[6].text == "y");
  CHECK(t[7].is_symbol(")"));
  CHECK(t[8].kind == TokenKind::End);

  const auto s = tokenize("1e-3");
  CHECK(s[0].number == 0.001);
  CHECK(s.size() == 2);

  try {
    tokenize("x @ y");
    FAIL("expected a lex error");
  } catch (const LexError& e) {
    CHECK(e.pos().line == 1);
    CHECK(e.pos().column == 3);
  }

  const auto c = tokenize("a # comment\n -> b");
  CHECK(c[1].is_symbol("->"));
  CHECK(c[1].pos.line == 2);
}

TEST_CASE("parser precedence and associativity") {
  CHECK(structurally_equal(parse_expression("a + b * c"),
                           make_binary(NodeKind::Add, make_variable("a"),
                                       make_binary(NodeKind::Mul, make_variable("b"),
                                                   make_variable("c")))));
  CHECK(structurally_equal(
      parse_expression("-x^2"),
      make_unary(NodeKind::Neg, make_binary(NodeKind::Pow, make_variable("x"), make_number(2)))));
  CHECK(eval_ast(parse_expression("2^3^2"), std::span<const Jet>{}).value() == 512.0);
  CHECK(eval_ast(parse_expression("8 / 4 / 2"), std::span<const Jet>{}).value() == 1.0);
  CHECK(eval_ast(parse_expression("8 - 4 - 2"), std::span<const Jet>{}).value() == 2.0);
  CHECK(eval_ast(parse_expression("2^-1"), std::span<const Jet>{}).value() == 0.5);
  CHECK(eval_ast(parse_expression("-2^2"), std::span<const Jet>{}).value() == -4.0);
}

TEST_CASE("parse errors") {
  CHECK(error_kind([] { parse_expression("a +"); }) == ErrorKind::Parse);
  CHECK(error_kind([] { parse_expression("(a + b"); }) == ErrorKind::Parse);
  CHECK(error_kind([] { parse_expression("a + b)"); }) == ErrorKind::Parse);
  CHECK(error_kind([] { parse_expression("foo(x)"); }) == ErrorKind::Parse);
  CHECK(error_kind([] { parse_expression("x^y"); }) == ErrorKind::Parse);
  CHECK(error_kind([] { parse_expression("sin x"); }) == ErrorKind::Parse);
  try {
    parse_expression("2 + x^(y+1)");
  } catch (const ParseError& e) {
    CHECK(e.pos().column == 9);  // the exponent operator
  }
}

TEST_CASE("eval_ast examples") {
  std::map<std::string, Jet> env{{"x", lift_variable(2.0, 0, 2, 2)},
                                 {"y", lift_variable(3.0, 1, 2, 2)}};
  const Jet p = eval_ast(parse_expression("x*y"), env);
  CHECK(p.value() == 6.0);
  CHECK(p.partial(multi_index({1, 0})) == 3.0);
  CHECK(p.partial(multi_index({0, 1})) == 2.0);

  const Jet x = lift_variable(0.83, 0, 1, 4);
  const Jet one = eval_ast(bound("sin(x)^2 + cos(x)^2", {"x"}), std::span(&x, 1));
  CHECK(one.value() == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t r = 1; r < one.coeffs().size(); ++r) CHECK(std::abs(one.coeffs()[r]) < 1e-14);

  const Jet at_pole = lift_variable(1.0, 0, 1, 2);
  try {
    eval_ast(bound("1/(1 - x)", {"x"}), std::span(&at_pole, 1));
    FAIL("expected a singularity");
  } catch (const SingularityError& e) {
    CHECK(e.pos().line == 1);
    CHECK(e.pos().column == 2);  // the '/'
  }
}

TEST_CASE("random expressions: round trip, plain evaluation, finite differences") {
  std::mt19937_64 rng(99);
  const std::vector<std::string> vars = {"x", "y", "z"};
  int roundtrips = 0, plain = 0, fd = 0;
  for (int trial = 0; trial < 2000 && (roundtrips < 500 || plain < 500 || fd < 300); ++trial) {
    const Expr e = testing::random_expr(rng, vars, 6);
    // Round trip through the printer.
    const Expr again = bind_coords(parse_expression(to_string(e)), vars, "roundtrip");
    REQUIRE_MESSAGE(structurally_equal(e, again), to_string(e));
    ++roundtrips;

    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const std::vector<double> p = {d(rng), d(rng), d(rng)};
    testing::PlainEval ref{p};
    double expect;
    try {
      expect = ref(*e);
    } catch (const std::domain_error&) {
      continue;
    }
    if (!std::isfinite(expect) || ref.max_magnitude > 1e6) continue;
    std::vector<Jet> j0;
    for (int k = 0; k < 3; ++k) j0.push_back(Jet::constant(p[k], 3, 0));
    const double got = eval_ast(e, j0).value();
    CHECK_MESSAGE(std::abs(got - expect) <= 1e-15 * std::max(std::abs(expect), ref.max_magnitude) * 4,
                  to_string(e));
    ++plain;

    // First partials against central differences (step 1e-4). Skip badly
    // conditioned samples whose third derivatives would swamp the step.
    std::vector<Jet> j3;
    for (int k = 0; k < 3; ++k) j3.push_back(lift_variable(p[k], k, 3, 3));
    const Jet jet = eval_ast(e, j3);
    double third = 0.0;
    for (int k = 0; k < 3; ++k) {
      MultiIndex a{};
      a[k] = 3;
      third = std::max(third, std::abs(jet.partial(a)));
    }
    if (third > 1e3) continue;
    bool ok = true;
    for (int k = 0; k < 3 && ok; ++k) {
      const double h = 1e-4;
      std::vector<double> pp = p, pm = p;
      pp[k] += h;
      pm[k] -= h;
      double fp, fm;
      try {
        fp = testing::plain_eval(e, pp);
        fm = testing::plain_eval(e, pm);
      } catch (const std::domain_error&) {
        ok = false;
        break;
      }
      const double fdv = (fp - fm) / (2 * h);
      MultiIndex a{};
      a[k] = 1;
      const double jv = jet.partial(a);
      CHECK_MESSAGE(std::abs(jv - fdv) <= 1e-6 * std::max(1.0, std::abs(jv)), to_string(e));
    }
    if (ok) ++fd;
  }
  CHECK(roundtrips >= 500);
  CHECK(plain >= 500);
  CHECK(fd >= 300);
}

TEST_CASE("load_scene: minimal Euclidean declaration") {
  const Scene s = parse_scene("manifold E2 { dim 2 coords x y metric [[1,0],[0,1]] }");
  REQUIRE(s.manifolds.size() == 1);
  const auto& m = *s.manifolds[0];
  CHECK(m.dim == 2);
  CHECK(m.coords == std::vector<std::string>{"x", "y"});
  CHECK(m.domain[0].lo == -1.0);
  CHECK(m.domain[1].hi == 1.0);
  CHECK_FALSE(m.curvature.has_value());
}

TEST_CASE("load_scene: full grammar") {
  const Scene s = parse_scene(R"(
    # a circle of radius 2
    manifold R1 { dim 1 coords t metric [[1]] domain [-3, 3] }
    manifold E2 { dim 2 coords u v metric [[1, 0], [0, 1]] domain [-5,5] x [-5,5] }
    map circle : R1 -> E2 {
      u = 2*cos(t/2)
      v = 2*sin(t/2)
    }
    analysis { jet_order 4 samples 10 seed 7 tol_rank 1e-7 tol_residual 1e-9 }
  )",
                              "circle");
  REQUIRE(s.maps.size() == 1);
  CHECK(s.maps[0].source->name == "R1");
  CHECK(s.maps[0].target->name == "E2");
  CHECK(s.analysis.samples == 10);
  CHECK(s.analysis.seed == 7);
  CHECK(s.analysis.tol_residual == 1e-9);
  CHECK(s.manifolds[1]->domain[1].lo == -5.0);

  // Printing and re-parsing preserves the scene.
  const Scene again = parse_scene(to_scene_text(s));
  CHECK(to_scene_text(again) == to_scene_text(s));
}

TEST_CASE("load_scene error classes") {
  CHECK(error_kind([] {
          parse_scene(R"(manifold A { dim 2 coords x y metric [[1,0],[0,1]] }
                         manifold B { dim 2 coords u v metric [[1,0],[0,1]] }
                         map f : A -> B { u = x v = y w = x })");
        }) == ErrorKind::DimensionMismatch);
  CHECK(error_kind([] {
          parse_scene("manifold A { dim 2 coords x y metric [[1,x],[0,1]] }");
        }) == ErrorKind::AsymmetricMetric);
  CHECK(error_kind([] {
          parse_scene("manifold A { dim 2 coords x y metric [[1,0],[0,1 + q]] }");
        }) == ErrorKind::UnknownIdentifier);
  CHECK(error_kind([] {
          parse_scene(R"(manifold A { dim 1 coords x metric [[1]] }
                         map f : A -> Nowhere { y = x })");
        }) == ErrorKind::UnknownIdentifier);
  CHECK(error_kind([] {
          parse_scene(R"(manifold A { dim 1 coords x metric [[1]] }
                         manifold B { dim 1 coords y metric [[1]] }
                         map f : A -> B { y = z })");
        }) == ErrorKind::UnknownIdentifier);
  CHECK(error_kind([] { parse_scene("manifold A { dim 2 coords x metric [[1]] }"); }) ==
        ErrorKind::DimensionMismatch);
  CHECK(error_kind([] { parse_scene("manifold A { dim 1 coords x metric [[1]] } junk"); }) ==
        ErrorKind::Parse);
  CHECK(error_kind([] { parse_scene("manifold A { dim 1 coords x metric [[1 @]] }"); }) ==
        ErrorKind::Lex);
  // Textually different but numerically equal entries are accepted.
  CHECK_NOTHROW(parse_scene("manifold A { dim 2 coords x y metric [[2, x*y],[y*x, 2]] }"));
}

TEST_CASE("spaceform declaration materializes the conformal model") {
  const Scene s = parse_scene("spaceform S { dim 2 curvature 1 }");
  const auto& m = *s.manifolds[0];
  REQUIRE(m.curvature.has_value());
  CHECK(*m.curvature == 1.0);
  CHECK(m.coords == std::vector<std::string>{"x1", "x2"});
  const std::vector<Jet> p = {Jet::constant(0.3, 2, 0), Jet::constant(-0.4, 2, 0)};
  const double denom = 1.0 + 0.25 * (0.09 + 0.16);
  CHECK(eval_ast(m.metric[0][0], p).value() == doctest::Approx(1.0 / (denom * denom)));
  CHECK(eval_ast(m.metric[0][1], p).value() == 0.0);

  const Scene h = parse_scene("spaceform H { dim 3 curvature -1 }");
  const auto& hm = *h.manifolds[0];
  double r2 = 0.0;
  for (const auto& iv : hm.domain) r2 += iv.hi * iv.hi;
  CHECK(r2 < 4.0);
  CHECK(error_kind([] {
          parse_scene("spaceform H { dim 2 curvature -1 domain [-2,2] x [-2,2] }");
        }) == ErrorKind::Scene);
}

TEST_CASE("scene digest is stable") {
  CHECK(scene_digest("") == "cbf29ce484222325");
  CHECK(scene_digest("abc") == scene_digest("abc"));
  CHECK(scene_digest("abc") != scene_digest("abd"));
}
