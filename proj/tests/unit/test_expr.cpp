#include <doctest.h>

#include <cmath>
#include <string>

#include "quizforge/expr.hpp"

using namespace quizforge;
using namespace quizforge::expr;

namespace {

Value run(const std::string& src, const Environment& env = {}, std::uint64_t seed = 42) {
  RngStream rng = derive_stream(seed, 0);
  return eval(*parse_expr(src), env, rng);
}

double num(const std::string& src, const Environment& env = {}) { return run(src, env).as_number(); }

}  // namespace

TEST_CASE("parse_expr builds the expected trees") {
  CHECK(to_sexpr(*parse_expr("50 + sample(0:50, 1)")) == "(+ 50 (sample (: 0 50) 1))");
  CHECK(to_sexpr(*parse_expr("1")) == "1");
  CHECK(to_sexpr(*parse_expr("round(runif(1, 90, 110), 1)")) == "(round (runif 1 90 110) 1)");
  CHECK(to_sexpr(*parse_expr("-2^2")) == "(- (^ 2 2))");
  CHECK(to_sexpr(*parse_expr("a < b && !c")) == "(&& (< a b) (! c))");
}

TEST_CASE("syntax errors carry a position") {
  try {
    parse_expr("1 +\n  * 2");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
  }
  CHECK_THROWS_AS(parse_expr("f(1, "), SyntaxError);
  CHECK_THROWS_AS(parse_expr("x <- 3"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("function(x) x"), SyntaxError);
}

TEST_CASE("arithmetic, vectors and indexing") {
  CHECK(num("mean(c(1,2,3))") == 2);
  CHECK(num("2^10 - 1") == 1023);
  CHECK(num("-2^2") == -4);
  CHECK(num("7 %% 3") == 1);
  CHECK(num("sum(1:10)") == 55);
  CHECK(num("c(5, 6, 7)[2]") == 6);
  CHECK(run("c(5, 6, 7)[-2]").as_numbers() == NumVec{5, 7});
  CHECK(run("c(1, 2) * c(3, 4)").as_numbers() == NumVec{3, 8});
  CHECK(run("1:3 + 1").as_numbers() == NumVec{2, 3, 4});
  CHECK(num("if (3 > 2) 10 else 20") == 10);
  CHECK(num("length(seq(0, 1, by = 0.25))") == 5);
  CHECK(run("rep(c(1, 2), times = 2)").as_numbers() == NumVec{1, 2, 1, 2});
  CHECK(run("rep(c(1, 2), each = 2)").as_numbers() == NumVec{1, 1, 2, 2});
  CHECK(run("which(c(0, 3, 0, 1) > 0)").as_numbers() == NumVec{2, 4});
  CHECK(run("sort(c(3, 1, 2), decreasing = TRUE)").as_numbers() == NumVec{3, 2, 1});
  CHECK(run("paste0(\"a\", 1:2)").as_texts() == TextVec{"a1", "a2"});
  CHECK(run("paste(\"x\", \"y\", sep = \"-\")").as_text() == "x-y");
  CHECK(run("format(3.1, nsmall = 2)").as_text() == "3.10");
  CHECK(num("round(2.675, 2)") == 2.68);
  CHECK(num("signif(123456, 2)") == 120000);
  CHECK(run("3 %in% c(1, 3)").as_bool());
  CHECK(num("factorial(5) + choose(5, 2)") == 130);
}

TEST_CASE("environment lookups and tables") {
  const Environment env{{"x", Value(NumVec{4, 8, 15, 16, 23, 42})}};
  CHECK(num("median(x)", env) == 15.5);
  CHECK(run("fivenum(x)", env).as_numbers() == NumVec{4, 8, 15.5, 23, 42});
  CHECK(run("quantile(x, 0.25)", env).as_number() == doctest::Approx(9.75));
  const Environment cls{{"g", Value(TextVec{"a", "b", "a", "a"})}};
  const Value t = run("table(g)", cls);
  CHECK(t.as_numbers() == NumVec{3, 1});
  CHECK(num("sum(g == \"a\")", cls) == 3);
  CHECK(num("data.frame(u = 1:3, v = c(\"p\", \"q\", \"r\"))$u[3]") == 3);
}

TEST_CASE("integrate matches closed forms") {
  CHECK(num("round(integrate(x*exp(x), 0.5, 1.5), 2)") == doctest::Approx(3.07));
  CHECK(num("integrate(x^2, 0, 3)") == doctest::Approx(9.0).epsilon(1e-10));
  CHECK(num("integrate(sin(t), 0, pi, var = \"t\")") == doctest::Approx(2.0).epsilon(1e-10));
  const Environment env{{"k", Value(3.0)}};
  CHECK(num("integrate(k * x, 0, 2)", env) == doctest::Approx(6.0));
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(run("undefined_name + 1"), EvalError);
  CHECK_THROWS_AS(run("rnorm(5, 0, -1)"), EvalError);
  CHECK_THROWS_AS(run("runif(-1)"), EvalError);
  CHECK_THROWS_AS(run("rbinom(1, 10, 1.5)"), EvalError);
  CHECK_THROWS_AS(run("rbinom(1e7, 1e7, 0.5)"), EvalError);
  CHECK_THROWS_AS(run("sum(rnorm(1e7)) + sum(rnorm(1e7)) + sum(runif(1e7)) + sum(rexp(1e7)) + sum(rnorm(1e7)) + sum(rnorm(1e7)) + sum(rnorm(1e7)) + sum(rnorm(1e7)) + sum(rnorm(1e7)) + sum(rnorm(1e7)) + sum(rnorm(1e7))"), EvalError);
  CHECK_THROWS_AS(run("1 / 0"), EvalError);
  CHECK_THROWS_AS(run("mean()"), EvalError);
  CHECK_THROWS_AS(run("c(1, 2)[5]"), EvalError);
  CHECK_THROWS_AS(run("sample(3, 5)"), EvalError);
  CHECK_THROWS_AS(run("integrate(1 / x, -1, 1)"), EvalError);
}

TEST_CASE("random draws are deterministic and in range") {
  CHECK(run("rnorm(5, 10, 2)") == run("rnorm(5, 10, 2)"));
  CHECK_FALSE(run("rnorm(5, 10, 2)", {}, 1) == run("rnorm(5, 10, 2)", {}, 2));
  const double k = num("rbinom(1, 300, 0.55)");
  CHECK(k >= 0);
  CHECK(k <= 300);
  CHECK(k == std::floor(k));
  for (double v : run("sample(0:50, 20, replace = TRUE)").as_numbers()) {
    CHECK(v >= 0);
    CHECK(v <= 50);
  }
  const NumVec perm = run("sample(10)").as_numbers();
  NumVec sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == run("1:10").as_numbers());
}

TEST_CASE("distribution sanity over fixed seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const double n = 10000;
    const double m_norm = run("mean(rnorm(10000, 5, 2))", {}, seed).as_number();
    CHECK(std::fabs(m_norm - 5) <= 4 * 2 / std::sqrt(n));
    const double m_unif = run("mean(runif(10000, 2, 8))", {}, seed).as_number();
    CHECK(std::fabs(m_unif - 5) <= 4 * 6 / std::sqrt(12 * n));
    const double m_binom = run("mean(rbinom(10000, 20, 0.3))", {}, seed).as_number();
    CHECK(std::fabs(m_binom - 6) <= 4 * std::sqrt(20 * 0.3 * 0.7) / std::sqrt(n));
  }
}

TEST_CASE("round is idempotent") {
  RngStream rng = derive_stream(3, 3);
  for (int i = 0; i < 500; ++i) {
    const Environment env{{"v", Value(rng.next_uniform() * 2000 - 1000)}, {"d", Value(double(i % 5))}};
    CHECK(num("round(round(v, d), d) == round(v, d)", env) == 1);
  }
}

TEST_CASE("analyze reports free identifiers and unknown functions") {
  const Analysis a = analyze(*parse_expr("mean(x) + foo(y, integrate(t * z, 0, 1, var = \"t\"))"));
  CHECK(a.free_identifiers == std::set<std::string>{"x", "y", "z"});
  CHECK(a.unknown_functions == std::set<std::string>{"foo"});
  CHECK(is_builtin("rnorm"));
  CHECK_FALSE(is_builtin("system"));
}
