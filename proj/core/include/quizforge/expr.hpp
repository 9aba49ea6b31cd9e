#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "quizforge/datatable.hpp"
#include "quizforge/rng.hpp"

// A small R-lookalike expression language for template variables: numbers,
// strings, vectors, `a:b` ranges, `c(...)`, calls with named arguments,
// `if (c) a else b`, indexing and `$` column access. There is no
// assignment; templates bind variables one expression at a time.
namespace quizforge::expr {

class Value {
 public:
  enum class Type { Number, Text, Bool, NumVec, TextVec, Table };
  using Storage = std::variant<double, std::string, bool, NumVec, TextVec, DataTable>;

  Value() : data_(0.0) {}
  Value(double x);
  Value(std::string s) : data_(std::move(s)) {}
  Value(const char* s) : data_(std::string(s)) {}
  Value(bool b) : data_(b) {}
  Value(NumVec v);
  Value(TextVec v) : data_(std::move(v)) {}
  Value(DataTable t);

  Type type() const { return static_cast<Type>(data_.index()); }
  const Storage& storage() const { return data_; }

  bool is_numeric() const;  // number, bool or numeric vector
  bool is_text() const;     // text or text vector
  std::size_t length() const;

  // Conversions raise EvalError naming `what` when the value does not fit.
  double as_number(std::string_view what = "value") const;
  NumVec as_numbers(std::string_view what = "value") const;
  std::string as_text(std::string_view what = "value") const;
  TextVec as_texts(std::string_view what = "value") const;
  bool as_bool(std::string_view what = "value") const;
  const DataTable& as_table(std::string_view what = "value") const;

  bool operator==(const Value&) const = default;

 private:
  Storage data_;
};

// Plain-text rendering: numbers via format_number, vectors joined by ", ".
std::string format_value(const Value& v);

struct Node;
using ExprPtr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { Number, String, Bool, Identifier, Unary, Binary, Call, Index, Member, Conditional };
  Kind kind = Kind::Number;
  double number = 0;
  std::string text;                  // identifier, string literal, operator or callee
  std::vector<ExprPtr> children;
  std::vector<std::string> arg_names;  // per call argument; empty string when positional
  std::size_t line = 1;
  std::size_t column = 1;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExprPtr parse_expr(std::string_view source);

// S-expression dump used in tests and diagnostics, e.g.
// "(+ 50 (sample (: 0 50) 1))".
std::string to_sexpr(const Node& node);

using Environment = std::map<std::string, Value, std::less<>>;

Value eval(const Node& node, const Environment& env, RngStream& rng);

struct Analysis {
  std::set<std::string> free_identifiers;   // referenced variables
  std::set<std::string> unknown_functions;  // calls to names that are not built in
};

Analysis analyze(const Node& node);

bool is_builtin(std::string_view name);
std::vector<std::string> builtin_names();

// Adaptive Simpson quadrature to an absolute tolerance, recursion depth
// capped at `max_depth`; throws EvalError when it does not converge.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-8, int max_depth = 50);

}  // namespace quizforge::expr

#include "quizforge/detail/simpson.hpp"
