#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "quizforge/expr.hpp"
#include "quizforge/htmlgen.hpp"
#include "quizforge/numfmt.hpp"
#include "quizforge/stats.hpp"

namespace quizforge::expr {
namespace {

constexpr std::size_t kMaxVectorLength = 10'000'000;
constexpr double kMaxRandomWork = 100'000'000;  // per evaluation context
constexpr int kMaxEvalDepth = 400;
constexpr double kIntegrateTolerance = 1e-8;
constexpr int kIntegrateMaxDepth = 50;

void check_finite(double x) {
  if (!std::isfinite(x)) throw EvalError("computation produced a non-finite number (division by zero or overflow?)");
}

std::string type_name(Value::Type t) {
  switch (t) {
    case Value::Type::Number:
      return "number";
    case Value::Type::Text:
      return "text";
    case Value::Type::Bool:
      return "logical";
    case Value::Type::NumVec:
      return "numeric vector";
    case Value::Type::TextVec:
      return "text vector";
    case Value::Type::Table:
      return "table";
  }
  return "value";
}

[[noreturn]] void type_error(std::string_view what, const Value& v, std::string_view wanted) {
  throw EvalError(std::string(what) + ": expected " + std::string(wanted) + ", got " + type_name(v.type()));
}

Value vec_result(NumVec v) {
  if (v.size() == 1) return Value(v.front());
  return Value(std::move(v));
}

Value text_result(TextVec v) {
  if (v.size() == 1) return Value(std::move(v.front()));
  return Value(std::move(v));
}

Value column_value(const Column& c) {
  if (const auto* n = std::get_if<NumVec>(&c.values)) return vec_result(*n);
  return text_result(std::get<TextVec>(c.values));
}

}  // namespace

// ---------------------------------------------------------------- Value

Value::Value(double x) : data_(x) { check_finite(x); }

Value::Value(NumVec v) {
  for (double x : v) check_finite(x);
  data_ = std::move(v);
}

Value::Value(DataTable t) {
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw EvalError(e.what());
  }
  for (const Column& c : t.columns) {
    if (const auto* n = std::get_if<NumVec>(&c.values)) {
      for (double x : *n) check_finite(x);
    }
  }
  data_ = std::move(t);
}

bool Value::is_numeric() const {
  return std::holds_alternative<double>(data_) || std::holds_alternative<bool>(data_) ||
         std::holds_alternative<NumVec>(data_);
}

bool Value::is_text() const {
  return std::holds_alternative<std::string>(data_) || std::holds_alternative<TextVec>(data_);
}

std::size_t Value::length() const {
  switch (type()) {
    case Type::Number:
    case Type::Text:
    case Type::Bool:
      return 1;
    case Type::NumVec:
      return std::get<NumVec>(data_).size();
    case Type::TextVec:
      return std::get<TextVec>(data_).size();
    case Type::Table:
      return std::get<DataTable>(data_).columns.size();
  }
  return 0;
}

double Value::as_number(std::string_view what) const {
  if (const auto* d = std::get_if<double>(&data_)) return *d;
  if (const auto* b = std::get_if<bool>(&data_)) return *b ? 1.0 : 0.0;
  if (const auto* v = std::get_if<NumVec>(&data_)) {
    if (v->size() == 1) return v->front();
    throw EvalError(std::string(what) + ": expected a single number, got a vector of length " +
                    std::to_string(v->size()));
  }
  if (const auto* t = std::get_if<DataTable>(&data_)) {
    if (t->columns.size() == 1 && t->nrows() == 1 && t->columns[0].is_numeric()) {
      return std::get<NumVec>(t->columns[0].values).front();
    }
  }
  type_error(what, *this, "a number");
}

NumVec Value::as_numbers(std::string_view what) const {
  if (const auto* d = std::get_if<double>(&data_)) return {*d};
  if (const auto* b = std::get_if<bool>(&data_)) return {*b ? 1.0 : 0.0};
  if (const auto* v = std::get_if<NumVec>(&data_)) return *v;
  if (const auto* t = std::get_if<DataTable>(&data_)) {
    // A one-way table behaves like R's named count vector.
    NumVec out;
    for (const Column& c : t->columns) {
      const auto* n = std::get_if<NumVec>(&c.values);
      if (!n || n->size() != 1) type_error(what, *this, "numbers");
      out.push_back(n->front());
    }
    return out;
  }
  type_error(what, *this, "numbers");
}

std::string Value::as_text(std::string_view what) const {
  if (const auto* s = std::get_if<std::string>(&data_)) return *s;
  if (const auto* v = std::get_if<TextVec>(&data_)) {
    if (v->size() == 1) return v->front();
  }
  if (std::holds_alternative<double>(data_) || std::holds_alternative<bool>(data_)) return format_value(*this);
  type_error(what, *this, "a single text value");
}

TextVec Value::as_texts(std::string_view what) const {
  if (const auto* s = std::get_if<std::string>(&data_)) return {*s};
  if (const auto* v = std::get_if<TextVec>(&data_)) return *v;
  if (is_numeric()) {
    TextVec out;
    for (double x : as_numbers(what)) out.push_back(format_number(x));
    if (std::holds_alternative<bool>(data_)) out = {std::get<bool>(data_) ? "TRUE" : "FALSE"};
    return out;
  }
  type_error(what, *this, "text");
}

bool Value::as_bool(std::string_view what) const {
  if (const auto* b = std::get_if<bool>(&data_)) return *b;
  if (is_numeric()) return as_number(what) != 0;
  if (const auto* s = std::get_if<std::string>(&data_)) {
    if (*s == "TRUE") return true;
    if (*s == "FALSE") return false;
  }
  type_error(what, *this, "a logical value");
}

const DataTable& Value::as_table(std::string_view what) const {
  if (const auto* t = std::get_if<DataTable>(&data_)) return *t;
  type_error(what, *this, "a table");
}

std::string format_value(const Value& v) {
  switch (v.type()) {
    case Value::Type::Number:
      return format_number(std::get<double>(v.storage()));
    case Value::Type::Text:
      return std::get<std::string>(v.storage());
    case Value::Type::Bool:
      return std::get<bool>(v.storage()) ? "TRUE" : "FALSE";
    case Value::Type::NumVec: {
      std::string out;
      for (double x : std::get<NumVec>(v.storage())) {
        if (!out.empty()) out += ", ";
        out += format_number(x);
      }
      return out;
    }
    case Value::Type::TextVec: {
      std::string out;
      bool first = true;
      for (const auto& s : std::get<TextVec>(v.storage())) {
        if (!first) out += ", ";
        first = false;
        out += s;
      }
      return out;
    }
    case Value::Type::Table: {
      std::string out;
      const auto& t = std::get<DataTable>(v.storage());
      for (const Column& c : t.columns) {
        if (!out.empty()) out += "; ";
        if (c.name) out += *c.name + ": ";
        out += format_value(column_value(c));
      }
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------- evaluator

namespace {

struct Context {
  const Environment& env;
  RngStream& rng;
  std::vector<std::pair<std::string, double>> locals;  // integration variables
  int depth = 0;
  double random_work = 0;
};

void charge(Context& ctx, double units) {
  ctx.random_work += units;
  if (ctx.random_work > kMaxRandomWork) throw EvalError("too many random draws in one instance");
}

Value eval_node(const Node& n, Context& ctx);

class Args;
using Builtin = std::function<Value(Args&)>;

// Argument binding in R's style: exact-name matches first, then positional
// arguments fill the remaining parameters in order.
class Args {
 public:
  Args(const Node& call, Context& ctx, std::vector<std::string> params, bool variadic)
      : call_(call), ctx_(ctx), params_(std::move(params)), bound_(params_.size(), nullptr) {
    std::vector<bool> used(call.children.size(), false);
    for (std::size_t i = 0; i < call.children.size(); ++i) {
      const std::string& name = call.arg_names[i];
      if (name.empty()) continue;
      auto it = std::find(params_.begin(), params_.end(), name);
      if (it == params_.end()) {
        if (variadic) continue;
        throw EvalError(call.text + "(): unknown argument '" + name + "'");
      }
      auto& slot = bound_[static_cast<std::size_t>(it - params_.begin())];
      if (slot) throw EvalError(call.text + "(): argument '" + name + "' given twice");
      slot = call.children[i].get();
      used[i] = true;
    }
    std::size_t next = 0;
    for (std::size_t i = 0; i < call.children.size(); ++i) {
      if (used[i] || !call.arg_names[i].empty()) continue;
      if (variadic) {
        rest_.push_back(call.children[i].get());
        continue;
      }
      while (next < bound_.size() && bound_[next]) ++next;
      if (next >= bound_.size()) {
        throw EvalError(call.text + "(): too many arguments (takes at most " + std::to_string(params_.size()) + ")");
      }
      bound_[next++] = call.children[i].get();
    }
    if (variadic) {
      for (std::size_t i = 0; i < call.children.size(); ++i) {
        if (!call.arg_names[i].empty() && std::find(params_.begin(), params_.end(), call.arg_names[i]) == params_.end()) {
          named_rest_.emplace_back(call.arg_names[i], call.children[i].get());
        }
      }
    }
  }

  const std::string& fn() const { return call_.text; }
  Context& ctx() { return ctx_; }

  bool has(std::size_t i) const { return bound_[i] != nullptr; }
  const Node* node(std::size_t i) const { return bound_[i]; }

  Value value(std::size_t i) {
    if (!bound_[i]) throw EvalError(fn() + "(): missing argument '" + params_[i] + "'");
    return eval_node(*bound_[i], ctx_);
  }

  std::string label(std::size_t i) const { return fn() + "(" + params_[i] + ")"; }

  double number(std::size_t i) { return value(i).as_number(label(i)); }
  double number_or(std::size_t i, double fallback) { return has(i) ? number(i) : fallback; }
  NumVec numbers(std::size_t i) { return value(i).as_numbers(label(i)); }
  bool flag_or(std::size_t i, bool fallback) { return has(i) ? value(i).as_bool(label(i)) : fallback; }

  long count(std::size_t i) {
    const double x = number(i);
    if (x < 0 || x != std::floor(x)) throw EvalError(label(i) + ": expected a nonnegative whole number");
    if (x > static_cast<double>(kMaxVectorLength)) throw EvalError(label(i) + ": too large");
    return static_cast<long>(x);
  }

  const std::vector<const Node*>& rest() const { return rest_; }
  const std::vector<std::pair<std::string, const Node*>>& named_rest() const { return named_rest_; }

 private:
  const Node& call_;
  Context& ctx_;
  std::vector<std::string> params_;
  std::vector<const Node*> bound_;
  std::vector<const Node*> rest_;
  std::vector<std::pair<std::string, const Node*>> named_rest_;
};

struct BuiltinSpec {
  std::vector<std::string> params;
  bool variadic = false;
  Builtin fn;
};

const std::unordered_map<std::string, BuiltinSpec>& builtins();

// ---- arithmetic helpers

template <typename Op>
Value elementwise(const Value& a, const Value& b, std::string_view what, Op op) {
  const NumVec x = a.as_numbers(what);
  const NumVec y = b.as_numbers(what);
  if (x.empty() || y.empty()) return Value(NumVec{});
  const std::size_t n = std::max(x.size(), y.size());
  if (n % x.size() != 0 || n % y.size() != 0) {
    throw EvalError(std::string(what) + ": vector lengths " + std::to_string(x.size()) + " and " +
                    std::to_string(y.size()) + " are not compatible");
  }
  NumVec out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = op(x[i % x.size()], y[i % y.size()]);
    check_finite(out[i]);
  }
  return vec_result(std::move(out));
}

Value compare(const Value& a, const Value& b, const std::string& op) {
  auto test = [&op](auto l, auto r) {
    if (op == "==") return l == r;
    if (op == "!=") return l != r;
    if (op == "<") return l < r;
    if (op == ">") return l > r;
    if (op == "<=") return l <= r;
    return l >= r;
  };
  NumVec out;
  if (a.is_text() || b.is_text()) {
    const TextVec x = a.as_texts("comparison");
    const TextVec y = b.as_texts("comparison");
    if (x.empty() || y.empty()) return Value(NumVec{});
    const std::size_t n = std::max(x.size(), y.size());
    if (n % x.size() != 0 || n % y.size() != 0) throw EvalError("comparison: incompatible vector lengths");
    for (std::size_t i = 0; i < n; ++i) out.push_back(test(x[i % x.size()], y[i % y.size()]) ? 1 : 0);
  } else {
    const NumVec x = a.as_numbers("comparison");
    const NumVec y = b.as_numbers("comparison");
    if (x.empty() || y.empty()) return Value(NumVec{});
    const std::size_t n = std::max(x.size(), y.size());
    if (n % x.size() != 0 || n % y.size() != 0) throw EvalError("comparison: incompatible vector lengths");
    for (std::size_t i = 0; i < n; ++i) out.push_back(test(x[i % x.size()], y[i % y.size()]) ? 1 : 0);
  }
  if (out.size() == 1) return Value(out.front() != 0);
  return Value(std::move(out));
}

Value range_op(const Value& a, const Value& b) {
  const double from = a.as_number("range start");
  const double to = b.as_number("range end");
  const double span = std::floor(std::fabs(to - from));
  if (span + 1 > static_cast<double>(kMaxVectorLength)) throw EvalError("range is too long");
  NumVec out;
  const double step = to >= from ? 1.0 : -1.0;
  for (double i = 0; i <= span; ++i) out.push_back(from + step * i);
  return vec_result(std::move(out));
}

Value binary_op(const Node& n, Context& ctx) {
  const std::string& op = n.text;
  if (op == "&&" || op == "||") {
    const bool lhs = eval_node(*n.children[0], ctx).as_bool("'" + op + "' operand");
    if (op == "&&" && !lhs) return Value(false);
    if (op == "||" && lhs) return Value(true);
    return Value(eval_node(*n.children[1], ctx).as_bool("'" + op + "' operand"));
  }
  const Value a = eval_node(*n.children[0], ctx);
  const Value b = eval_node(*n.children[1], ctx);
  if (op == "&" || op == "|") {
    Value r = elementwise(a, b, op, [&op](double x, double y) {
      return op == "&" ? double((x != 0) && (y != 0)) : double((x != 0) || (y != 0));
    });
    if (r.type() == Value::Type::Number) return Value(r.as_number() != 0);
    return r;
  }
  if (op == "==" || op == "!=" || op == "<" || op == ">" || op == "<=" || op == ">=") return compare(a, b, op);
  if (op == ":") return range_op(a, b);
  if (op == "%in%") {
    const TextVec x = a.as_texts("%in%");
    const TextVec y = b.as_texts("%in%");
    NumVec out;
    for (const auto& s : x) out.push_back(std::find(y.begin(), y.end(), s) != y.end() ? 1 : 0);
    if (out.size() == 1) return Value(out.front() != 0);
    return Value(std::move(out));
  }
  const std::string what = "operator '" + op + "'";
  if (op == "+") return elementwise(a, b, what, std::plus<>{});
  if (op == "-") return elementwise(a, b, what, std::minus<>{});
  if (op == "*") return elementwise(a, b, what, std::multiplies<>{});
  if (op == "/") return elementwise(a, b, what, std::divides<>{});
  if (op == "^") return elementwise(a, b, what, [](double x, double y) { return std::pow(x, y); });
  if (op == "%%") return elementwise(a, b, what, [](double x, double y) { return x - std::floor(x / y) * y; });
  if (op == "%/%") return elementwise(a, b, what, [](double x, double y) { return std::floor(x / y); });
  throw EvalError("unknown operator '" + op + "'");
}

std::vector<long> index_positions(const Value& idx, std::size_t length, std::string_view what) {
  const NumVec raw = idx.as_numbers(what);
  std::vector<long> out;
  const bool negative = !raw.empty() && std::all_of(raw.begin(), raw.end(), [](double v) { return v < 0; });
  if (negative) {
    std::vector<bool> drop(length, false);
    for (double v : raw) {
      const auto k = static_cast<long>(-v);
      if (k >= 1 && static_cast<std::size_t>(k) <= length) drop[static_cast<std::size_t>(k - 1)] = true;
    }
    for (std::size_t i = 0; i < length; ++i) {
      if (!drop[i]) out.push_back(static_cast<long>(i));
    }
    return out;
  }
  for (double v : raw) {
    if (v != std::floor(v) || v < 1 || v > static_cast<double>(length)) {
      throw EvalError(std::string(what) + ": index " + format_number(v) + " out of range 1.." + std::to_string(length));
    }
    out.push_back(static_cast<long>(v) - 1);
  }
  return out;
}

Value index_op(const Value& target, const Value& idx) {
  if (target.type() == Value::Type::Table) {
    const DataTable& t = std::get<DataTable>(target.storage());
    if (idx.is_text()) {
      const std::string name = idx.as_text("table index");
      const Column* c = t.find(name);
      if (!c) throw EvalError("table has no column '" + name + "'");
      return column_value(*c);
    }
    const auto pos = index_positions(idx, t.columns.size(), "table index");
    if (pos.size() == 1) return column_value(t.columns[static_cast<std::size_t>(pos.front())]);
    DataTable sub;
    for (long p : pos) sub.columns.push_back(t.columns[static_cast<std::size_t>(p)]);
    return Value(std::move(sub));
  }
  if (target.is_text()) {
    const TextVec v = target.as_texts("index");
    TextVec out;
    for (long p : index_positions(idx, v.size(), "index")) out.push_back(v[static_cast<std::size_t>(p)]);
    return text_result(std::move(out));
  }
  const NumVec v = target.as_numbers("index");
  NumVec out;
  for (long p : index_positions(idx, v.size(), "index")) out.push_back(v[static_cast<std::size_t>(p)]);
  return vec_result(std::move(out));
}

Value call_builtin(const Node& n, Context& ctx) {
  const auto& table = builtins();
  const auto it = table.find(n.text);
  if (it == table.end()) throw EvalError("unknown function '" + n.text + "'");
  Args args(n, ctx, it->second.params, it->second.variadic);
  return it->second.fn(args);
}

const Value* lookup_constant(std::string_view name) {
  static const Value pi_value(3.14159265358979323846);
  static const Value letters_value([] {
    TextVec v;
    for (char c = 'a'; c <= 'z'; ++c) v.emplace_back(1, c);
    return v;
  }());
  static const Value upper_letters_value([] {
    TextVec v;
    for (char c = 'A'; c <= 'Z'; ++c) v.emplace_back(1, c);
    return v;
  }());
  if (name == "pi") return &pi_value;
  if (name == "letters") return &letters_value;
  if (name == "LETTERS") return &upper_letters_value;
  return nullptr;
}

Value eval_node(const Node& n, Context& ctx) {
  struct Depth {
    explicit Depth(Context& c) : c(c) {
      if (++c.depth > kMaxEvalDepth) throw EvalError("expression evaluation nested too deeply");
    }
    ~Depth() { --c.depth; }
    Context& c;
  } depth(ctx);

  switch (n.kind) {
    case Node::Kind::Number:
      return Value(n.number);
    case Node::Kind::String:
      return Value(n.text);
    case Node::Kind::Bool:
      return Value(n.number != 0);
    case Node::Kind::Identifier: {
      for (auto it = ctx.locals.rbegin(); it != ctx.locals.rend(); ++it) {
        if (it->first == n.text) return Value(it->second);
      }
      if (auto it = ctx.env.find(n.text); it != ctx.env.end()) return it->second;
      if (const Value* c = lookup_constant(n.text)) return *c;
      throw EvalError("unknown variable '" + n.text + "'");
    }
    case Node::Kind::Unary: {
      const Value v = eval_node(*n.children[0], ctx);
      if (n.text == "!") {
        if (v.type() == Value::Type::NumVec) {
          NumVec out;
          for (double x : v.as_numbers()) out.push_back(x == 0 ? 1 : 0);
          return Value(std::move(out));
        }
        return Value(!v.as_bool("'!' operand"));
      }
      NumVec x = v.as_numbers("unary '" + n.text + "'");
      if (n.text == "-") {
        for (double& e : x) e = -e;
      }
      return vec_result(std::move(x));
    }
    case Node::Kind::Binary:
      return binary_op(n, ctx);
    case Node::Kind::Call:
      return call_builtin(n, ctx);
    case Node::Kind::Index:
      return index_op(eval_node(*n.children[0], ctx), eval_node(*n.children[1], ctx));
    case Node::Kind::Member: {
      const Value target = eval_node(*n.children[0], ctx);
      const DataTable& t = target.as_table("'$' access");
      const Column* c = t.find(n.text);
      if (!c) throw EvalError("table has no column '" + n.text + "'");
      return column_value(*c);
    }
    case Node::Kind::Conditional:
      return eval_node(*n.children[eval_node(*n.children[0], ctx).as_bool("if condition") ? 1 : 2], ctx);
  }
  throw EvalError("unknown expression node");
}

// ---------------------------------------------------------------- builtins

NumVec concat_numbers(Args& a) {
  NumVec out;
  for (const Node* n : a.rest()) {
    const NumVec v = eval_node(*n, a.ctx()).as_numbers(a.fn() + "()");
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

NumVec nonempty(NumVec v, const std::string& fn) {
  if (v.empty()) throw EvalError(fn + "(): empty data");
  return v;
}

template <typename F>
BuiltinSpec map_numbers(F f) {
  return {{"x"}, false, [f](Args& a) {
            NumVec v = a.numbers(0);
            for (double& x : v) {
              x = f(x);
              check_finite(x);
            }
            return vec_result(std::move(v));
          }};
}

template <typename Draw>
Value draw_many(Args& a, Draw draw) {
  const long n = a.count(0);
  charge(a.ctx(), static_cast<double>(n));
  NumVec out(static_cast<std::size_t>(n));
  for (double& x : out) x = draw();
  return vec_result(std::move(out));
}

Value sample_impl(Args& a) {
  Value x = a.value(0);
  RngStream& rng = a.ctx().rng;
  // A single positive whole number n means the population 1..n.
  if (x.is_numeric() && x.length() == 1) {
    const double n = x.as_number();
    if (n >= 1 && n == std::floor(n)) x = range_op(Value(1.0), Value(n));
  }
  const bool text = x.is_text();
  const TextVec tpop = text ? x.as_texts() : TextVec{};
  const NumVec npop = text ? NumVec{} : x.as_numbers("sample(x)");
  const std::size_t n = text ? tpop.size() : npop.size();
  if (n == 0) throw EvalError("sample(): cannot sample from an empty population");
  const std::size_t size = a.has(1) ? static_cast<std::size_t>(a.count(1)) : n;
  const bool replace = a.flag_or(2, false);
  std::optional<NumVec> prob;
  if (a.has(3)) {
    prob = a.numbers(3);
    if (prob->size() != n) throw EvalError("sample(): prob must have one entry per population element");
    double total = 0;
    for (double p : *prob) {
      if (p < 0) throw EvalError("sample(): probabilities must be nonnegative");
      total += p;
    }
    if (total <= 0) throw EvalError("sample(): probabilities must not all be zero");
  }
  if (!replace && size > n) throw EvalError("sample(): cannot take a sample larger than the population without replacement");

  std::vector<std::size_t> picks;
  picks.reserve(size);
  if (!prob) {
    if (replace) {
      for (std::size_t i = 0; i < size; ++i) picks.push_back(static_cast<std::size_t>(rng.next_below(n)));
    } else {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = 0; i < size; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(order[i], order[j]);
        picks.push_back(order[i]);
      }
    }
  } else {
    NumVec w = *prob;
    for (std::size_t i = 0; i < size; ++i) {
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      if (total <= 0) throw EvalError("sample(): too few positive probabilities");
      const double u = rng.next_uniform() * total;
      double acc = 0;
      std::size_t k = 0;
      for (; k < n; ++k) {
        acc += w[k];
        if (u < acc && w[k] > 0) break;
      }
      if (k == n) {
        k = n - 1;
        while (w[k] <= 0) --k;
      }
      picks.push_back(k);
      if (!replace) w[k] = 0;
    }
  }
  if (text) {
    TextVec out;
    for (std::size_t k : picks) out.push_back(tpop[k]);
    return text_result(std::move(out));
  }
  NumVec out;
  for (std::size_t k : picks) out.push_back(npop[k]);
  return vec_result(std::move(out));
}

Value table_impl(Args& a) {
  auto levels_of = [](const Value& v) {
    TextVec keys;
    if (v.is_text()) {
      keys = v.as_texts();
      std::vector<std::string> sorted_keys = keys;
      std::sort(sorted_keys.begin(), sorted_keys.end());
      sorted_keys.erase(std::unique(sorted_keys.begin(), sorted_keys.end()), sorted_keys.end());
      return std::make_pair(keys, sorted_keys);
    }
    NumVec nums = v.as_numbers("table()");
    NumVec uniq = nums;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (double x : nums) keys.push_back(format_number(x));
    TextVec sorted_keys;
    for (double x : uniq) sorted_keys.push_back(format_number(x));
    return std::make_pair(keys, sorted_keys);
  };
  const auto [xs, xlevels] = levels_of(a.value(0));
  DataTable t;
  if (!a.has(1)) {
    for (const auto& level : xlevels) {
      t.columns.push_back({level, NumVec{static_cast<double>(std::count(xs.begin(), xs.end(), level))}});
    }
    return Value(std::move(t));
  }
  const auto [ys, ylevels] = levels_of(a.value(1));
  if (xs.size() != ys.size()) throw EvalError("table(): arguments must have the same length");
  t.columns.push_back({std::string(""), TextVec(xlevels.begin(), xlevels.end())});
  for (const auto& ylevel : ylevels) {
    NumVec counts;
    for (const auto& xlevel : xlevels) {
      double c = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) c += (xs[i] == xlevel && ys[i] == ylevel) ? 1 : 0;
      counts.push_back(c);
    }
    t.columns.push_back({ylevel, std::move(counts)});
  }
  return Value(std::move(t));
}

Value paste_impl(Args& a, const std::string& sep) {
  std::vector<TextVec> parts;
  std::size_t n = 0;
  for (const Node* node : a.rest()) {
    parts.push_back(eval_node(*node, a.ctx()).as_texts(a.fn() + "()"));
    n = std::max(n, parts.back().size());
  }
  TextVec out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    bool first = true;
    for (const auto& p : parts) {
      if (p.empty()) continue;
      if (!first) s += sep;
      first = false;
      s += p[i % p.size()];
    }
    out.push_back(std::move(s));
  }
  return text_result(std::move(out));
}

std::string collapse_paste(Args& a, std::size_t sep_index, std::size_t collapse_index, const std::string& default_sep) {
  const std::string sep = a.has(sep_index) ? a.value(sep_index).as_text("sep") : default_sep;
  Value joined = paste_impl(a, sep);
  if (!a.has(collapse_index)) return {};
  const std::string collapse = a.value(collapse_index).as_text("collapse");
  std::string out;
  bool first = true;
  for (const auto& s : joined.as_texts()) {
    if (!first) out += collapse;
    first = false;
    out += s;
  }
  return out;
}

DataTable result_table(const stats::TestResult& r) {
  DataTable t;
  auto num = [&t](std::string name, NumVec v) { t.columns.push_back({std::move(name), std::move(v)}); };
  auto text = [&t](std::string name, TextVec v) { t.columns.push_back({std::move(name), std::move(v)}); };
  switch (r.kind) {
    case stats::TestKind::t_one_sample:
      text("test", {"t_one_sample"});
      break;
    case stats::TestKind::t_two_sample:
      text("test", {"t_two_sample"});
      break;
    case stats::TestKind::binom_exact:
      text("test", {"binom_exact"});
      break;
    case stats::TestKind::simple_regression: {
      const auto& c = r.coefficients;
      text("test", {"simple_regression", "simple_regression"});
      text("term", {c[0].term, c[1].term});
      num("estimate", {c[0].estimate, c[1].estimate});
      num("std_error", {c[0].std_error, c[1].std_error});
      num("statistic", {c[0].statistic, c[1].statistic});
      num("p_value", {c[0].p_value, c[1].p_value});
      num("df", {*r.df, *r.df});
      num("r_squared", {r.r_squared, r.r_squared});
      num("residual_se", {r.residual_se, r.residual_se});
      return t;
    }
  }
  num("statistic", {r.statistic});
  num("p_value", {r.p_value});
  if (r.df) num("df", {*r.df});
  num("conf_low", {r.conf_int->first});
  num("conf_high", {r.conf_int->second});
  num("conf_level", {r.conf_level});
  num("estimate", {r.estimates[0].second});
  if (r.estimates.size() > 1) num("estimate_y", {r.estimates[1].second});
  if (r.trials) num("trials", {static_cast<double>(*r.trials)});
  return t;
}

stats::TestResult result_from_table(const DataTable& t) {
  const Column* kind = t.find("test");
  if (!kind || kind->is_numeric()) throw EvalError("stat_block(): argument is not a test result");
  const std::string k = std::get<TextVec>(kind->values).front();
  auto get = [&t](std::string_view name, std::size_t row = 0) {
    const Column* c = t.find(name);
    if (!c || !c->is_numeric()) throw EvalError("stat_block(): test result lacks '" + std::string(name) + "'");
    return std::get<NumVec>(c->values).at(row);
  };
  stats::TestResult r;
  if (k == "simple_regression") {
    r.kind = stats::TestKind::simple_regression;
    r.method = "Linear regression";
    r.data_name = "y ~ x";
    r.statistic_name = "t";
    const auto& terms = std::get<TextVec>(t.find("term")->values);
    for (std::size_t i = 0; i < 2; ++i) {
      r.coefficients.push_back({terms[i], get("estimate", i), get("std_error", i), get("statistic", i), get("p_value", i)});
    }
    r.df = get("df");
    r.r_squared = get("r_squared");
    r.residual_se = get("residual_se");
    r.statistic = r.coefficients[1].statistic;
    r.p_value = r.coefficients[1].p_value;
    return r;
  }
  r.statistic = get("statistic");
  r.p_value = get("p_value");
  r.conf_int = std::make_pair(get("conf_low"), get("conf_high"));
  r.conf_level = get("conf_level");
  if (k == "t_one_sample" || k == "t_two_sample") {
    r.statistic_name = "t";
    r.df = get("df");
  }
  if (k == "t_one_sample") {
    r.kind = stats::TestKind::t_one_sample;
    r.method = "One Sample t-test";
    r.data_name = "x";
    r.estimates = {{"mean of x", get("estimate")}};
    r.null_description = "true mean is not equal to " + format_number(t.find("null_value") ? get("null_value") : 0);
  } else if (k == "t_two_sample") {
    r.kind = stats::TestKind::t_two_sample;
    r.method = "Welch Two Sample t-test";
    r.data_name = "x and y";
    r.estimates = {{"mean of x", get("estimate")}, {"mean of y", get("estimate_y")}};
    r.null_description = "true difference in means is not equal to " +
                         format_number(t.find("null_value") ? get("null_value") : 0);
  } else if (k == "binom_exact") {
    r.kind = stats::TestKind::binom_exact;
    r.method = "Exact binomial test";
    r.statistic_name = "number of successes";
    r.trials = std::lround(get("trials"));
    r.data_name = format_number(r.statistic) + " and " + format_number(static_cast<double>(*r.trials));
    r.estimates = {{"probability of success", get("estimate")}};
    r.null_description = "true probability of success is not equal to " +
                         format_number(t.find("null_value") ? get("null_value") : 0.5);
  } else {
    throw EvalError("stat_block(): unknown test '" + k + "'");
  }
  return r;
}

Value wrap_stats(const std::function<Value()>& f) {
  try {
    return f();
  } catch (const stats::StatsError& e) {
    throw EvalError(e.what());
  }
}

ColumnData column_of(const Value& v) {
  if (v.is_text()) return v.as_texts();
  return v.as_numbers("table data");
}

const std::unordered_map<std::string, BuiltinSpec>& builtins() {
  static const std::unordered_map<std::string, BuiltinSpec> table = [] {
    std::unordered_map<std::string, BuiltinSpec> b;

    // ---- construction
    b["c"] = {{}, true, [](Args& a) -> Value {
                bool any_text = false;
                std::vector<Value> vals;
                for (const Node* n : a.rest()) {
                  vals.push_back(eval_node(*n, a.ctx()));
                  any_text = any_text || vals.back().is_text();
                }
                if (any_text) {
                  TextVec out;
                  for (const auto& v : vals) {
                    const TextVec t = v.as_texts("c()");
                    out.insert(out.end(), t.begin(), t.end());
                  }
                  return text_result(std::move(out));
                }
                NumVec out;
                for (const auto& v : vals) {
                  const NumVec t = v.as_numbers("c()");
                  out.insert(out.end(), t.begin(), t.end());
                }
                return vec_result(std::move(out));
              }};
    b["seq"] = {{"from", "to", "by", "length.out"}, false, [](Args& a) -> Value {
                  const double from = a.number_or(0, 1);
                  const double to = a.number_or(1, 1);
                  NumVec out;
                  if (a.has(3)) {
                    const long n = a.count(3);
                    for (long i = 0; i < n; ++i) {
                      out.push_back(n == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1));
                    }
                    return vec_result(std::move(out));
                  }
                  const double by = a.number_or(2, to >= from ? 1 : -1);
                  if (by == 0 || (to - from) / by < 0) throw EvalError("seq(): wrong sign in 'by'");
                  const double steps = std::floor((to - from) / by + 1e-10);
                  if (steps + 1 > static_cast<double>(kMaxVectorLength)) throw EvalError("seq(): too long");
                  for (double i = 0; i <= steps; ++i) out.push_back(from + i * by);
                  return vec_result(std::move(out));
                }};
    b["seq_len"] = {{"length.out"}, false, [](Args& a) -> Value {
                      NumVec out;
                      for (long i = 1; i <= a.count(0); ++i) out.push_back(static_cast<double>(i));
                      return vec_result(std::move(out));
                    }};
    b["rep"] = {{"x", "times", "each"}, false, [](Args& a) -> Value {
                  const Value x = a.value(0);
                  const long times = a.has(1) ? a.count(1) : 1;
                  const long each = a.has(2) ? a.count(2) : 1;
                  if (static_cast<double>(x.length()) * static_cast<double>(times) * static_cast<double>(each) >
                      static_cast<double>(kMaxVectorLength)) {
                    throw EvalError("rep(): result too long");
                  }
                  if (x.is_text()) {
                    TextVec src = x.as_texts(), out;
                    for (long t = 0; t < times; ++t)
                      for (const auto& s : src)
                        for (long e = 0; e < each; ++e) out.push_back(s);
                    return text_result(std::move(out));
                  }
                  NumVec src = a.numbers(0), out;
                  for (long t = 0; t < times; ++t)
                    for (double v : src)
                      for (long e = 0; e < each; ++e) out.push_back(v);
                  return vec_result(std::move(out));
                }};
    b["data.frame"] = {{}, true, [](Args& a) -> Value {
                         if (!a.rest().empty()) throw EvalError("data.frame(): every column needs a name");
                         DataTable t;
                         std::size_t n = 0;
                         std::vector<std::pair<std::string, Value>> cols;
                         for (const auto& [name, node] : a.named_rest()) {
                           cols.emplace_back(name, eval_node(*node, a.ctx()));
                           n = std::max(n, cols.back().second.length());
                         }
                         for (auto& [name, v] : cols) {
                           ColumnData data = column_of(v);
                           const std::size_t len = std::visit([](const auto& d) { return d.size(); }, data);
                           if (len == 1 && n > 1) {
                             std::visit([n](auto& d) { d.assign(n, d.front()); }, data);
                           } else if (len != n) {
                             throw EvalError("data.frame(): columns must have equal length");
                           }
                           t.columns.push_back({name, std::move(data)});
                         }
                         return Value(std::move(t));
                       }};
    b["names"] = {{"x"}, false, [](Args& a) -> Value {
                    TextVec out;
                    for (const Column& c : a.value(0).as_table("names(x)").columns) out.push_back(c.name.value_or(""));
                    return text_result(std::move(out));
                  }};

    // ---- summaries
    b["length"] = {{"x"}, false, [](Args& a) -> Value { return Value(static_cast<double>(a.value(0).length())); }};
    b["sum"] = {{}, true, [](Args& a) -> Value {
                  const NumVec v = concat_numbers(a);
                  return Value(std::accumulate(v.begin(), v.end(), 0.0));
                }};
    b["prod"] = {{}, true, [](Args& a) -> Value {
                   const NumVec v = concat_numbers(a);
                   return Value(std::accumulate(v.begin(), v.end(), 1.0, std::multiplies<>{}));
                 }};
    b["max"] = {{}, true, [](Args& a) -> Value {
                  const NumVec v = nonempty(concat_numbers(a), a.fn());
                  return Value(*std::max_element(v.begin(), v.end()));
                }};
    b["min"] = {{}, true, [](Args& a) -> Value {
                  const NumVec v = nonempty(concat_numbers(a), a.fn());
                  return Value(*std::min_element(v.begin(), v.end()));
                }};
    b["range"] = {{}, true, [](Args& a) -> Value {
                    const NumVec v = nonempty(concat_numbers(a), a.fn());
                    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
                    return Value(NumVec{*lo, *hi});
                  }};
    b["mean"] = {{"x"}, false, [](Args& a) { return wrap_stats([&] { return Value(stats::mean(a.numbers(0))); }); }};
    b["median"] = {{"x"}, false, [](Args& a) { return wrap_stats([&] { return Value(stats::median(a.numbers(0))); }); }};
    b["var"] = {{"x"}, false, [](Args& a) { return wrap_stats([&] { return Value(stats::variance(a.numbers(0))); }); }};
    b["sd"] = {{"x"}, false, [](Args& a) { return wrap_stats([&] { return Value(stats::sd(a.numbers(0))); }); }};
    b["cor"] = {{"x", "y"}, false, [](Args& a) {
                  return wrap_stats([&] { return Value(stats::correlation(a.numbers(0), a.numbers(1))); });
                }};
    b["quantile"] = {{"x", "probs"}, false, [](Args& a) {
                       return wrap_stats([&] {
                         const NumVec x = a.numbers(0);
                         const NumVec p = a.has(1) ? a.numbers(1) : NumVec{0, 0.25, 0.5, 0.75, 1};
                         NumVec out;
                         for (double q : p) out.push_back(stats::quantile(x, q));
                         return vec_result(std::move(out));
                       });
                     }};
    b["fivenum"] = {{"x"}, false, [](Args& a) { return wrap_stats([&] { return vec_result(stats::fivenum(a.numbers(0))); }); }};
    b["IQR"] = {{"x"}, false, [](Args& a) {
                  return wrap_stats([&] {
                    const NumVec x = a.numbers(0);
                    return Value(stats::quantile(x, 0.75) - stats::quantile(x, 0.25));
                  });
                }};
    b["cumsum"] = {{"x"}, false, [](Args& a) -> Value {
                     NumVec v = a.numbers(0);
                     std::partial_sum(v.begin(), v.end(), v.begin());
                     return vec_result(std::move(v));
                   }};
    b["diff"] = {{"x"}, false, [](Args& a) -> Value {
                   const NumVec v = a.numbers(0);
                   NumVec out;
                   for (std::size_t i = 1; i < v.size(); ++i) out.push_back(v[i] - v[i - 1]);
                   return vec_result(std::move(out));
                 }};
    b["sort"] = {{"x", "decreasing"}, false, [](Args& a) -> Value {
                   const Value x = a.value(0);
                   const bool dec = a.flag_or(1, false);
                   if (x.is_text()) {
                     TextVec v = x.as_texts();
                     std::sort(v.begin(), v.end());
                     if (dec) std::reverse(v.begin(), v.end());
                     return text_result(std::move(v));
                   }
                   NumVec v = x.as_numbers("sort(x)");
                   std::sort(v.begin(), v.end());
                   if (dec) std::reverse(v.begin(), v.end());
                   return vec_result(std::move(v));
                 }};
    b["rev"] = {{"x"}, false, [](Args& a) -> Value {
                  const Value x = a.value(0);
                  if (x.is_text()) {
                    TextVec v = x.as_texts();
                    std::reverse(v.begin(), v.end());
                    return text_result(std::move(v));
                  }
                  NumVec v = x.as_numbers("rev(x)");
                  std::reverse(v.begin(), v.end());
                  return vec_result(std::move(v));
                }};
    b["unique"] = {{"x"}, false, [](Args& a) -> Value {
                     const Value x = a.value(0);
                     if (x.is_text()) {
                       TextVec out;
                       for (const auto& s : x.as_texts())
                         if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
                       return text_result(std::move(out));
                     }
                     NumVec out;
                     for (double v : a.numbers(0))
                       if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
                     return vec_result(std::move(out));
                   }};
    b["which.max"] = {{"x"}, false, [](Args& a) -> Value {
                        const NumVec v = nonempty(a.numbers(0), a.fn());
                        return Value(static_cast<double>(std::max_element(v.begin(), v.end()) - v.begin() + 1));
                      }};
    b["which.min"] = {{"x"}, false, [](Args& a) -> Value {
                        const NumVec v = nonempty(a.numbers(0), a.fn());
                        return Value(static_cast<double>(std::min_element(v.begin(), v.end()) - v.begin() + 1));
                      }};
    b["which"] = {{"x"}, false, [](Args& a) -> Value {
                    const NumVec v = a.numbers(0);
                    NumVec out;
                    for (std::size_t i = 0; i < v.size(); ++i) {
                      if (v[i] != 0) out.push_back(static_cast<double>(i + 1));
                    }
                    if (out.empty()) throw EvalError(a.fn() + ": no element is TRUE");
                    return Value(std::move(out));
                  }};
    b["table"] = {{"x", "y"}, false, table_impl};

    // ---- elementwise math
    b["abs"] = map_numbers([](double x) { return std::fabs(x); });
    b["sqrt"] = map_numbers([](double x) {
      if (x < 0) throw EvalError("sqrt(): negative argument");
      return std::sqrt(x);
    });
    b["exp"] = map_numbers([](double x) { return std::exp(x); });
    b["log10"] = map_numbers([](double x) { return std::log10(x); });
    b["log2"] = map_numbers([](double x) { return std::log2(x); });
    b["floor"] = map_numbers([](double x) { return std::floor(x); });
    b["ceiling"] = map_numbers([](double x) { return std::ceil(x); });
    b["trunc"] = map_numbers([](double x) { return std::trunc(x); });
    b["sin"] = map_numbers([](double x) { return std::sin(x); });
    b["cos"] = map_numbers([](double x) { return std::cos(x); });
    b["tan"] = map_numbers([](double x) { return std::tan(x); });
    b["factorial"] = map_numbers([](double x) {
      if (x < 0 || x != std::floor(x)) throw EvalError("factorial(): expected a nonnegative whole number");
      return std::tgamma(x + 1);
    });
    b["log"] = {{"x", "base"}, false, [](Args& a) -> Value {
                  NumVec v = a.numbers(0);
                  const double base = a.number_or(1, std::exp(1.0));
                  for (double& x : v) {
                    if (x <= 0) throw EvalError("log(): argument must be positive");
                    x = std::log(x) / std::log(base);
                    check_finite(x);
                  }
                  return vec_result(std::move(v));
                }};
    b["round"] = {{"x", "digits"}, false, [](Args& a) -> Value {
                    NumVec v = a.numbers(0);
                    const double d = a.number_or(1, 0);
                    for (double& x : v) x = round_half_away(x, static_cast<int>(d));
                    return vec_result(std::move(v));
                  }};
    b["signif"] = {{"x", "digits"}, false, [](Args& a) -> Value {
                     NumVec v = a.numbers(0);
                     const int d = std::max(1, static_cast<int>(a.number_or(1, 6)));
                     for (double& x : v) {
                       if (x != 0) x = round_half_away(x, d - 1 - static_cast<int>(std::floor(std::log10(std::fabs(x)))));
                     }
                     return vec_result(std::move(v));
                   }};
    b["choose"] = {{"n", "k"}, false, [](Args& a) -> Value {
                     const double n = a.number(0);
                     const double k = a.number(1);
                     if (k < 0 || k > n) return Value(0.0);
                     double r = 1;
                     for (double i = 1; i <= k; ++i) r = r * (n - k + i) / i;
                     return Value(std::round(r));
                   }};
    b["ifelse"] = {{"test", "yes", "no"}, false, [](Args& a) -> Value {
                     const NumVec test = a.numbers(0);
                     const Value yes = a.value(1);
                     const Value no = a.value(2);
                     if (yes.is_text() || no.is_text()) {
                       const TextVec y = yes.as_texts(), n = no.as_texts();
                       TextVec out;
                       for (std::size_t i = 0; i < test.size(); ++i)
                         out.push_back(test[i] != 0 ? y[i % y.size()] : n[i % n.size()]);
                       return text_result(std::move(out));
                     }
                     const NumVec y = yes.as_numbers(), n = no.as_numbers();
                     NumVec out;
                     for (std::size_t i = 0; i < test.size(); ++i)
                       out.push_back(test[i] != 0 ? y[i % y.size()] : n[i % n.size()]);
                     return vec_result(std::move(out));
                   }};

    // ---- text
    b["paste0"] = {{"collapse"}, true, [](Args& a) -> Value {
                     if (a.has(0)) return Value(collapse_paste(a, 99, 0, ""));
                     return paste_impl(a, "");
                   }};
    b["paste"] = {{"sep", "collapse"}, true, [](Args& a) -> Value {
                    const std::string sep = a.has(0) ? a.value(0).as_text("sep") : " ";
                    if (a.has(1)) {
                      const Value joined = paste_impl(a, sep);
                      const std::string collapse = a.value(1).as_text("collapse");
                      std::string out;
                      bool first = true;
                      for (const auto& s : joined.as_texts()) {
                        if (!first) out += collapse;
                        first = false;
                        out += s;
                      }
                      return Value(out);
                    }
                    return paste_impl(a, sep);
                  }};
    b["format"] = {{"x", "nsmall"}, false, [](Args& a) -> Value {
                     const Value x = a.value(0);
                     if (x.is_text()) return x;
                     const int nsmall = static_cast<int>(a.number_or(1, 0));
                     TextVec out;
                     for (double v : x.as_numbers("format(x)")) {
                       std::string s = format_number(v);
                       if (nsmall > 0) {
                         auto dot = s.find('.');
                         if (dot == std::string::npos) {
                           s += '.';
                           dot = s.size() - 1;
                         }
                         const auto have = static_cast<int>(s.size() - dot - 1);
                         if (have < nsmall) s.append(static_cast<std::size_t>(nsmall - have), '0');
                       }
                       out.push_back(std::move(s));
                     }
                     return text_result(std::move(out));
                   }};
    b["nchar"] = {{"x"}, false, [](Args& a) -> Value {
                    NumVec out;
                    for (const auto& s : a.value(0).as_texts("nchar(x)")) out.push_back(static_cast<double>(s.size()));
                    return vec_result(std::move(out));
                  }};

    // ---- random variates
    b["sample"] = {{"x", "size", "replace", "prob"}, false, sample_impl};
    b["runif"] = {{"n", "min", "max"}, false, [](Args& a) {
                    const double lo = a.number_or(1, 0);
                    const double hi = a.number_or(2, 1);
                    if (hi < lo) throw EvalError("runif(): max must not be below min");
                    return draw_many(a, [&] { return lo + (hi - lo) * a.ctx().rng.next_uniform(); });
                  }};
    b["rnorm"] = {{"n", "mean", "sd"}, false, [](Args& a) {
                    const double m = a.number_or(1, 0);
                    const double s = a.number_or(2, 1);
                    if (s < 0) throw EvalError("rnorm(): sd must be nonnegative");
                    return draw_many(a, [&] { return m + s * a.ctx().rng.normal(); });
                  }};
    b["rbinom"] = {{"n", "size", "prob"}, false, [](Args& a) {
                     const long size = a.count(1);
                     const double p = a.number(2);
                     if (!(p >= 0 && p <= 1)) throw EvalError("rbinom(): prob must lie in [0,1]");
                     return draw_many(a, [&] {
                       charge(a.ctx(), static_cast<double>(size));
                       long k = 0;
                       for (long i = 0; i < size; ++i) k += a.ctx().rng.bernoulli(p) ? 1 : 0;
                       return static_cast<double>(k);
                     });
                   }};
    b["rchisq"] = {{"n", "df"}, false, [](Args& a) {
                     const double df = a.number(1);
                     if (!(df > 0)) throw EvalError("rchisq(): df must be positive");
                     return draw_many(a, [&] { return 2 * a.ctx().rng.gamma(df / 2); });
                   }};
    b["rbeta"] = {{"n", "shape1", "shape2"}, false, [](Args& a) {
                    const double s1 = a.number(1);
                    const double s2 = a.number(2);
                    if (!(s1 > 0 && s2 > 0)) throw EvalError("rbeta(): shapes must be positive");
                    return draw_many(a, [&] {
                      const double g1 = a.ctx().rng.gamma(s1);
                      const double g2 = a.ctx().rng.gamma(s2);
                      return g1 / (g1 + g2);
                    });
                  }};
    b["rexp"] = {{"n", "rate"}, false, [](Args& a) {
                   const double rate = a.number_or(1, 1);
                   if (!(rate > 0)) throw EvalError("rexp(): rate must be positive");
                   return draw_many(a, [&] { return -std::log(a.ctx().rng.next_uniform()) / rate; });
                 }};

    // ---- distributions
    b["qt"] = {{"p", "df"}, false, [](Args& a) { return wrap_stats([&] { return Value(stats::qt(a.number(0), a.number(1))); }); }};
    b["pt"] = {{"q", "df"}, false, [](Args& a) { return wrap_stats([&] { return Value(stats::pt(a.number(0), a.number(1))); }); }};
    b["qnorm"] = {{"p", "mean", "sd"}, false, [](Args& a) {
                    return wrap_stats([&] { return Value(stats::qnorm(a.number(0), a.number_or(1, 0), a.number_or(2, 1))); });
                  }};
    b["pnorm"] = {{"q", "mean", "sd"}, false, [](Args& a) {
                    return wrap_stats([&] { return Value(stats::pnorm(a.number(0), a.number_or(1, 0), a.number_or(2, 1))); });
                  }};
    b["qchisq"] = {{"p", "df"}, false, [](Args& a) { return wrap_stats([&] { return Value(stats::qchisq(a.number(0), a.number(1))); }); }};
    b["pchisq"] = {{"q", "df"}, false, [](Args& a) { return wrap_stats([&] { return Value(stats::pchisq(a.number(0), a.number(1))); }); }};
    b["dbinom"] = {{"x", "size", "prob"}, false, [](Args& a) {
                     return wrap_stats([&] { return Value(stats::dbinom(std::lround(a.number(0)), a.count(1), a.number(2))); });
                   }};
    b["pbinom"] = {{"q", "size", "prob"}, false, [](Args& a) {
                     return wrap_stats([&] { return Value(stats::pbinom(std::lround(std::floor(a.number(0))), a.count(1), a.number(2))); });
                   }};

    // ---- quadrature
    b["integrate"] = {{"f", "lower", "upper", "var"}, false, [](Args& a) -> Value {
                        const Node* body = a.node(0);
                        if (!body) throw EvalError("integrate(): missing integrand");
                        const double lo = a.number(1);
                        const double hi = a.number(2);
                        const std::string var = a.has(3) ? a.value(3).as_text("integrate(var)") : "x";
                        Context& ctx = a.ctx();
                        auto f = [&](double x) {
                          ctx.locals.emplace_back(var, x);
                          struct Pop {
                            Context& c;
                            ~Pop() { c.locals.pop_back(); }
                          } pop{ctx};
                          return eval_node(*body, ctx).as_number("integrand");
                        };
                        return Value(adaptive_simpson(f, lo, hi, kIntegrateTolerance, kIntegrateMaxDepth));
                      }};

    // ---- tests and HTML output
    b["t_test"] = {{"x", "y", "mu", "conf.level"}, false, [](Args& a) {
                     return wrap_stats([&] {
                       const double mu = a.number_or(2, 0);
                       const double conf = a.number_or(3, 0.95);
                       DataTable t = a.has(1) ? result_table(stats::t_two_sample(a.numbers(0), a.numbers(1), mu, conf))
                                              : result_table(stats::t_one_sample(a.numbers(0), mu, conf));
                       t.columns.push_back({std::string("null_value"), NumVec{mu}});
                       return Value(std::move(t));
                     });
                   }};
    b["binom_test"] = {{"x", "n", "p", "conf.level"}, false, [](Args& a) {
                         return wrap_stats([&] {
                           const double p = a.number_or(2, 0.5);
                           DataTable t = result_table(
                               stats::binom_exact(std::lround(a.number(0)), a.count(1), p, a.number_or(3, 0.95)));
                           t.columns.push_back({std::string("null_value"), NumVec{p}});
                           return Value(std::move(t));
                         });
                       }};
    b["lm_fit"] = {{"x", "y"}, false, [](Args& a) {
                     return wrap_stats([&] { return Value(result_table(stats::simple_regression(a.numbers(0), a.numbers(1)))); });
                   }};
    b["stat_block"] = {{"result"}, false, [](Args& a) -> Value {
                         return Value(htmlgen::render_stat_block(result_from_table(a.value(0).as_table("stat_block(result)"))));
                       }};
    b["html_table"] = {{"x", "ncol"}, false, [](Args& a) -> Value {
                         const Value x = a.value(0);
                         try {
                           if (x.type() == Value::Type::Table) return Value(htmlgen::render_data_table(x.as_table()));
                           const int ncol = static_cast<int>(a.number_or(1, 10));
                           return Value(htmlgen::render_vector_table(column_of(x), ncol));
                         } catch (const htmlgen::HtmlError& e) {
                           throw EvalError(e.what());
                         }
                       }};
    b["hist_png"] = {{"x", "binwidth", "width", "height"}, false, [](Args& a) -> Value {
                       htmlgen::ChartOptions opt;
                       opt.binwidth = a.number(1);
                       opt.width_px = static_cast<int>(a.number_or(2, 640));
                       opt.height_px = static_cast<int>(a.number_or(3, 480));
                       try {
                         const auto png = htmlgen::render_chart(htmlgen::ChartKind::histogram, a.numbers(0), {}, opt);
                         return Value(htmlgen::embed_png(png));
                       } catch (const htmlgen::HtmlError& e) {
                         throw EvalError(e.what());
                       }
                     }};
    b["scatter_png"] = {{"x", "y", "width", "height"}, false, [](Args& a) -> Value {
                          htmlgen::ChartOptions opt;
                          opt.width_px = static_cast<int>(a.number_or(2, 640));
                          opt.height_px = static_cast<int>(a.number_or(3, 480));
                          try {
                            const auto png = htmlgen::render_chart(htmlgen::ChartKind::scatter, a.numbers(0), a.numbers(1), opt);
                            return Value(htmlgen::embed_png(png));
                          } catch (const htmlgen::HtmlError& e) {
                            throw EvalError(e.what());
                          }
                        }};
    return b;
  }();
  return table;
}

void analyze_into(const Node& n, Analysis& out, std::vector<std::string>& bound) {
  switch (n.kind) {
    case Node::Kind::Identifier:
      if (std::find(bound.begin(), bound.end(), n.text) == bound.end() && !lookup_constant(n.text)) {
        out.free_identifiers.insert(n.text);
      }
      return;
    case Node::Kind::Call: {
      if (!is_builtin(n.text)) out.unknown_functions.insert(n.text);
      if (n.text == "integrate") {
        // integrate(f, lower, upper, var = "x"): f's variable is bound.
        std::string var = "x";
        std::size_t f_index = 0;
        bool found_f = false;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          if (n.arg_names[i] == "var" && n.children[i]->kind == Node::Kind::String) var = n.children[i]->text;
          if (n.arg_names[i] == "f") {
            f_index = i;
            found_f = true;
          }
        }
        if (!found_f) {
          for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (n.arg_names[i].empty()) {
              f_index = i;
              break;
            }
          }
        }
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          if (i == f_index) {
            bound.push_back(var);
            analyze_into(*n.children[i], out, bound);
            bound.pop_back();
          } else {
            analyze_into(*n.children[i], out, bound);
          }
        }
        return;
      }
      break;
    }
    default:
      break;
  }
  for (const auto& c : n.children) analyze_into(*c, out, bound);
}

}  // namespace

Value eval(const Node& node, const Environment& env, RngStream& rng) {
  Context ctx{env, rng, {}, 0};
  return eval_node(node, ctx);
}

Analysis analyze(const Node& node) {
  Analysis out;
  std::vector<std::string> bound;
  analyze_into(node, out, bound);
  return out;
}

bool is_builtin(std::string_view name) { return builtins().count(std::string(name)) > 0; }

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& [name, spec] : builtins()) out.push_back(name);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace quizforge::expr
