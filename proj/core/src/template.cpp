#include "quizforge/template.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quizforge/cloze.hpp"
#include "quizforge/numfmt.hpp"

namespace quizforge::quiz {
namespace {

using nlohmann::json;

constexpr std::uint64_t kStoryTag = 0x53544f5259ULL;  // "STORY"

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

// Calls `on_slot(name)` for every {{name}} in `text`.
template <typename F>
void for_each_slot(std::string_view text, F on_slot) {
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] != '{' || text[i + 1] != '{') continue;
    std::size_t j = i + 2;
    while (j < text.size() && is_ident_char(text[j])) ++j;
    if (j > i + 2 && j + 1 < text.size() && text[j] == '}' && text[j + 1] == '}' && is_ident_start(text[i + 2])) {
      on_slot(text.substr(i + 2, j - i - 2));
      i = j + 1;
    }
  }
}

std::string escape_braces(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '{') {
      out += "&#123;";
    } else if (c == '}') {
      out += "&#125;";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out.push_back(c);
    }
  }
  return escape_braces(out);
}

std::string json_type(const json& j) { return j.type_name(); }

class Loader {
 public:
  QuizTemplate load(const json& doc) {
    QuizTemplate t;
    if (!doc.is_object()) {
      issue("", "template must be a JSON object");
      return t;
    }
    allow_keys(doc, "", {"schema", "name", "title", "description", "category", "quizname_prefix", "count", "wrap_h5",
                         "stories"});
    if (doc.contains("schema")) {
      if (!doc["schema"].is_string() || doc["schema"].get<std::string>() != kSchemaName) {
        issue("schema", "expected \"" + std::string(kSchemaName) + "\"");
      }
    }
    t.name = required_string(doc, "name", "");
    if (!t.name.empty() && !std::all_of(t.name.begin(), t.name.end(), [](char c) {
          return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
        })) {
      issue("name", "may contain only letters, digits, '_', '-' and '.'");
    }
    t.title = optional_string(doc, "title", "", t.name);
    t.description = optional_string(doc, "description", "", "");
    t.category = required_string(doc, "category", "");
    t.quizname_prefix = optional_string(doc, "quizname_prefix", "", "problem -");
    t.count = optional_int(doc, "count", "", 20, 1, 100000);
    t.wrap_h5 = optional_bool(doc, "wrap_h5", "", true);

    if (!doc.contains("stories")) {
      issue("stories", "missing required field");
    } else if (!doc["stories"].is_array()) {
      issue("stories", "expected an array");
    } else if (doc["stories"].empty()) {
      issue("stories", "template needs at least one story");
    } else {
      for (std::size_t i = 0; i < doc["stories"].size(); ++i) {
        t.stories.push_back(load_story(doc["stories"][i], "stories[" + std::to_string(i) + "]"));
      }
    }
    return t;
  }

  std::vector<Issue> issues;

 private:
  void issue(std::string path, std::string message) { issues.push_back({std::move(path), std::move(message)}); }

  static std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
  }

  void allow_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
    for (const auto& [key, value] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) issue(join(path, key), "unknown field");
    }
  }

  std::string required_string(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) {
      issue(join(path, key), "missing required field");
      return {};
    }
    if (!obj[key].is_string()) {
      issue(join(path, key), "expected a string, got " + json_type(obj[key]));
      return {};
    }
    std::string s = obj[key].get<std::string>();
    if (s.find_first_not_of(" \t\r\n") == std::string::npos) issue(join(path, key), "must not be empty");
    return s;
  }

  std::string optional_string(const json& obj, const std::string& key, const std::string& path, std::string fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) {
      issue(join(path, key), "expected a string, got " + json_type(obj[key]));
      return fallback;
    }
    return obj[key].get<std::string>();
  }

  std::string optional_string(const json& obj, const std::string& key, const std::string& path, const char* fallback,
                              const std::string& alt) {
    return optional_string(obj, key, path, alt.empty() ? std::string(fallback) : alt);
  }

  int as_int(const json& j, const std::string& path, int lo, int hi) {
    if (!j.is_number()) {
      issue(path, "expected an integer, got " + json_type(j));
      return lo;
    }
    const double v = j.get<double>();
    if (v != std::floor(v)) {
      issue(path, "expected an integer, got " + format_number(v));
      return lo;
    }
    if (v < lo || v > hi) {
      issue(path, format_number(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return lo;
    }
    return static_cast<int>(v);
  }

  int optional_int(const json& obj, const std::string& key, const std::string& path, int fallback, int lo, int hi) {
    if (!obj.contains(key)) return fallback;
    return as_int(obj[key], join(path, key), lo, hi);
  }

  bool optional_bool(const json& obj, const std::string& key, const std::string& path, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) {
      issue(join(path, key), "expected true or false, got " + json_type(obj[key]));
      return fallback;
    }
    return obj[key].get<bool>();
  }

  std::optional<Computed> computed(const json& j, const std::string& path) {
    std::string source;
    if (j.is_number()) {
      source = j.dump();
    } else if (j.is_string()) {
      source = j.get<std::string>();
    } else {
      issue(path, "expected a number or an expression string, got " + json_type(j));
      return std::nullopt;
    }
    try {
      Computed c{source, expr::parse_expr(source)};
      const expr::Analysis a = expr::analyze(*c.node);
      for (const auto& f : a.unknown_functions) issue(path, "unknown function '" + f + "'");
      check_names(a.free_identifiers, path, nullptr);
      return c;
    } catch (const expr::SyntaxError& e) {
      issue(path, std::string("syntax error: ") + e.what());
      return std::nullopt;
    }
  }

  std::vector<Computed> computed_list(const json& obj, const std::string& key, const std::string& path) {
    std::vector<Computed> out;
    if (!obj.contains(key)) return out;
    const json& j = obj[key];
    const std::string p = join(path, key);
    if (j.is_array()) {
      if (j.empty()) issue(p, "must not be empty");
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (auto c = computed(j[i], p + "[" + std::to_string(i) + "]")) out.push_back(*c);
      }
    } else if (auto c = computed(j, p)) {
      out.push_back(*c);
    }
    return out;
  }

  std::vector<int> weight_list(const json& obj, const std::string& path, std::size_t default_count) {
    if (!obj.contains("weights")) return std::vector<int>(default_count, 100);
    const json& j = obj["weights"];
    const std::string p = join(path, "weights");
    std::vector<int> out;
    if (!j.is_array() || j.empty()) {
      issue(p, "expected a nonempty array of percentages");
      return std::vector<int>(default_count, 100);
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string wp = p + "[" + std::to_string(i) + "]";
      if (!j[i].is_number()) {
        issue(wp, "expected an integer percentage, got " + json_type(j[i]));
        out.push_back(0);
        continue;
      }
      const double v = j[i].get<double>();
      if (v != std::floor(v)) {
        issue(wp, "weight " + format_number(v) + " is not an integer");
      } else if (v < 0 || v > 100) {
        issue(wp, "weight " + format_number(v) + " outside [0, 100]");
      }
      out.push_back(static_cast<int>(std::clamp(v, 0.0, 100.0)));
    }
    if (std::find(out.begin(), out.end(), 100) == out.end()) issue(p, "no answer has weight 100");
    return out;
  }

  std::vector<std::string> text_list(const json& obj, const std::string& key, const std::string& path) {
    std::vector<std::string> out;
    const std::string p = join(path, key);
    if (!obj.contains(key)) return out;
    const json& j = obj[key];
    if (!j.is_array() || j.empty()) {
      issue(p, "expected a nonempty array of strings");
      return out;
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string tp = p + "[" + std::to_string(i) + "]";
      if (!j[i].is_string() || j[i].get<std::string>().empty()) {
        issue(tp, "expected a nonempty string");
        continue;
      }
      out.push_back(j[i].get<std::string>());
      check_slots(out.back(), tp);
    }
    return out;
  }

  // Names visible at this point of the story: everything defined so far.
  void check_names(const std::set<std::string>& names, const std::string& path, const std::string* defining) {
    for (const auto& n : names) {
      if (std::find(defined_.begin(), defined_.end(), n) != defined_.end()) continue;
      if (defining && std::find(all_vars_.begin(), all_vars_.end(), n) != all_vars_.end()) {
        issue(path, "variable '" + *defining + "' refers to '" + n + "', which is defined later (or is itself)");
      } else {
        issue(path, "unknown variable '" + n + "'");
      }
    }
  }

  void check_slots(std::string_view text, const std::string& path) {
    std::set<std::string> names;
    for_each_slot(text, [&](std::string_view n) { names.insert(std::string(n)); });
    check_names(names, path, nullptr);
  }

  Story load_story(const json& j, const std::string& path) {
    Story s;
    if (!j.is_object()) {
      issue(path, "expected an object");
      return s;
    }
    allow_keys(j, path, {"weight", "variables", "parts", "hint", "answer_text", "display_after"});
    if (j.contains("weight")) {
      if (!j["weight"].is_number() || !(j["weight"].get<double>() > 0)) {
        issue(join(path, "weight"), "expected a positive number");
      } else {
        s.weight = j["weight"].get<double>();
      }
    }
    defined_.clear();
    all_vars_.clear();
    if (j.contains("variables")) {
      const json& vars = j["variables"];
      if (!vars.is_array()) {
        issue(join(path, "variables"), "expected an array");
      } else {
        for (const auto& v : vars) {
          if (v.is_object() && v.contains("name") && v["name"].is_string()) all_vars_.push_back(v["name"].get<std::string>());
        }
        for (std::size_t i = 0; i < vars.size(); ++i) load_variable(vars[i], path + ".variables[" + std::to_string(i) + "]", s);
      }
    }
    if (!j.contains("parts")) {
      issue(join(path, "parts"), "missing required field");
    } else if (!j["parts"].is_array()) {
      issue(join(path, "parts"), "expected an array");
    } else if (j["parts"].empty()) {
      issue(join(path, "parts"), "story needs at least one part");
    } else {
      for (std::size_t i = 0; i < j["parts"].size(); ++i) {
        s.parts.push_back(load_part(j["parts"][i], path + ".parts[" + std::to_string(i) + "]"));
      }
    }
    s.hint = optional_string(j, "hint", path, "");
    check_slots(s.hint, join(path, "hint"));
    s.answer_text = optional_string(j, "answer_text", path, "");
    check_slots(s.answer_text, join(path, "answer_text"));
    if (j.contains("display_after")) s.display_after = computed(j["display_after"], join(path, "display_after"));
    return s;
  }

  void load_variable(const json& v, const std::string& path, Story& s) {
    if (!v.is_object()) {
      issue(path, "expected an object with 'name' and 'expr'");
      return;
    }
    allow_keys(v, path, {"name", "expr"});
    const std::string name = required_string(v, "name", path);
    if (!name.empty() && !is_identifier(name)) issue(join(path, "name"), "'" + name + "' is not a valid identifier");
    if (std::find(defined_.begin(), defined_.end(), name) != defined_.end()) {
      issue(join(path, "name"), "variable '" + name + "' is defined twice");
    }
    if (!v.contains("expr")) {
      issue(join(path, "expr"), "missing required field");
      defined_.push_back(name);
      return;
    }
    std::optional<Computed> c;
    const std::string epath = join(path, "expr");
    if (v["expr"].is_string() || v["expr"].is_number()) {
      const std::string source = v["expr"].is_string() ? v["expr"].get<std::string>() : v["expr"].dump();
      try {
        c = Computed{source, expr::parse_expr(source)};
        const expr::Analysis a = expr::analyze(*c->node);
        for (const auto& f : a.unknown_functions) issue(epath, "unknown function '" + f + "'");
        check_names(a.free_identifiers, epath, &name);
      } catch (const expr::SyntaxError& e) {
        issue(epath, std::string("syntax error: ") + e.what());
        c.reset();
      }
    } else {
      issue(epath, "expected an expression string, got " + json_type(v["expr"]));
    }
    defined_.push_back(name);
    if (c) s.variables.push_back({name, *c});
  }

  QuestionPart load_part(const json& j, const std::string& path) {
    QuestionPart p{"", DisplayOnly{}, true};
    if (!j.is_object()) {
      issue(path, "expected an object");
      return p;
    }
    allow_keys(j, path, {"text", "answer", "newline"});
    p.text = optional_string(j, "text", path, "");
    if (std::count(p.text.begin(), p.text.end(), '@') > 1) issue(join(path, "text"), "at most one '@' insertion mark is allowed");
    check_slots(p.text, join(path, "text"));
    p.newline = optional_bool(j, "newline", path, true);
    if (!j.contains("answer")) {
      issue(join(path, "answer"), "missing required field");
      return p;
    }
    p.answer = load_answer(j["answer"], join(path, "answer"));
    return p;
  }

  AnswerSpec load_answer(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
      issue(path, "expected an object with a 'type' of numeric, choice, shortanswer or display");
      return DisplayOnly{};
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "numeric") return load_numeric(j, path);
    if (type == "choice") return load_choice(j, path);
    if (type == "shortanswer") return load_short(j, path);
    if (type == "display") {
      allow_keys(j, path, {"type", "value"});
      DisplayOnly d;
      if (j.contains("value")) d.value = computed(j["value"], join(path, "value"));
      return d;
    }
    issue(join(path, "type"), "unknown answer type '" + type + "'");
    return DisplayOnly{};
  }

  NumericAnswer load_numeric(const json& j, const std::string& path) {
    allow_keys(j, path, {"type", "targets", "weights", "tolerances", "ndigits", "partial_weight", "points"});
    NumericAnswer a;
    if (!j.contains("targets")) issue(join(path, "targets"), "missing required field");
    a.targets = computed_list(j, "targets", path);
    a.points = optional_int(j, "points", path, 1, 1, 1000);
    if (j.contains("ndigits")) {
      if (j.contains("weights") || j.contains("tolerances")) {
        issue(path, "'ndigits' cannot be combined with 'weights' or 'tolerances'");
      }
      a.ndigits = computed(j["ndigits"], join(path, "ndigits"));
      a.partial_weight = optional_int(j, "partial_weight", path, 80, 0, 100);
      if (a.targets.size() > 1) issue(join(path, "targets"), "'ndigits' needs exactly one target");
      return a;
    }
    if (j.contains("partial_weight")) issue(join(path, "partial_weight"), "only meaningful together with 'ndigits'");
    a.weights = weight_list(j, path, 1);
    a.tolerances = computed_list(j, "tolerances", path);
    if (a.tolerances.empty()) a.tolerances.push_back(Computed{"0", expr::parse_expr("0")});
    if (j.contains("tolerances") && j["tolerances"].is_array()) {
      for (std::size_t i = 0; i < j["tolerances"].size(); ++i) {
        if (j["tolerances"][i].is_number() && j["tolerances"][i].get<double>() < 0) {
          issue(join(path, "tolerances") + "[" + std::to_string(i) + "]", "tolerance must be nonnegative");
        }
      }
    }
    const std::size_t n = a.weights.size();
    if (!a.targets.empty() && a.targets.size() != 1 && a.targets.size() != n) {
      issue(join(path, "targets"), "expected 1 or " + std::to_string(n) + " entries (one per weight)");
    }
    if (a.tolerances.size() != 1 && a.tolerances.size() != n) {
      issue(join(path, "tolerances"), "expected 1 or " + std::to_string(n) + " entries (one per weight)");
    }
    return a;
  }

  ChoiceAnswer load_choice(const json& j, const std::string& path) {
    allow_keys(j, path, {"type", "options", "builtin", "correct", "weights", "points"});
    ChoiceAnswer a;
    a.points = optional_int(j, "points", path, 1, 1, 1000);
    std::size_t count = 0;
    if (j.contains("options") == j.contains("builtin")) {
      issue(path, "give exactly one of 'options' or 'builtin'");
    } else if (j.contains("options")) {
      a.options = text_list(j, "options", path);
      count = a.options.size();
    } else {
      a.builtin = as_int(j["builtin"], join(path, "builtin"), 1, 11);
      count = cloze::builtin_mc_options(a.builtin).size();
    }
    if (j.contains("correct") == j.contains("weights")) {
      issue(path, "give exactly one of 'correct' or 'weights'");
    } else if (j.contains("correct")) {
      a.correct = computed(j["correct"], join(path, "correct"));
    } else {
      a.weights = computed_list(j, "weights", path);
      if (count != 0 && a.weights.size() != count) {
        issue(join(path, "weights"), "expected " + std::to_string(count) + " entries (one per option)");
      }
      if (j["weights"].is_array()) {
        for (std::size_t i = 0; i < j["weights"].size(); ++i) {
          const json& w = j["weights"][i];
          if (w.is_number()) as_int(w, join(path, "weights") + "[" + std::to_string(i) + "]", 0, 100);
        }
      }
    }
    return a;
  }

  ShortAnswer load_short(const json& j, const std::string& path) {
    allow_keys(j, path, {"type", "texts", "weights", "caps", "points"});
    ShortAnswer a;
    if (!j.contains("texts")) issue(join(path, "texts"), "missing required field");
    a.texts = text_list(j, "texts", path);
    a.weights = weight_list(j, path, std::max<std::size_t>(a.texts.size(), 1));
    if (!a.texts.empty() && a.weights.size() != a.texts.size()) {
      issue(join(path, "weights"), "expected " + std::to_string(a.texts.size()) + " entries (one per text)");
    }
    a.caps_insensitive = optional_bool(j, "caps", path, true);
    a.points = optional_int(j, "points", path, 1, 1, 1000);
    return a;
  }

  std::vector<std::string> defined_;
  std::vector<std::string> all_vars_;
};

// ---------------------------------------------------------------- rendering

class Renderer {
 public:
  Renderer(const QuizTemplate& t, std::size_t index, const Story& story, RngStream& rng)
      : t_(t), index_(index), story_(story), rng_(rng) {}

  [[noreturn]] void fail(const std::string& where, const std::string& message) const {
    throw GenerationError(index_, where + ": " + message);
  }

  expr::Value eval(const Computed& c, const std::string& where) {
    try {
      return expr::eval(*c.node, env, rng_);
    } catch (const expr::EvalError& e) {
      fail(where, "'" + c.source + "': " + e.what());
    }
  }

  double number(const Computed& c, const std::string& where) {
    try {
      return eval(c, where).as_number(c.source);
    } catch (const expr::EvalError& e) {
      fail(where, e.what());
    }
  }

  std::string text(std::string_view s) { return interpolate(s, env); }

  void evaluate_variables() {
    for (const Variable& v : story_.variables) {
      try {
        env.insert_or_assign(v.name, expr::eval(*v.value.node, env, rng_));
      } catch (const expr::EvalError& e) {
        fail("variable '" + v.name + "'", e.what());
      }
    }
  }

  struct Piece {
    std::string insert;  // CLOZE group or display HTML
    std::optional<std::string> key;
  };

  Piece build(const QuestionPart& part, const std::string& where) {
    return std::visit([&](const auto& spec) { return build_spec(spec, where); }, part.answer);
  }

  expr::Environment env;

 private:
  Piece build_spec(const NumericAnswer& a, const std::string& where) {
    try {
      if (a.ndigits) {
        const double target = number(a.targets.at(0), where + ".targets[0]");
        const double nd = number(*a.ndigits, where + ".ndigits");
        if (nd < 0 || nd != std::floor(nd) || nd > 15) fail(where + ".ndigits", "expected a whole number in [0, 15]");
        const cloze::SubQuestion sub = cloze::nm_digits_question(target, static_cast<int>(nd), a.points, a.partial_weight);
        return {cloze::encode(sub), cloze::full_credit_response(sub)};
      }
      std::vector<double> targets, tolerances;
      for (std::size_t i = 0; i < a.targets.size(); ++i) {
        targets.push_back(number(a.targets[i], where + ".targets[" + std::to_string(i) + "]"));
      }
      for (std::size_t i = 0; i < a.tolerances.size(); ++i) {
        tolerances.push_back(number(a.tolerances[i], where + ".tolerances[" + std::to_string(i) + "]"));
      }
      const std::string group = cloze::encode_nm(targets, a.weights, tolerances, a.points);
      const auto full = static_cast<std::size_t>(std::find(a.weights.begin(), a.weights.end(), 100) - a.weights.begin());
      return {group, format_number(targets[targets.size() == 1 ? 0 : full])};
    } catch (const cloze::ClozeError& e) {
      fail(where, e.what());
    } catch (const std::invalid_argument& e) {
      fail(where, e.what());
    } catch (const std::domain_error& e) {
      fail(where, e.what());
    }
  }

  Piece build_spec(const ChoiceAnswer& a, const std::string& where) {
    std::vector<std::string> options;
    if (a.builtin != 0) {
      options = cloze::builtin_mc_options(a.builtin);
    } else {
      for (const auto& o : a.options) options.push_back(text(o));
    }
    std::vector<int> weights(options.size(), 0);
    if (a.correct) {
      const expr::Value v = eval(*a.correct, where + ".correct");
      if (v.is_text()) {
        const std::string want = v.as_text();
        const auto it = std::find(options.begin(), options.end(), want);
        if (it == options.end()) fail(where + ".correct", "'" + want + "' is not one of the options");
        weights[static_cast<std::size_t>(it - options.begin())] = 100;
      } else {
        const double k = number(*a.correct, where + ".correct");
        if (k != std::floor(k) || k < 1 || k > static_cast<double>(options.size())) {
          fail(where + ".correct", "option number " + format_number(k) + " outside 1.." + std::to_string(options.size()));
        }
        weights[static_cast<std::size_t>(k) - 1] = 100;
      }
    } else {
      for (std::size_t i = 0; i < a.weights.size() && i < weights.size(); ++i) {
        const double w = number(a.weights[i], where + ".weights[" + std::to_string(i) + "]");
        if (w != std::floor(w) || w < 0 || w > 100) fail(where + ".weights[" + std::to_string(i) + "]", "weight " + format_number(w) + " outside [0, 100]");
        weights[i] = static_cast<int>(w);
      }
    }
    try {
      const cloze::McQuestion mc = cloze::encode_mc(options, weights, a.points);
      return {mc.question, mc.correct_text};
    } catch (const cloze::ClozeError& e) {
      fail(where, e.what());
    } catch (const std::invalid_argument& e) {
      fail(where, e.what());
    }
  }

  Piece build_spec(const ShortAnswer& a, const std::string& where) {
    std::vector<std::string> texts;
    for (const auto& s : a.texts) texts.push_back(text(s));
    try {
      const std::string group = cloze::encode_sa(texts, a.weights, a.caps_insensitive, a.points);
      const auto full = static_cast<std::size_t>(std::find(a.weights.begin(), a.weights.end(), 100) - a.weights.begin());
      return {group, texts.at(full)};
    } catch (const cloze::ClozeError& e) {
      fail(where, e.what());
    } catch (const std::invalid_argument& e) {
      fail(where, e.what());
    }
  }

  Piece build_spec(const DisplayOnly& d, const std::string& where) {
    if (!d.value) return {"", std::nullopt};
    return {escape_braces(expr::format_value(eval(*d.value, where + ".value"))), std::nullopt};
  }

  const QuizTemplate& t_;
  std::size_t index_;
  const Story& story_;
  RngStream& rng_;
};

int choose_story(const QuizTemplate& t, std::uint64_t seed, std::size_t index) {
  if (t.stories.size() == 1) return 1;
  RngStream pick = derive_stream(seed, index).substream(kStoryTag);
  double total = 0;
  for (const Story& s : t.stories) total += s.weight;
  const double u = pick.next_uniform() * total;
  double acc = 0;
  for (std::size_t i = 0; i < t.stories.size(); ++i) {
    acc += t.stories[i].weight;
    if (u < acc) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(t.stories.size());
}

std::string wrap(const QuizTemplate& t, const std::string& s) { return t.wrap_h5 ? "<h5>" + s + "</h5>" : s; }

}  // namespace

TemplateError::TemplateError(std::vector<Issue> issues)
    : std::runtime_error([&] {
        std::string msg = "invalid template";
        for (const auto& i : issues) msg += "\n  " + i.to_string();
        return msg;
      }()),
      issues_(std::move(issues)) {}

GenerationError::GenerationError(std::size_t index, const std::string& message)
    : std::runtime_error("instance " + std::to_string(index + 1) + ": " + message), index_(index) {}

QuizTemplate load_template(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw TemplateError({{"", std::string("malformed JSON: ") + e.what()}});
  }
  Loader loader;
  QuizTemplate t = loader.load(doc);
  if (!loader.issues.empty()) throw TemplateError(std::move(loader.issues));
  t.source = std::string(json_text);
  return t;
}

QuizTemplate load_template_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_template(buf.str());
}

std::string interpolate(std::string_view text, const expr::Environment& env) {
  std::string out;
  std::size_t last = 0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] != '{' || text[i + 1] != '{' || i + 2 >= text.size() || !is_ident_start(text[i + 2])) continue;
    std::size_t j = i + 2;
    while (j < text.size() && is_ident_char(text[j])) ++j;
    if (j + 1 >= text.size() || text[j] != '}' || text[j + 1] != '}') continue;
    const std::string_view name = text.substr(i + 2, j - i - 2);
    const auto it = env.find(name);
    if (it == env.end()) throw expr::EvalError("unknown variable '" + std::string(name) + "' in text");
    out.append(text.substr(last, i - last));
    out += escape_braces(expr::format_value(it->second));
    last = j + 2;
    i = j + 1;
  }
  out.append(text.substr(last));
  return out;
}

std::string insert_at_mark(std::string_view text, std::string_view insert) {
  const std::size_t at = text.find('@');
  if (at == std::string_view::npos) return std::string(text) + std::string(insert);
  return std::string(text.substr(0, at)) + std::string(insert) + std::string(text.substr(at + 1));
}

QuizInstance instantiate(const QuizTemplate& t, std::uint64_t seed, std::size_t index, std::optional<int> story_override) {
  if (t.stories.empty()) throw GenerationError(index, "template has no stories");
  int story = 0;
  if (story_override) {
    if (*story_override < 1 || *story_override > static_cast<int>(t.stories.size())) {
      throw GenerationError(index, "story " + std::to_string(*story_override) + " does not exist (template has " +
                                       std::to_string(t.stories.size()) + ")");
    }
    story = *story_override;
  } else {
    story = choose_story(t, seed, index);
  }
  const Story& s = t.stories[static_cast<std::size_t>(story - 1)];
  RngStream rng = derive_stream(seed, index);
  Renderer r(t, index, s, rng);
  r.evaluate_variables();

  QuizInstance inst;
  inst.story = story;
  std::string question, answered;
  const std::string spath = "stories[" + std::to_string(story - 1) + "]";
  for (std::size_t i = 0; i < s.parts.size(); ++i) {
    const QuestionPart& part = s.parts[i];
    const std::string where = spath + ".parts[" + std::to_string(i) + "]";
    const Renderer::Piece piece = r.build(part, where + ".answer");
    const std::size_t at = part.text.find('@');
    std::string before, after;
    try {
      before = r.text(std::string_view(part.text).substr(0, at));
      after = at == std::string::npos ? "" : r.text(std::string_view(part.text).substr(at + 1));
    } catch (const expr::EvalError& e) {
      r.fail(where + ".text", e.what());
    }
    const std::string lead = part.newline ? "<p>" : "";
    question += lead + before + piece.insert + after;
    answered += lead + before + (piece.key ? "<b>" + html_escape(*piece.key) + "</b>" : piece.insert) + after;
    if (piece.key) inst.answer_key.push_back(*piece.key);
  }
  inst.qtxt = wrap(t, question);
  if (s.display_after) {
    try {
      inst.qtxt += escape_braces(expr::format_value(expr::eval(*s.display_after->node, r.env, rng)));
    } catch (const expr::EvalError& e) {
      r.fail(spath + ".display_after", e.what());
    }
  }
  try {
    inst.htxt = s.hint.empty() ? "" : wrap(t, r.text(s.hint));
    inst.atxt = wrap(t, s.answer_text.empty() ? answered : r.text(s.answer_text));
  } catch (const expr::EvalError& e) {
    r.fail(spath, e.what());
  }
  inst.category = t.category;
  if (t.stories.size() > 1) inst.category += " : Story : " + std::to_string(story);
  inst.quizname = t.quizname_prefix + " " + std::to_string(index + 1);
  inst.values = std::move(r.env);
  return inst;
}

Batch instantiate_batch(const QuizTemplate& t, std::uint64_t seed, std::size_t n, std::optional<int> story_override) {
  if (n < 1) throw std::invalid_argument("n must be ≥ 1");
  Batch b;
  b.instances.reserve(n);
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < n; ++i) {
    b.instances.push_back(instantiate(t, seed, i, story_override));
    const auto [it, fresh] = seen.emplace(b.instances.back().qtxt, i);
    if (!fresh) {
      b.warnings.push_back("instances " + std::to_string(it->second + 1) + " and " + std::to_string(i + 1) +
                           " have identical question text");
    }
  }
  return b;
}

}  // namespace quizforge::quiz
