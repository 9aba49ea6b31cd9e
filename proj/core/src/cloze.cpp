#include "quizforge/cloze.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "quizforge/numfmt.hpp"

namespace quizforge::cloze {
namespace {

constexpr std::string_view kSpecials = "}~#%";

bool is_special(char c) { return kSpecials.find(c) != std::string_view::npos; }

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (is_special(c)) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string unescape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size() && is_special(text[i + 1])) {
      out.push_back(text[++i]);
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

// Positions of unescaped `sep` in `text`.
std::vector<std::size_t> find_unescaped(std::string_view text, char sep) {
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size() && is_special(text[i + 1])) {
      ++i;
    } else if (text[i] == sep) {
      hits.push_back(i);
    }
  }
  return hits;
}

std::size_t find_first_unescaped(std::string_view text, char sep, std::size_t from = 0) {
  for (std::size_t i = from; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size() && is_special(text[i + 1])) {
      ++i;
    } else if (text[i] == sep) {
      return i;
    }
  }
  return std::string_view::npos;
}

std::optional<Kind> kind_from_token(std::string_view token) {
  if (token == "NM" || token == "NUMERICAL") return Kind::NM;
  if (token == "MC" || token == "MULTICHOICE") return Kind::MC;
  if (token == "SA" || token == "SHORTANSWER") return Kind::SA;
  if (token == "SAC" || token == "SHORTANSWER_C") return Kind::SAC;
  return std::nullopt;
}

bool is_text_kind(Kind kind) { return kind != Kind::NM; }

double half_unit(int ndigits) {
  // 0.5 * 10^-ndigits, built from its decimal spelling so it is the
  // nearest double to the intended tolerance.
  std::string s = "5e" + std::to_string(-ndigits - 1);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool wildcard_match(std::string_view pattern, std::string_view text) {
  std::size_t p = 0;
  std::size_t t = 0;
  std::size_t star = std::string_view::npos;
  std::size_t resume = 0;
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      resume = t;
    } else if (p < pattern.size() && pattern[p] == text[t]) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++resume;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

void check_text(std::string_view text, const char* what) {
  if (text.empty()) throw ClozeError(std::string(what) + " text must not be empty");
  if (text.back() == '\\') {
    throw ClozeError(std::string(what) + " text must not end with a backslash");
  }
}

std::string encode_answer_body(Kind kind, const Answer& a) {
  std::string out;
  if (kind == Kind::NM) {
    out += format_number(std::get<double>(a.target));
    out.push_back(':');
    out += format_number(a.tolerance);
  } else {
    out += escape(std::get<std::string>(a.target));
  }
  if (a.feedback) {
    out.push_back('#');
    out += escape(*a.feedback);
  }
  return out;
}

Answer parse_answer(Kind kind, std::string_view raw, std::size_t base) {
  Answer a;
  std::string_view rest = raw;
  if (!rest.empty() && rest.front() == '=') {
    a.weight = 100;
    rest.remove_prefix(1);
  } else if (!rest.empty() && rest.front() == '%') {
    const std::size_t close = rest.find('%', 1);
    if (close == std::string_view::npos) throw ClozeError("malformed weight: missing closing '%'", base);
    const std::string_view digits = rest.substr(1, close - 1);
    int w = -1;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), w);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
      throw ClozeError("malformed weight '" + std::string(digits) + "'", base);
    }
    if (w < 0 || w > 100) {
      throw ClozeError("weight " + std::to_string(w) + " outside [0,100]", base);
    }
    a.weight = w;
    rest.remove_prefix(close + 1);
  } else {
    a.weight = is_text_kind(kind) && kind != Kind::MC ? 100 : 0;
  }

  const std::size_t hash = find_first_unescaped(rest, '#');
  if (hash != std::string_view::npos) {
    a.feedback = unescape(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }

  if (kind == Kind::NM) {
    const std::size_t colon = rest.find(':');
    const auto value = parse_number(rest.substr(0, colon));
    if (!value) throw ClozeError("malformed numeric answer '" + std::string(rest) + "'", base);
    a.target = *value;
    if (colon != std::string_view::npos) {
      const auto tol = parse_number(rest.substr(colon + 1));
      if (!tol || *tol < 0) {
        throw ClozeError("malformed tolerance '" + std::string(rest.substr(colon + 1)) + "'", base);
      }
      a.tolerance = *tol;
    }
  } else {
    std::string text = unescape(rest);
    if (text.empty()) throw ClozeError("empty answer text", base);
    a.target = std::move(text);
  }
  return a;
}

struct Header {
  std::size_t body_start = 0;
  std::string_view points;
  std::string_view kind;
};

// Recognises "{digits:KIND:" at `text[pos]`.
std::optional<Header> match_header(std::string_view text, std::size_t pos) {
  std::size_t i = pos + 1;
  const std::size_t points_start = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i >= text.size() || text[i] != ':') return std::nullopt;
  const std::string_view points = text.substr(points_start, i - points_start);
  const std::size_t kind_start = ++i;
  while (i < text.size() && (std::isupper(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
  if (i == kind_start || i >= text.size() || text[i] != ':') return std::nullopt;
  return Header{i + 1, points, text.substr(kind_start, i - kind_start)};
}

SubQuestion parse_group_body(const Header& h, std::string_view body, std::size_t body_offset) {
  SubQuestion sub;
  const auto kind = kind_from_token(h.kind);
  if (!kind) throw ClozeError("unknown kind token '" + std::string(h.kind) + "'", 0);
  sub.kind = *kind;
  if (h.points.empty()) {
    sub.points = 1;
  } else {
    auto [ptr, ec] = std::from_chars(h.points.data(), h.points.data() + h.points.size(), sub.points);
    if (ec != std::errc{} || sub.points < 1) throw ClozeError("points must be a positive integer", 0);
  }

  std::vector<std::size_t> cuts = find_unescaped(body, '~');
  std::size_t start = 0;
  cuts.push_back(body.size());
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const std::string_view piece = body.substr(start, cuts[k] - start);
    if (piece.empty()) {
      if (k != 0) throw ClozeError("empty answer alternative", body_offset + start);
    } else {
      sub.answers.push_back(parse_answer(sub.kind, piece, body_offset + start));
    }
    start = cuts[k] + 1;
  }
  try {
    validate(sub);
  } catch (const ClozeError& e) {
    throw ClozeError(e.what(), 0);
  }
  return sub;
}

}  // namespace

std::string_view kind_token(Kind kind) {
  switch (kind) {
    case Kind::NM:
      return "NM";
    case Kind::MC:
      return "MC";
    case Kind::SA:
      return "SA";
    case Kind::SAC:
      return "SAC";
  }
  return "NM";
}

void validate(const SubQuestion& sub) {
  if (sub.points < 1) throw ClozeError("points must be a positive integer");
  if (sub.answers.empty()) throw ClozeError("a subquestion needs at least one answer");
  bool has_full = false;
  for (const Answer& a : sub.answers) {
    if (a.weight < 0 || a.weight > 100) {
      throw ClozeError("weight " + std::to_string(a.weight) + " outside [0,100]");
    }
    has_full = has_full || a.weight == 100;
    if (sub.kind == Kind::NM) {
      const double* v = std::get_if<double>(&a.target);
      if (!v) throw ClozeError("NM answers need a numeric target");
      if (!std::isfinite(*v)) throw ClozeError("NM target must be finite");
      if (!std::isfinite(a.tolerance) || a.tolerance < 0) {
        throw ClozeError("tolerance must be a finite number >= 0");
      }
    } else {
      const std::string* s = std::get_if<std::string>(&a.target);
      if (!s) throw ClozeError("text answers need a text target");
      check_text(*s, "answer");
      if (a.tolerance != 0.0) throw ClozeError("tolerance is only meaningful for NM answers");
    }
    if (a.feedback && !a.feedback->empty() && a.feedback->back() == '\\') {
      throw ClozeError("feedback text must not end with a backslash");
    }
  }
  if (!has_full) throw ClozeError("no answer with weight 100");
}

std::string encode(const SubQuestion& sub) {
  validate(sub);
  std::string out = "{" + std::to_string(sub.points) + ":" + std::string(kind_token(sub.kind)) + ":";
  for (std::size_t i = 0; i < sub.answers.size(); ++i) {
    const Answer& a = sub.answers[i];
    if (sub.kind == Kind::MC || i > 0) out.push_back('~');
    const bool implicit_full = (sub.kind == Kind::SA || sub.kind == Kind::SAC) && a.weight == 100 &&
                               std::get<std::string>(a.target).front() != '=';
    if (!implicit_full) out += "%" + std::to_string(a.weight) + "%";
    out += encode_answer_body(sub.kind, a);
  }
  out.push_back('}');
  return out;
}

std::string encode_nm(std::span<const double> targets, std::span<const int> weights,
                      std::span<const double> tolerances, int points) {
  const std::size_t n = weights.size();
  if (n == 0) throw ClozeError("encode_nm needs at least one weight");
  auto fits = [n](std::size_t m) { return m == n || m == 1; };
  if (!fits(targets.size()) || !fits(tolerances.size())) {
    throw ClozeError("targets, weights and tolerances must have equal length");
  }
  SubQuestion sub{Kind::NM, points, {}};
  for (std::size_t i = 0; i < n; ++i) {
    Answer a;
    a.weight = weights[i];
    a.target = targets[targets.size() == 1 ? 0 : i];
    a.tolerance = tolerances[tolerances.size() == 1 ? 0 : i];
    if (a.tolerance < 0) throw ClozeError("negative tolerance");
    sub.answers.push_back(std::move(a));
  }
  return encode(sub);
}

SubQuestion nm_digits_question(double target, int ndigits, int points, int partial_weight) {
  if (ndigits < 0) throw ClozeError("ndigits must be >= 0");
  SubQuestion sub{Kind::NM, points, {}};
  auto add_band = [&sub](double value, double tol, int weight) {
    for (const Answer& a : sub.answers) {
      if (std::get<double>(a.target) == value) return;  // bands are added best-first
    }
    sub.answers.push_back(Answer{weight, value, tol, std::nullopt});
  };
  add_band(round_half_away(target, ndigits), half_unit(ndigits + 1), 100);
  if (ndigits >= 1) add_band(round_half_away(target, ndigits - 1), half_unit(ndigits), partial_weight);
  add_band(round_half_away(target, ndigits + 1), half_unit(ndigits + 2), partial_weight);
  return sub;
}

std::string encode_nm_digits(double target, int ndigits, int points, int partial_weight) {
  return encode(nm_digits_question(target, ndigits, points, partial_weight));
}

McQuestion encode_mc(std::span<const std::string> options, std::span<const int> weights, int points) {
  if (options.empty() || options.size() != weights.size()) {
    throw ClozeError("options and weights must be nonempty and of equal length");
  }
  SubQuestion sub{Kind::MC, points, {}};
  std::size_t best = 0;
  for (std::size_t i = 0; i < options.size(); ++i) {
    check_text(options[i], "option");
    sub.answers.push_back(Answer{weights[i], options[i], 0.0, std::nullopt});
    if (weights[i] > weights[best]) best = i;
  }
  return McQuestion{encode(sub), options[best]};
}

std::vector<std::string> builtin_mc_options(int index) {
  static const std::array<std::vector<std::string>, 11> sets = {{
      {"lower", "not equal to", "higher", "can't tell"},
      {"lower", "not equal to", "higher"},
      {"is statistically significant", "is not statistically significant"},
      {"is statistically significant", "is not statistically significant", "can't tell"},
      {"is", "is not"},
      {"Male", "Female"},
      {"true", "false"},
      {"has", "does not have"},
      {"\\(\\ne\\)", "\\(<\\)", "\\(>\\)", "can't tell"},
      {"\\(\\ne\\)", "\\(<\\)", "\\(>\\)"},
      {"\\(\\mu\\)", "\\(\\pi\\)", "\\(\\sigma\\)", "\\(\\lambda\\)", "\\(\\rho\\)", "other"},
  }};
  if (index < 1 || index > static_cast<int>(sets.size())) {
    throw ClozeError("builtin option set index must be in 1..11, got " + std::to_string(index));
  }
  return sets[static_cast<std::size_t>(index - 1)];
}

std::string wildcard_text(std::string_view text) {
  std::string out = "*";
  bool in_space = false;
  bool seen = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = seen;
      continue;
    }
    if (in_space) out.push_back('*');
    in_space = false;
    seen = true;
    out.push_back(c);
  }
  if (!seen) throw ClozeError("answer text must not be empty");
  out.push_back('*');
  return out;
}

std::string encode_sa(std::span<const std::string> texts, std::span<const int> weights,
                      bool caps_insensitive, int points) {
  if (texts.empty()) throw ClozeError("encode_sa needs at least one text");
  if (weights.size() != texts.size() && weights.size() != 1) {
    throw ClozeError("texts and weights must have equal length");
  }
  SubQuestion sub{caps_insensitive ? Kind::SA : Kind::SAC, points, {}};
  for (std::size_t i = 0; i < texts.size(); ++i) {
    sub.answers.push_back(
        Answer{weights[weights.size() == 1 ? 0 : i], wildcard_text(texts[i]), 0.0, std::nullopt});
  }
  return encode(sub);
}

ParsedText parse_cloze(std::string_view text) {
  ParsedText out;
  std::size_t segment_start = 0;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    const auto header = match_header(text, pos);
    if (!header) {
      ++pos;
      continue;
    }
    const std::size_t close = find_first_unescaped(text, '}', header->body_start);
    if (close == std::string_view::npos) {
      out.diagnostics.push_back({pos, "unbalanced braces: CLOZE group is never closed"});
      break;
    }
    try {
      SubQuestion sub = parse_group_body(
          *header, text.substr(header->body_start, close - header->body_start), header->body_start - pos);
      out.segments.emplace_back(text.substr(segment_start, pos - segment_start));
      out.subquestions.push_back(std::move(sub));
      segment_start = close + 1;
    } catch (const ClozeError& e) {
      out.diagnostics.push_back({pos + e.offset(), e.what()});
    }
    pos = close + 1;
  }
  out.segments.emplace_back(text.substr(segment_start));
  return out;
}

SubQuestion parse_subquestion(std::string_view group) {
  if (group.empty() || group.front() != '{') throw ClozeError("a CLOZE group starts with '{'");
  const auto header = match_header(group, 0);
  if (!header) throw ClozeError("malformed CLOZE header");
  const std::size_t close = find_first_unescaped(group, '}', header->body_start);
  if (close == std::string_view::npos) throw ClozeError("unbalanced braces", 0);
  if (close + 1 != group.size()) throw ClozeError("trailing text after CLOZE group", close + 1);
  try {
    return parse_group_body(*header, group.substr(header->body_start, close - header->body_start),
                            header->body_start);
  } catch (const ClozeError& e) {
    throw ClozeError(e.what(), e.offset());
  }
}

namespace {

using Rational = boost::multiprecision::cpp_rational;
using boost::multiprecision::cpp_int;

// Exact value of a decimal literal that parse_number accepted, so that
// "54.6" is exactly 0.1 away from 54.7.
std::optional<Rational> decimal_value(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  bool negative = false;
  if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  std::string digits;
  long long exp10 = 0;
  std::size_t i = 0;
  bool fraction = false;
  for (; i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.'); ++i) {
    if (text[i] == '.') {
      fraction = true;
    } else {
      digits.push_back(text[i]);
      if (fraction) --exp10;
    }
  }
  if (i < text.size()) {
    long long e = 0;
    std::string_view rest = text.substr(i + 1);
    if (!rest.empty() && rest.front() == '+') rest.remove_prefix(1);
    const auto r = std::from_chars(rest.data(), rest.data() + rest.size(), e);
    if (r.ec != std::errc{}) return std::nullopt;
    exp10 += e;
  }
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size()));
  if (digits.empty()) return Rational(0);
  if (exp10 > 20000 || exp10 < -20000) return std::nullopt;
  Rational v{cpp_int(digits)};
  const cpp_int scale = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(exp10 < 0 ? -exp10 : exp10));
  if (exp10 < 0) {
    v /= scale;
  } else {
    v *= scale;
  }
  return negative ? Rational(-v) : v;
}

// The decimal as written into the CLOZE string, so an in-memory question
// grades exactly like its encoded form.
Rational exact(double x) { return *decimal_value(format_number(x)); }

}  // namespace

Grade grade(const SubQuestion& sub, std::string_view response) {
  Grade g;
  int best = 0;
  switch (sub.kind) {
    case Kind::NM: {
      const auto value = parse_number(response);
      if (!value) {
        g.non_numeric = true;
        return g;
      }
      const Rational r = decimal_value(response).value_or(exact(*value));
      for (const Answer& a : sub.answers) {
        const Rational d = r - exact(std::get<double>(a.target));
        if (abs(d) <= exact(a.tolerance)) best = std::max(best, a.weight);
      }
      break;
    }
    case Kind::MC:
      for (const Answer& a : sub.answers) {
        if (std::get<std::string>(a.target) == response) best = std::max(best, a.weight);
      }
      break;
    case Kind::SA:
    case Kind::SAC: {
      const bool fold = sub.kind == Kind::SA;
      const std::string r = fold ? ascii_lower(response) : std::string(response);
      for (const Answer& a : sub.answers) {
        const std::string& pattern = std::get<std::string>(a.target);
        if (wildcard_match(fold ? ascii_lower(pattern) : pattern, r)) best = std::max(best, a.weight);
      }
      break;
    }
  }
  g.fraction = best / 100.0;
  return g;
}

std::string full_credit_response(const SubQuestion& sub) {
  for (const Answer& a : sub.answers) {
    if (a.weight != 100) continue;
    if (sub.kind == Kind::NM) return format_number(std::get<double>(a.target));
    const std::string& text = std::get<std::string>(a.target);
    if (sub.kind == Kind::MC) return text;
    std::string out;
    for (char c : text) {
      if (c == '*') {
        if (!out.empty() && out.back() != ' ') out.push_back(' ');
      } else {
        out.push_back(c);
      }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
  }
  return {};
}

}  // namespace quizforge::cloze
