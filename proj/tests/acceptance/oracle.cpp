#include "oracle.hpp"

#include <cctype>
#include <regex>
#include <stdexcept>

namespace oracle {
namespace {

bool special(char c) { return c == '}' || c == '~' || c == '#' || c == '%'; }

std::vector<std::string> split_unescaped(std::string_view s, char sep) {
  std::vector<std::string> out(1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() && special(s[i + 1])) {
      out.back() += s.substr(i, 2);
      ++i;
    } else if (s[i] == sep) {
      out.emplace_back();
    } else {
      out.back() += s[i];
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() && special(s[i + 1])) ++i;
    out += s[i];
  }
  return out;
}

mpz_class pow10(unsigned long k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, k);
  return r;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

bool is_decimal(std::string_view s) {
  static const std::regex re(R"(^[ \t\n\v\f\r]*[+-]?([0-9]+\.?[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?[ \t\n\v\f\r]*$)");
  return std::regex_match(s.begin(), s.end(), re);
}

mpq_class decimal(std::string_view s) {
  std::string t;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  }
  bool negative = false;
  std::size_t i = 0;
  if (t[i] == '+' || t[i] == '-') negative = t[i++] == '-';
  std::string digits;
  long exponent = 0;
  bool after_point = false;
  for (; i < t.size() && t[i] != 'e' && t[i] != 'E'; ++i) {
    if (t[i] == '.') {
      after_point = true;
    } else {
      digits += t[i];
      if (after_point) --exponent;
    }
  }
  if (i < t.size()) exponent += std::stol(t.substr(i + 1));
  mpq_class q(mpz_class(digits, 10));
  if (exponent >= 0) {
    q *= pow10(static_cast<unsigned long>(exponent));
  } else {
    q /= pow10(static_cast<unsigned long>(-exponent));
  }
  q.canonicalize();
  return negative ? mpq_class(-q) : q;
}

std::string to_decimal(const mpq_class& q) {
  unsigned long k = 0;
  while (pow10(k) % q.get_den() != 0) {
    if (++k > 4000) throw std::invalid_argument("not a terminating decimal");
  }
  mpz_class n = q.get_num() * (pow10(k) / q.get_den());
  const bool negative = n < 0;
  if (negative) n = -n;
  std::string digits = n.get_str();
  if (digits.size() <= k) digits.insert(0, k + 1 - digits.size(), '0');
  std::string out = digits.substr(0, digits.size() - k);
  if (k > 0) out += "." + digits.substr(digits.size() - k);
  return negative ? "-" + out : out;
}

Question parse_wire(std::string_view wire) {
  if (wire.size() < 2 || wire.front() != '{' || wire.back() != '}') throw std::invalid_argument("not a group");
  const std::size_t c1 = wire.find(':');
  const std::size_t c2 = wire.find(':', c1 + 1);
  Question q;
  q.kind = std::string(wire.substr(c1 + 1, c2 - c1 - 1));
  std::vector<std::string> pieces = split_unescaped(wire.substr(c2 + 1, wire.size() - c2 - 2), '~');
  if (q.kind == "MC") pieces.erase(pieces.begin());
  for (std::string_view piece : pieces) {
    Answer a;
    if (piece.starts_with("=")) {
      a.weight = 100;
      piece.remove_prefix(1);
    } else if (piece.starts_with("%")) {
      const std::size_t close = piece.find('%', 1);
      a.weight = std::stoi(std::string(piece.substr(1, close - 1)));
      piece.remove_prefix(close + 1);
    } else {
      a.weight = (q.kind == "SA" || q.kind == "SAC") ? 100 : 0;
    }
    const std::string body = split_unescaped(piece, '#').front();
    if (q.kind == "NM") {
      const std::size_t colon = body.find(':');
      a.target = decimal(body.substr(0, colon));
      a.tolerance = colon == std::string::npos ? mpq_class(0) : decimal(body.substr(colon + 1));
    } else {
      a.text = unescape(body);
    }
    q.answers.push_back(std::move(a));
  }
  return q;
}

bool wildcard(std::string_view pattern, std::string_view text) {
  // match[i][j]: pattern[0, i) matches text[0, j).
  std::vector<std::vector<char>> match(pattern.size() + 1, std::vector<char>(text.size() + 1, 0));
  match[0][0] = 1;
  for (std::size_t i = 1; i <= pattern.size(); ++i) {
    for (std::size_t j = 0; j <= text.size(); ++j) {
      if (pattern[i - 1] == '*') {
        match[i][j] = match[i - 1][j] || (j > 0 && match[i][j - 1]);
      } else {
        match[i][j] = j > 0 && match[i - 1][j - 1] && pattern[i - 1] == text[j - 1];
      }
    }
  }
  return match[pattern.size()][text.size()];
}

int grade(const Question& q, std::string_view response) {
  int best = 0;
  if (q.kind == "NM") {
    if (!is_decimal(response)) return 0;
    const mpq_class r = decimal(response);
    for (const Answer& a : q.answers) {
      if (abs(r - a.target) <= a.tolerance && a.weight > best) best = a.weight;
    }
  } else if (q.kind == "MC") {
    for (const Answer& a : q.answers) {
      if (a.text == response && a.weight > best) best = a.weight;
    }
  } else {
    const bool fold = q.kind == "SA";
    for (const Answer& a : q.answers) {
      const bool hit = fold ? wildcard(lower(a.text), lower(response)) : wildcard(a.text, response);
      if (hit && a.weight > best) best = a.weight;
    }
  }
  return best;
}

}  // namespace oracle
