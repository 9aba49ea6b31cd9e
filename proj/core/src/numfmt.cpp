#include "quizforge/numfmt.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace quizforge {
namespace {

constexpr int kSignificantDigits = 12;

struct Decimal {
  bool negative = false;
  std::string digits;  // no leading zeros unless the value is zero
  int exponent = 0;    // value = 0.d1d2d3... * 10^exponent
};

// Splits the output of to_chars(scientific) into sign, digits and exponent.
Decimal split_scientific(std::string_view s) {
  Decimal d;
  std::size_t i = 0;
  if (s[i] == '-') {
    d.negative = true;
    ++i;
  }
  for (; i < s.size() && s[i] != 'e'; ++i) {
    if (s[i] != '.') d.digits.push_back(s[i]);
  }
  int exp10 = 0;
  if (i < s.size()) {
    ++i;
    std::from_chars(s.data() + i + (s[i] == '+' ? 1 : 0), s.data() + s.size(), exp10);
  }
  d.exponent = exp10 + 1;
  return d;
}

std::string render_fixed(const Decimal& d) {
  std::string digits = d.digits;
  while (!digits.empty() && digits.back() == '0') digits.pop_back();
  if (digits.empty()) return "0";
  std::string out;
  if (d.negative) out.push_back('-');
  const int e = d.exponent;
  const int n = static_cast<int>(digits.size());
  if (e <= 0) {
    out += "0.";
    out.append(static_cast<std::size_t>(-e), '0');
    out += digits;
  } else if (e >= n) {
    out += digits;
    out.append(static_cast<std::size_t>(e - n), '0');
  } else {
    out += digits.substr(0, static_cast<std::size_t>(e));
    out.push_back('.');
    out += digits.substr(static_cast<std::size_t>(e));
  }
  return out;
}

}  // namespace

std::string format_number(double x) {
  if (!std::isfinite(x)) throw std::domain_error("cannot format a non-finite number");
  if (x == 0.0) return "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific,
                                 kSignificantDigits - 1);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return render_fixed(split_scientific(std::string_view(buf, static_cast<std::size_t>(end - buf))));
}

std::optional<double> parse_number(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  text = text.substr(b, e - b);
  if (text.empty()) return std::nullopt;

  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    ++i;
  }
  std::size_t mantissa_digits = 0;
  std::size_t j = i;
  while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j, ++mantissa_digits;
  if (j < text.size() && text[j] == '.') {
    ++j;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j, ++mantissa_digits;
  }
  if (mantissa_digits == 0) return std::nullopt;
  if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
    std::size_t k = j + 1;
    if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
    std::size_t exp_digits = 0;
    while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k, ++exp_digits;
    if (exp_digits == 0) return std::nullopt;
    j = k;
  }
  if (j != text.size()) return std::nullopt;

  double value = 0.0;
  auto body = text.substr(i);
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return negative ? -value : value;
}

double round_half_away(double x, int digits) {
  if (!std::isfinite(x)) throw std::domain_error("cannot round a non-finite number");
  if (x == 0.0) return 0.0;
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  Decimal d = split_scientific(std::string_view(buf, static_cast<std::size_t>(end - buf)));

  // Number of mantissa digits that survive the rounding.
  const int keep = d.exponent + digits;
  if (keep >= static_cast<int>(d.digits.size())) return x;
  if (keep < 0) return 0.0;

  std::string kept = d.digits.substr(0, static_cast<std::size_t>(keep));
  const bool round_up = d.digits[static_cast<std::size_t>(keep)] >= '5';
  int exponent = d.exponent;
  if (round_up) {
    int pos = keep - 1;
    while (pos >= 0 && kept[static_cast<std::size_t>(pos)] == '9') {
      kept[static_cast<std::size_t>(pos)] = '0';
      --pos;
    }
    if (pos >= 0) {
      ++kept[static_cast<std::size_t>(pos)];
    } else {
      kept.insert(kept.begin(), '1');
      ++exponent;
    }
  }
  if (kept.empty()) return 0.0;

  std::string sci;
  if (d.negative) sci.push_back('-');
  sci += "0.";
  sci += kept;
  sci += "e" + std::to_string(exponent);
  double out = 0.0;
  std::from_chars(sci.data(), sci.data() + sci.size(), out);
  return out;
}

}  // namespace quizforge
