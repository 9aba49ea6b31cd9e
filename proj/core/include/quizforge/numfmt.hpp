#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace quizforge {

// Fixed-point rendering shared by CLOZE answers, interpolation and tables:
// at most 12 significant digits, no exponent, trailing zeros trimmed,
// '.' as the decimal separator. Throws std::domain_error for NaN/Inf.
std::string format_number(double x);

// Strict locale-independent decimal parser. Accepts an optional sign,
// digits with an optional '.' fraction and an optional exponent. Rejects
// ',' decimals, hex, inf/nan and trailing garbage.
std::optional<double> parse_number(std::string_view text);

// Round to `digits` decimal places (negative digits round to tens, hundreds,
// ...), half away from zero, applied to the shortest decimal representation
// of `x` so that round_half_away(2.675, 2) == 2.68.
double round_half_away(double x, int digits);

}  // namespace quizforge
