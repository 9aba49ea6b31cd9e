#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Moodle embedded-answer (CLOZE) subquestions: canonical encoders, a
// tolerant parser and a grader.
//
// Wire form: {points:KIND:answer~answer~...}. Each answer is an optional
// weight prefix (%w% or the '=' shorthand for 100), a body and an optional
// '#feedback' suffix. NM bodies are "value:tolerance". The characters
// } ~ # % are backslash-escaped inside answer text.
namespace quizforge::cloze {

enum class Kind { NM, MC, SA, SAC };

std::string_view kind_token(Kind kind);

struct Answer {
  int weight = 100;
  std::variant<double, std::string> target;
  double tolerance = 0.0;  // NM only
  std::optional<std::string> feedback;

  bool operator==(const Answer&) const = default;
};

struct SubQuestion {
  Kind kind = Kind::NM;
  int points = 1;
  std::vector<Answer> answers;

  bool operator==(const SubQuestion&) const = default;
};

class ClozeError : public std::runtime_error {
 public:
  explicit ClozeError(const std::string& what, std::size_t offset = 0)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Throws ClozeError when `sub` breaks a SubQuestion invariant.
void validate(const SubQuestion& sub);

// Canonical text of a subquestion. validate() is applied first.
std::string encode(const SubQuestion& sub);

// Targets and tolerances of length one are broadcast to the weight count.
std::string encode_nm(std::span<const double> targets, std::span<const int> weights,
                      std::span<const double> tolerances, int points = 1);

SubQuestion nm_digits_question(double target, int ndigits, int points = 1,
                               int partial_weight = 80);
std::string encode_nm_digits(double target, int ndigits, int points = 1,
                             int partial_weight = 80);

struct McQuestion {
  std::string question;
  std::string correct_text;
};

McQuestion encode_mc(std::span<const std::string> options, std::span<const int> weights,
                     int points = 1);

// The eleven predefined option sets, 1-based.
std::vector<std::string> builtin_mc_options(int index);

// "correlation coefficient" -> "*correlation*coefficient*".
std::string wildcard_text(std::string_view text);

// SA when caps_insensitive, SAC otherwise.
std::string encode_sa(std::span<const std::string> texts, std::span<const int> weights,
                      bool caps_insensitive = true, int points = 1);

struct Diagnostic {
  std::size_t offset = 0;
  std::string message;
};

struct ParsedText {
  std::vector<std::string> segments;       // always subquestions.size() + 1 entries
  std::vector<SubQuestion> subquestions;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

// Splits `text` at CLOZE groups. A group starts at '{' followed by optional
// digits, ':', a kind token and ':'; any other brace (LaTeX, for instance)
// is ordinary text. Malformed groups are reported and kept as text.
ParsedText parse_cloze(std::string_view text);

// Parses exactly one group; throws ClozeError on any problem.
SubQuestion parse_subquestion(std::string_view group);

struct Grade {
  double fraction = 0.0;
  bool non_numeric = false;
};

// Best matching answer wins (maximum weight), independent of answer order.
Grade grade(const SubQuestion& sub, std::string_view response);

// A response that earns full marks for `sub` (first 100% answer).
std::string full_credit_response(const SubQuestion& sub);

}  // namespace quizforge::cloze
