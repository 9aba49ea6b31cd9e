#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "quizforge/expr.hpp"

// Declarative quiz templates (JSON, schema "quizforge-template-v1") and
// their instantiation into rendered quiz instances.
namespace quizforge::quiz {

inline constexpr std::string_view kSchemaName = "quizforge-template-v1";

struct Issue {
  std::string path;  // e.g. "stories[0].parts[1].answer.weights[0]"
  std::string message;

  std::string to_string() const { return path.empty() ? message : path + ": " + message; }
};

// Raised by load_template with every problem found, not just the first.
class TemplateError : public std::runtime_error {
 public:
  explicit TemplateError(std::vector<Issue> issues);
  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  std::vector<Issue> issues_;
};

// Raised by instantiate; `index` is the failing instance.
class GenerationError : public std::runtime_error {
 public:
  GenerationError(std::size_t index, const std::string& message);
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// A number literal or an expression, kept with its source for messages.
struct Computed {
  std::string source;
  expr::ExprPtr node;
};

struct NumericAnswer {
  std::vector<Computed> targets;
  std::vector<int> weights{100};
  std::vector<Computed> tolerances;
  std::optional<Computed> ndigits;  // replaces weights/tolerances when set
  int partial_weight = 80;
  int points = 1;
};

struct ChoiceAnswer {
  std::vector<std::string> options;  // interpolated; empty when builtin is used
  int builtin = 0;                   // 1..11, or 0
  std::optional<Computed> correct;   // 1-based index or option text
  std::vector<Computed> weights;     // alternative to `correct`
  int points = 1;
};

struct ShortAnswer {
  std::vector<std::string> texts;  // interpolated
  std::vector<int> weights{100};
  bool caps_insensitive = true;
  int points = 1;
};

struct DisplayOnly {
  std::optional<Computed> value;
};

using AnswerSpec = std::variant<NumericAnswer, ChoiceAnswer, ShortAnswer, DisplayOnly>;

struct QuestionPart {
  std::string text;  // {{var}} slots and at most one '@'
  AnswerSpec answer;
  bool newline = true;
};

struct Variable {
  std::string name;
  Computed value;
};

struct Story {
  double weight = 1;
  std::vector<Variable> variables;
  std::vector<QuestionPart> parts;
  std::string hint;
  std::string answer_text;
  std::optional<Computed> display_after;  // HTML appended after the question text
};

struct QuizTemplate {
  std::string name;
  std::string title;
  std::string description;
  std::string category;
  std::string quizname_prefix = "problem -";
  int count = 20;
  bool wrap_h5 = true;
  std::vector<Story> stories;
  std::string source;  // the JSON document as loaded
};

QuizTemplate load_template(std::string_view json_text);
QuizTemplate load_template_file(const std::string& path);

struct QuizInstance {
  std::string qtxt;
  std::string htxt;
  std::string atxt;
  std::string category;
  std::string quizname;
  int story = 1;                         // 1-based
  std::vector<std::string> answer_key;   // one full-credit response per CLOZE group, in order
  expr::Environment values;              // the evaluated variables

  bool operator==(const QuizInstance&) const = default;
};

// story_override is 1-based.
QuizInstance instantiate(const QuizTemplate& t, std::uint64_t seed, std::size_t index,
                         std::optional<int> story_override = std::nullopt);

struct Batch {
  std::vector<QuizInstance> instances;
  std::vector<std::string> warnings;  // duplicate question texts
};

Batch instantiate_batch(const QuizTemplate& t, std::uint64_t seed, std::size_t n,
                        std::optional<int> story_override = std::nullopt);

// Replaces {{name}} slots with formatted values. Braces in substituted text
// become HTML entities so data can never open a CLOZE group.
std::string interpolate(std::string_view text, const expr::Environment& env);

// The CLOZE group from a part goes where the '@' is, or at the end.
std::string insert_at_mark(std::string_view text, std::string_view insert);

}  // namespace quizforge::quiz
