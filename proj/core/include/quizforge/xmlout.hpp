#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quizforge/template.hpp"

// Moodle XML question banks: one category question followed by one cloze
// question per instance. Output is byte-stable: LF line endings, two-space
// indentation, fixed element and attribute order.
namespace quizforge::xml {

class XmlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuestionBank {
  std::string category;
  std::vector<quiz::QuizInstance> questions;
  double penalty = 1.0 / 3.0;
};

// "Examples / 1" -> "$course$/top/Examples/1".
std::string category_path(std::string_view category);

// Throws XmlError naming the quiz when a question text has malformed CLOZE.
std::string emit_xml(const QuestionBank& bank);

// The instances' shared category, or the template's base category when
// stories with different categories are mixed in one file.
std::string bank_category(const quiz::QuizTemplate& t, const std::vector<quiz::QuizInstance>& instances);

std::string sha256_hex(std::string_view data);

struct Manifest {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::string sha256;
};

std::string manifest_json(const Manifest& m);
Manifest parse_manifest(std::string_view json_text);

// The whole pipeline in memory: instantiate_batch + emit_xml.
struct Generated {
  std::string xml;
  Manifest manifest;
  std::vector<std::string> warnings;
};

Generated generate(const quiz::QuizTemplate& t, std::size_t n, std::uint64_t seed,
                   std::optional<int> story_override = std::nullopt);

struct Written {
  std::filesystem::path xml_path;
  std::filesystem::path manifest_path;
  Generated result;
};

// Writes <name>.xml and <name>.manifest.json into `folder`.
Written make_xml(const quiz::QuizTemplate& t, std::size_t n, const std::filesystem::path& folder,
                 std::uint64_t seed, std::optional<int> story_override = std::nullopt);

struct QuestionReport {
  std::string name;
  std::string questiontext;
  std::size_t subquestions = 0;
  std::vector<std::string> problems;
};

struct ValidationReport {
  bool well_formed = false;
  std::size_t category_count = 0;
  std::size_t cloze_count = 0;
  bool category_first = false;
  std::vector<QuestionReport> questions;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

// Well-formedness plus a CLOZE parse of every question text.
ValidationReport validate_xml(std::string_view xml_text);

}  // namespace quizforge::xml
