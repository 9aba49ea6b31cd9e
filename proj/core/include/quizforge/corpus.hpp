#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "quizforge/template.hpp"

// The fifteen bundled example quizzes, compiled into the library.
namespace quizforge::corpus {

struct ExampleInfo {
  int id = 0;            // 1..15
  std::string file;      // e.g. "01_mean.quiz.json"
  std::string name;
  std::string title;
  std::string description;
};

std::vector<ExampleInfo> list_examples();

// Throws std::out_of_range for an unknown id.
const std::string& example_document(int id);
quiz::QuizTemplate load_example(int id);

}  // namespace quizforge::corpus
