#pragma once

#include <vector>

#include "quizforge/template.hpp"

namespace quizforge::checks {

// Renders one instance of every story and parses its CLOZE groups. Problems
// come back as issues; a clean template yields an empty list.
std::vector<quiz::Issue> check_instances(const quiz::QuizTemplate& t);

}  // namespace quizforge::checks
