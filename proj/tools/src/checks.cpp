#include "quizforge/checks.hpp"

#include <string>

#include "quizforge/cloze.hpp"

namespace quizforge::checks {

std::vector<quiz::Issue> check_instances(const quiz::QuizTemplate& t) {
  std::vector<quiz::Issue> issues;
  for (std::size_t s = 0; s < t.stories.size(); ++s) {
    const std::string path = "stories[" + std::to_string(s) + "]";
    try {
      const quiz::QuizInstance inst = quiz::instantiate(t, 1, 0, static_cast<int>(s + 1));
      for (const auto& [text, field] : {std::pair{&inst.qtxt, "qtxt"}, std::pair{&inst.htxt, "htxt"},
                                        std::pair{&inst.atxt, "atxt"}}) {
        const cloze::ParsedText parsed = cloze::parse_cloze(*text);
        for (const auto& d : parsed.diagnostics) {
          issues.push_back({path, std::string(field) + " offset " + std::to_string(d.offset) + ": " + d.message});
        }
      }
    } catch (const quiz::GenerationError& e) {
      issues.push_back({path, e.what()});
    }
  }
  return issues;
}

}  // namespace quizforge::checks
