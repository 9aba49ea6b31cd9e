#pragma once

#include <string>
#include <vector>

namespace quizforge::corpus::detail {

struct EmbeddedFile {
  int id;
  std::string file;
  std::string text;
};

// Generated at configure time from the corpus directory, sorted by id.
const std::vector<EmbeddedFile>& embedded_files();

}  // namespace quizforge::corpus::detail
