#include "quizforge/corpus.hpp"

#include <stdexcept>

#include "corpus_data.hpp"

namespace quizforge::corpus {
namespace {

const detail::EmbeddedFile& find(int id) {
  for (const auto& f : detail::embedded_files()) {
    if (f.id == id) return f;
  }
  throw std::out_of_range("no example with id " + std::to_string(id));
}

}  // namespace

std::vector<ExampleInfo> list_examples() {
  std::vector<ExampleInfo> out;
  for (const auto& f : detail::embedded_files()) {
    const quiz::QuizTemplate t = quiz::load_template(f.text);
    out.push_back({f.id, f.file, t.name, t.title, t.description});
  }
  return out;
}

const std::string& example_document(int id) { return find(id).text; }

quiz::QuizTemplate load_example(int id) { return quiz::load_template(find(id).text); }

}  // namespace quizforge::corpus
