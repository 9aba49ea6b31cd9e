#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "quizforge/cli.hpp"
#include "quizforge/corpus.hpp"
#include "quizforge/xmlout.hpp"

using namespace quizforge;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "quizforge");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string corpus_file(const std::string& name) {
  return (std::filesystem::path(QUIZFORGE_CORPUS_DIR) / name).string();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("generate writes the bank and manifest") {
  TempDir dir("quizforge_cli_generate");
  const Result r = invoke({"generate", corpus_file("02_mean_median.quiz.json"), "--n", "4", "--seed", "42", "--out",
                        dir.path.string()});
  REQUIRE(r.code == cli::kOk);
  const std::string xml = slurp(dir.path / "02_mean_median.xml");
  CHECK(xml == xml::generate(corpus::load_example(2), 4, 42).xml);
  CHECK(r.out.find("sha256 " + xml::sha256_hex(xml)) != std::string::npos);
  CHECK(xml::parse_manifest(slurp(dir.path / "02_mean_median.manifest.json")).n == 4);
}

TEST_CASE("argument errors exit with 1") {
  const Result zero = invoke({"generate", corpus_file("01_mean.quiz.json"), "--n", "0", "--seed", "1"});
  CHECK(zero.code == cli::kValidation);
  CHECK(zero.err.find("n must be ≥ 1") != std::string::npos);
  CHECK(invoke({"preview", corpus_file("01_mean.quiz.json"), "--index", "-1", "--seed", "1"}).code == cli::kValidation);
  CHECK(invoke({"frobnicate"}).code == cli::kValidation);
  CHECK(invoke({"generate", corpus_file("01_mean.quiz.json"), "--bogus"}).code == cli::kValidation);
  CHECK(invoke({"--help"}).code == cli::kOk);
}

TEST_CASE("missing files are I/O errors") {
  CHECK(invoke({"generate", "/nonexistent/x.quiz.json", "--seed", "1"}).code == cli::kIo);
}

TEST_CASE("a missing seed is chosen and reported") {
  TempDir dir("quizforge_cli_seed");
  const Result r = invoke({"generate", corpus_file("01_mean.quiz.json"), "--n", "2", "--out", dir.path.string()});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.err.find("pass --seed") != std::string::npos);
}

TEST_CASE("preview shows one instance") {
  const Result r = invoke({"preview", corpus_file("12_multiple_stories.quiz.json"), "--seed", "5", "--story", "2",
                        "--format", "text"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("likely voters") != std::string::npos);
  const Result html = invoke({"preview", corpus_file("01_mean.quiz.json"), "--seed", "5"});
  CHECK(html.out.find("<html") != std::string::npos);
  CHECK(html.out.find("{1:NM:") != std::string::npos);
}

TEST_CASE("validate handles templates and banks") {
  CHECK(invoke({"validate", corpus_file("14_linear_system.quiz.json")}).code == cli::kOk);
  TempDir dir("quizforge_cli_validate");
  const auto good = dir.path / "good.xml";
  std::ofstream(good) << xml::generate(corpus::load_example(5), 3, 9).xml;
  const Result ok = invoke({"validate", good.string()});
  CHECK(ok.code == cli::kOk);
  CHECK(ok.out.starts_with("ok"));
  const auto bad = dir.path / "bad.xml";
  std::ofstream(bad) << "<quiz><question type=\"cloze\">";
  CHECK(invoke({"validate", bad.string()}).code == cli::kValidation);
  const auto bad_template = dir.path / "bad.quiz.json";
  std::ofstream(bad_template) << "{\"name\": \"x\"}";
  CHECK(invoke({"validate", bad_template.string()}).code == cli::kValidation);
}

TEST_CASE("grade scores responses against the key") {
  TempDir dir("quizforge_cli_grade");
  const auto text = dir.path / "question.txt";
  std::ofstream(text) << "{2:NM:%100%54.7:0.1~%80%54.7:0.5} {1:MC:~=yes~no}";
  const auto right = dir.path / "right.json";
  std::ofstream(right) << R"(["54.65", "yes"])";
  const auto wrong = dir.path / "wrong.json";
  std::ofstream(wrong) << R"(["55", "no"])";
  const Result full = invoke({"grade", text.string(), right.string()});
  REQUIRE(full.code == cli::kOk);
  CHECK(full.out.find("total: 3 of 3 points (100%)") != std::string::npos);
  const Result partial = invoke({"grade", text.string(), wrong.string()});
  CHECK(partial.out.find("total: 1.6 of 3 points (53.33%)") != std::string::npos);
  const Result key = invoke({"grade", corpus_file("01_mean.quiz.json"), "--key", "--seed", "3", "--n", "2"});
  REQUIRE(key.code == cli::kOk);
  CHECK(key.out.find("(100%)") != std::string::npos);
}

TEST_CASE("paste reads a table from a file") {
  TempDir dir("quizforge_cli_paste");
  const auto in = dir.path / "in.txt";
  std::ofstream(in) << "a b\n1 2\n3 4\n";
  const Result r = invoke({"paste", "--in", in.string()});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out == "a,b\r\n1,2\r\n3,4\r\n");
}

TEST_CASE("html_to_text") {
  CHECK(cli::html_to_text("<p>a</p><p>b &amp; c</p>") == "a\n\nb & c");
  CHECK(cli::html_to_text("<table><tr><td>1</td><td>2</td></tr></table>").find("1\t2") != std::string::npos);
  CHECK(cli::html_to_text("<img src=\"x\">") == "[image]");
}

TEST_CASE("every subcommand documents its flags") {
  const std::vector<std::pair<std::string, std::vector<std::string>>> flags{
      {"generate", {"--n", "--seed", "--out", "--story"}},
      {"preview", {"--seed", "--index", "--story", "--format", "--out"}},
      {"validate", {}},
      {"grade", {"--key", "--seed", "--n", "--story"}},
      {"paste", {"--in", "--out"}},
      {"serve", {"--port", "--host", "--root"}},
  };
  for (const auto& [command, expected] : flags) {
    const Result r = invoke({command, "--help"});
    CHECK(r.code == cli::kOk);
    for (const std::string& flag : expected) {
      INFO(command, " ", flag);
      CHECK(r.out.find(flag) != std::string::npos);
    }
  }
}

TEST_CASE("story override applies to the whole bank") {
  TempDir dir("quizforge_cli_story");
  const Result r = invoke({"generate", corpus_file("12_multiple_stories.quiz.json"), "--n", "20", "--seed", "42",
                           "--story", "2", "--out", dir.path.string()});
  REQUIRE(r.code == cli::kOk);
  const std::string xml = slurp(dir.path / "12_multiple_stories.xml");
  CHECK(xml.find("$course$/top/Examples/Percentage : Story : 2") != std::string::npos);
  const xml::ValidationReport report = xml::validate_xml(xml);
  REQUIRE(report.questions.size() == 20);
  for (const auto& q : report.questions) CHECK(q.questiontext.find("likely voters") != std::string::npos);
}

TEST_CASE("a weight of 150 is named in the error") {
  TempDir dir("quizforge_cli_weight");
  const auto path = dir.path / "bad.quiz.json";
  std::ofstream(path) << R"j({"name": "bad", "category": "c", "stories": [{"parts": [
    {"text": "a @", "answer": {"type": "numeric", "targets": "1"}},
    {"text": "b @", "answer": {"type": "numeric", "targets": ["1", "2"], "weights": [100, 150]}}]}]})j";
  const Result r = invoke({"validate", path.string()});
  CHECK(r.code == cli::kValidation);
  CHECK(r.err.find("stories[0].parts[1].answer.weights[1]") != std::string::npos);
}

TEST_CASE("golden banks validate") {
  for (const auto& info : corpus::list_examples()) {
    const auto golden = std::filesystem::path(QUIZFORGE_CORPUS_DIR) / "golden" / (info.name + ".xml");
    INFO(golden.string());
    CHECK(invoke({"validate", golden.string()}).code == cli::kOk);
  }
}

TEST_CASE("empty answers score nothing") {
  TempDir dir("quizforge_cli_empty");
  const auto text = dir.path / "question.txt";
  std::ofstream(text) << "{2:NM:%100%54.7:0.1~%80%54.7:0.5} {1:MC:~=yes~no}";
  const auto empty = dir.path / "empty.json";
  std::ofstream(empty) << "[]";
  const Result r = invoke({"grade", text.string(), empty.string()});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("total: 0 of 3 points (0%)") != std::string::npos);
}

TEST_CASE("paste treats tabs and spaces alike and rejects empty input") {
  TempDir dir("quizforge_cli_paste_forms");
  const auto spaces = dir.path / "spaces.txt";
  std::ofstream(spaces) << "brand n\nCoca-Cola 12\nPepsi 7\n";
  const auto tabs = dir.path / "tabs.txt";
  std::ofstream(tabs) << "brand\tn\nCoca-Cola\t12\nPepsi\t7\n";
  const Result a = invoke({"paste", "--in", spaces.string()});
  const Result b = invoke({"paste", "--in", tabs.string()});
  CHECK(a.code == cli::kOk);
  CHECK(a.out == b.out);
  CHECK(a.out == "brand,n\r\nCoca-Cola,12\r\nPepsi,7\r\n");
  const auto empty = dir.path / "empty.txt";
  std::ofstream(empty) << "";
  CHECK(invoke({"paste", "--in", empty.string()}).code == cli::kValidation);
}

TEST_CASE("preview of example 1 shows a ten-column table") {
  const Result a = invoke({"preview", corpus_file("01_mean.quiz.json"), "--seed", "42"});
  const Result b = invoke({"preview", corpus_file("01_mean.quiz.json"), "--seed", "42"});
  REQUIRE(a.code == cli::kOk);
  CHECK(a.out == b.out);
  const std::size_t row = a.out.find("<tr");
  REQUIRE(row != std::string::npos);
  const std::string first_row = a.out.substr(row, a.out.find("</tr>", row) - row);
  std::size_t cells = 0;
  for (auto pos = first_row.find("<td"); pos != std::string::npos; pos = first_row.find("<td", pos + 1)) ++cells;
  CHECK(cells == 10);
}
