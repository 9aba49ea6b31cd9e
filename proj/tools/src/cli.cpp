#include "quizforge/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quizforge/checks.hpp"
#include "quizforge/cloze.hpp"
#include "quizforge/htmlgen.hpp"
#include "quizforge/numfmt.hpp"
#include "quizforge/pastedata.hpp"
#include "quizforge/service.hpp"
#include "quizforge/xmlout.hpp"

namespace quizforge::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw xml::IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !f.write(content.data(), static_cast<std::streamsize>(content.size()))) {
    throw xml::IoError("cannot write " + path);
  }
}

bool has_extension(const std::string& path, std::string_view ext) {
  std::string e = fs::path(path).extension().string();
  for (char& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e == ext;
}

quiz::QuizTemplate load(const std::string& path) {
  try {
    return quiz::load_template_file(path);
  } catch (const std::ios_base::failure& e) {
    throw xml::IoError(e.what());
  }
}

std::uint64_t seed_or_random(const CLI::Option* opt, std::uint64_t value, std::ostream& err) {
  if (opt->count() > 0) return value;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  err << "seed: " << seed << " (pass --seed " << seed << " to reproduce)\n";
  return seed;
}

std::optional<int> story_of(const CLI::Option* opt, int value) {
  if (opt->count() == 0) return std::nullopt;
  if (value < 1) throw UsageError("story must be ≥ 1");
  return value;
}

std::size_t count_of(const CLI::Option* opt, long long value, const quiz::QuizTemplate& t) {
  if (opt->count() == 0) return static_cast<std::size_t>(t.count);
  if (value < 1) throw UsageError("n must be ≥ 1");
  if (value > 100000) throw UsageError("n must be ≤ 100000");
  return static_cast<std::size_t>(value);
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const quiz::TemplateError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const paste::PasteError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const quiz::GenerationError& e) {
    err << "generation failed: " << e.what() << "\n";
    return kGeneration;
  } catch (const xml::XmlError& e) {
    err << "generation failed: " << e.what() << "\n";
    return kGeneration;
  } catch (const xml::IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

struct GradedQuestion {
  std::string name;
  std::string text;
};

std::vector<GradedQuestion> questions_for_grading(const std::string& target, std::uint64_t seed, bool seeded,
                                                  std::optional<std::size_t> n, std::optional<int> story) {
  if (has_extension(target, ".xml")) {
    const xml::ValidationReport report = xml::validate_xml(read_file(target));
    if (!report.well_formed) throw UsageError(report.errors.front());
    std::vector<GradedQuestion> out;
    for (const auto& q : report.questions) out.push_back({q.name, q.questiontext});
    return out;
  }
  if (has_extension(target, ".json")) {
    const quiz::QuizTemplate t = load(target);
    if (!seeded) throw UsageError("--seed is required when grading a template");
    const quiz::Batch b = quiz::instantiate_batch(t, seed, n.value_or(static_cast<std::size_t>(t.count)), story);
    std::vector<GradedQuestion> out;
    for (const auto& i : b.instances) out.push_back({i.quizname, i.qtxt});
    return out;
  }
  return {{fs::path(target).stem().string(), read_file(target)}};
}

std::vector<std::vector<std::string>> parse_answers(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("answers file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw UsageError("answers file must hold a JSON array");
  const auto strings = [](const nlohmann::json& arr, const std::string& where) {
    std::vector<std::string> out;
    for (const auto& v : arr) {
      if (v.is_string()) {
        out.push_back(v.get<std::string>());
      } else if (v.is_number()) {
        out.push_back(v.dump());
      } else if (v.is_null()) {
        out.emplace_back();
      } else {
        throw UsageError(where + ": responses must be strings or numbers");
      }
    }
    return out;
  };
  const bool nested = !doc.empty() && std::all_of(doc.begin(), doc.end(), [](const auto& v) { return v.is_array(); });
  std::vector<std::vector<std::string>> out;
  if (nested) {
    for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(strings(doc[i], "question " + std::to_string(i + 1)));
  } else if (!doc.empty()) {
    out.push_back(strings(doc, "answers"));
  }
  return out;
}

std::string quote_response(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

std::string escape(std::string_view s) { return htmlgen::escape_text(s); }

void underline(std::ostringstream& out, std::string_view title) {
  out << title << "\n" << std::string(title.size(), '-') << "\n";
}

}  // namespace

PreviewFields preview_fields(const quiz::QuizInstance& instance) {
  return {instance.qtxt, instance.htxt, instance.atxt, instance.category, instance.quizname};
}

std::string render_preview(const PreviewFields& f, PreviewFormat format) {
  std::ostringstream out;
  if (format == PreviewFormat::html) {
    out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>" << escape(f.quizname)
        << "</title>\n</head>\n<body>\n";
    out << "<p class=\"category\">" << escape(f.category) << "</p>\n<h2>" << escape(f.quizname) << "</h2>\n";
    out << "<section class=\"question\">\n" << f.qtxt << "\n</section>\n";
    if (!f.htxt.empty()) out << "<h3>Hint</h3>\n<section class=\"hint\">\n" << f.htxt << "\n</section>\n";
    out << "<h3>Answer</h3>\n<section class=\"answer\">\n" << f.atxt << "\n</section>\n</body>\n</html>\n";
    return out.str();
  }
  out << f.quizname << "\n" << f.category << "\n\n";
  underline(out, "Question");
  out << html_to_text(f.qtxt) << "\n";
  if (!f.htxt.empty()) {
    out << "\n";
    underline(out, "Hint");
    out << html_to_text(f.htxt) << "\n";
  }
  out << "\n";
  underline(out, "Answer");
  out << html_to_text(f.atxt) << "\n";
  return out.str();
}

std::string html_to_text(std::string_view html) {
  std::string raw;
  bool row_has_cell = false;
  int pre = 0;
  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      const std::size_t next = std::min(html.find('<', i), html.size());
      std::string text = htmlgen::decode_entities(html.substr(i, next - i));
      if (pre == 0) {
        for (char& c : text) {
          if (c == '\n' || c == '\r' || c == '\t') c = ' ';
        }
      }
      raw += text;
      i = next;
      continue;
    }
    const std::size_t close = html.find('>', i);
    if (close == std::string_view::npos) {
      raw += htmlgen::decode_entities(html.substr(i));
      break;
    }
    std::string_view tag = html.substr(i + 1, close - i - 1);
    const bool end = !tag.empty() && tag.front() == '/';
    if (end) tag.remove_prefix(1);
    std::string name(tag.substr(0, tag.find_first_of(" \t\r\n/")));
    for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (name == "td" || name == "th") {
      if (!end && row_has_cell) raw.push_back('\t');
      if (!end) row_has_cell = true;
    } else if (name == "tr") {
      raw.push_back('\n');
      row_has_cell = false;
    } else if (name == "img") {
      raw += "[image]";
    } else if (name == "pre") {
      pre += end ? -1 : 1;
      raw.push_back('\n');
    } else if (name == "br" || name == "p" || name == "div" || name == "table" || name == "li" ||
               name == "section" || (name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6')) {
      raw.push_back('\n');
    }
    i = close + 1;
  }
  // Trim line ends and collapse runs of blank lines.
  std::string out;
  std::istringstream lines(raw);
  std::string line;
  bool blank_pending = false;
  while (std::getline(lines, line)) {
    const auto last = line.find_last_not_of(" \t");
    line.erase(last == std::string::npos ? 0 : last + 1);
    if (line.empty()) {
      blank_pending = !out.empty();
      continue;
    }
    if (!out.empty()) out += blank_pending ? "\n\n" : "\n";
    blank_pending = false;
    out += line;
  }
  return out;
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized Moodle quiz banks from declarative templates", "quizforge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "quizforge 0.1.0");

  std::string template_path;
  long long n = 0;
  std::uint64_t seed = 0;
  int story = 0;
  long long index = 0;
  std::string out_path;
  std::string format = "html";
  std::string answers_path;
  bool use_key = false;
  std::string source = "clipboard";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string root;

  auto* gen = app.add_subcommand("generate", "Write <name>.xml and <name>.manifest.json for n instances");
  gen->add_option("template", template_path, "Template document (.json)")->required();
  auto* gen_n = gen->add_option("--n", n, "Number of instances (default: the template's count)");
  auto* gen_seed = gen->add_option("--seed", seed, "Random seed (default: random, printed to stderr)");
  gen->add_option("--out", out_path, "Output folder")->default_val(".");
  auto* gen_story = gen->add_option("--story", story, "Use only this story (1-based)");

  auto* prev = app.add_subcommand("preview", "Render one instance");
  prev->add_option("template", template_path, "Template document (.json)")->required();
  auto* prev_seed = prev->add_option("--seed", seed, "Random seed (default: random, printed to stderr)");
  prev->add_option("--index", index, "Instance index, 0-based")->default_val(0);
  auto* prev_story = prev->add_option("--story", story, "Use this story (1-based)");
  prev->add_option("--format", format, "Output format")->check(CLI::IsMember({"html", "text"}))->default_val("html");
  auto* prev_out = prev->add_option("--out", out_path, "Write to this file instead of stdout");

  auto* val = app.add_subcommand("validate", "Check a template (.json) or a question bank (.xml)");
  val->add_option("path", template_path, "File to check")->required();

  auto* grade = app.add_subcommand("grade", "Grade responses against a bank, a template or a CLOZE text file");
  grade->add_option("target", template_path, "Question bank (.xml), template (.json) or question text")->required();
  auto* grade_answers = grade->add_option("answers", answers_path, "JSON file: an array of responses, or one array per question");
  grade->add_flag("--key", use_key, "Grade the full-credit response of every subquestion");
  auto* grade_seed = grade->add_option("--seed", seed, "Seed used to generate the bank (templates only)");
  auto* grade_n = grade->add_option("--n", n, "Number of instances (templates only)");
  auto* grade_story = grade->add_option("--story", story, "Story override (templates only)");

  auto* pst = app.add_subcommand("paste", "Turn a copied table into CSV");
  pst->add_option("--in", source, "Source: 'clipboard', '-' for stdin, or a file")->default_val("clipboard");
  auto* pst_out = pst->add_option("--out", out_path, "CSV file to write (default: stdout)");

  auto* srv = app.add_subcommand("serve", "Run the HTTP API for the quiz builder");
  srv->add_option("--port", port, "TCP port")->default_val(8080)->check(CLI::Range(1, 65535));
  srv->add_option("--host", host, "Interface to bind")->default_val("127.0.0.1");
  srv->add_option("--root", root, "Folder with static files to serve at /")->check(CLI::ExistingDirectory);

  std::vector<const char*> args;
  for (const auto& a : argv) args.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(args.size()), args.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  if (gen->parsed()) {
    return guarded(err, [&] {
      const quiz::QuizTemplate t = load(template_path);
      const std::size_t count = count_of(gen_n, n, t);
      const std::optional<int> which = story_of(gen_story, story);
      const std::uint64_t s = seed_or_random(gen_seed, seed, err);
      const xml::Written w = xml::make_xml(t, count, out_path, s, which);
      for (const auto& warning : w.result.warnings) err << "warning: " << warning << "\n";
      out << w.xml_path.string() << "\n" << "sha256 " << w.result.manifest.sha256 << "\n";
      return static_cast<int>(kOk);
    });
  }
  if (prev->parsed()) {
    return guarded(err, [&] {
      if (index < 0) throw UsageError("index must be ≥ 0");
      const quiz::QuizTemplate t = load(template_path);
      const std::optional<int> which = story_of(prev_story, story);
      const std::uint64_t s = seed_or_random(prev_seed, seed, err);
      const quiz::QuizInstance inst = quiz::instantiate(t, s, static_cast<std::size_t>(index), which);
      const std::string page =
          render_preview(preview_fields(inst), format == "text" ? PreviewFormat::text : PreviewFormat::html);
      if (prev_out->count() > 0) {
        write_file(out_path, page);
        out << out_path << "\n";
      } else {
        out << page;
      }
      return static_cast<int>(kOk);
    });
  }
  if (val->parsed()) {
    return guarded(err, [&] {
      if (has_extension(template_path, ".xml")) {
        const xml::ValidationReport r = xml::validate_xml(read_file(template_path));
        for (const auto& e : r.errors) err << "error: " << e << "\n";
        if (!r.ok()) return static_cast<int>(kValidation);
        out << "ok: " << r.cloze_count << " cloze questions\n";
        return static_cast<int>(kOk);
      }
      const quiz::QuizTemplate t = load(template_path);
      const auto issues = checks::check_instances(t);
      for (const auto& i : issues) err << "error: " << i.to_string() << "\n";
      if (!issues.empty()) return static_cast<int>(kValidation);
      out << "ok: " << t.name << " (" << t.stories.size() << (t.stories.size() == 1 ? " story" : " stories") << ")\n";
      return static_cast<int>(kOk);
    });
  }
  if (grade->parsed()) {
    return guarded(err, [&] {
      if (use_key == (grade_answers->count() > 0)) throw UsageError("give either an answers file or --key");
      std::optional<std::size_t> count;
      if (grade_n->count() > 0) {
        if (n < 1) throw UsageError("n must be ≥ 1");
        count = static_cast<std::size_t>(n);
      }
      const auto questions =
          questions_for_grading(template_path, seed, grade_seed->count() > 0, count, story_of(grade_story, story));
      std::vector<std::vector<std::string>> responses;
      if (!use_key) responses = parse_answers(read_file(answers_path));
      if (responses.size() > questions.size()) {
        throw UsageError("answers cover " + std::to_string(responses.size()) + " questions but there are only " +
                         std::to_string(questions.size()));
      }
      double earned = 0, possible = 0;
      for (std::size_t q = 0; q < questions.size(); ++q) {
        const cloze::ParsedText parsed = cloze::parse_cloze(questions[q].text);
        out << questions[q].name << "\n";
        for (const auto& d : parsed.diagnostics) err << "warning: " << questions[q].name << ": offset " << d.offset << ": " << d.message << "\n";
        for (std::size_t k = 0; k < parsed.subquestions.size(); ++k) {
          const cloze::SubQuestion& sub = parsed.subquestions[k];
          std::string response;
          if (use_key) {
            response = cloze::full_credit_response(sub);
          } else if (q < responses.size() && k < responses[q].size()) {
            response = responses[q][k];
          }
          const cloze::Grade g = cloze::grade(sub, response);
          earned += g.fraction * sub.points;
          possible += sub.points;
          out << "  " << (k + 1) << "  " << cloze::kind_token(sub.kind) << "  " << sub.points
              << (sub.points == 1 ? " pt  " : " pts  ") << quote_response(response) << "  " << format_number(g.fraction)
              << (g.non_numeric ? "  (not a number)" : "") << "\n";
        }
      }
      const double percent = possible > 0 ? earned / possible * 100 : 0;
      out << "total: " << format_number(earned) << " of " << format_number(possible) << " points ("
          << format_number(std::round(percent * 100) / 100) << "%)\n";
      return static_cast<int>(kOk);
    });
  }
  if (pst->parsed()) {
    return guarded(err, [&] {
      std::string text;
      if (source == "clipboard") {
        const auto clip = read_clipboard();
        if (!clip) throw xml::IoError("no clipboard tool found (tried pbpaste, Get-Clipboard, wl-paste, xclip, xsel)");
        text = *clip;
      } else if (source == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        text = buf.str();
      } else {
        text = read_file(source);
      }
      const std::string csv = paste::to_csv(paste::parse_pasted(text));
      if (pst_out->count() > 0) {
        write_file(out_path, csv);
      } else {
        out << csv;
      }
      return static_cast<int>(kOk);
    });
  }
  service::ServerOptions options;
  options.host = host;
  options.port = port;
  if (!root.empty()) options.root = root;
  return service::serve(options, err) ? kOk : kIo;
}

}  // namespace quizforge::cli
