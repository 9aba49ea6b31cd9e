#include "quizforge/xmlout.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quizforge/cloze.hpp"

namespace quizforge::xml {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

// "]]>" cannot appear inside CDATA; close the section between "]]" and ">".
std::string cdata(std::string_view s) {
  std::string out = "<![CDATA[";
  std::size_t last = 0;
  for (std::size_t pos = s.find("]]>"); pos != std::string_view::npos; pos = s.find("]]>", pos + 1)) {
    out.append(s.substr(last, pos + 2 - last));
    out += "]]><![CDATA[";
    last = pos + 2;
  }
  out.append(s.substr(last));
  out += "]]>";
  return out;
}

std::string fixed7(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 7);
  return std::string(buf, r.ptr);
}

void html_block(std::ostringstream& out, std::string_view element, std::string_view payload) {
  out << "    <" << element << " format=\"html\">\n"
      << "      <text>" << cdata(payload) << "</text>\n"
      << "    </" << element << ">\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.close();
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string category_path(std::string_view category) {
  std::string out = "$course$/top";
  std::size_t start = 0;
  bool any = false;
  while (start <= category.size()) {
    const std::size_t slash = category.find('/', start);
    const std::string part = trim(category.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start));
    if (!part.empty()) {
      out += "/" + part;
      any = true;
    }
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  if (!any) throw XmlError("category must not be empty");
  return out;
}

std::string emit_xml(const QuestionBank& bank) {
  if (bank.questions.empty()) throw XmlError("question bank is empty");
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<quiz>\n";
  out << "  <question type=\"category\">\n    <category>\n      <text>" << escape_xml(category_path(bank.category))
      << "</text>\n    </category>\n  </question>\n";
  const std::string penalty = fixed7(bank.penalty);
  for (const auto& q : bank.questions) {
    const cloze::ParsedText parsed = cloze::parse_cloze(q.qtxt);
    if (!parsed.ok()) {
      throw XmlError(q.quizname + ": invalid CLOZE at offset " + std::to_string(parsed.diagnostics[0].offset) + ": " +
                     parsed.diagnostics[0].message);
    }
    out << "  <question type=\"cloze\">\n    <name>\n      <text>" << escape_xml(q.quizname) << "</text>\n    </name>\n";
    html_block(out, "questiontext", q.qtxt);
    html_block(out, "generalfeedback", q.atxt);
    out << "    <penalty>" << penalty << "</penalty>\n    <hidden>0</hidden>\n";
    if (!q.htxt.empty()) html_block(out, "hint", q.htxt);
    out << "  </question>\n";
  }
  out << "</quiz>\n";
  return out.str();
}

std::string bank_category(const quiz::QuizTemplate& t, const std::vector<quiz::QuizInstance>& instances) {
  if (instances.empty()) return t.category;
  for (const auto& i : instances) {
    if (i.category != instances.front().category) return t.category;
  }
  return instances.front().category;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

std::string manifest_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["seed"] = m.seed;
  j["n"] = m.n;
  j["sha256"] = m.sha256;
  return j.dump(2) + "\n";
}

Manifest parse_manifest(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    return {j.at("seed").get<std::uint64_t>(), j.at("n").get<std::size_t>(), j.at("sha256").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw XmlError(std::string("malformed manifest: ") + e.what());
  }
}

Generated generate(const quiz::QuizTemplate& t, std::size_t n, std::uint64_t seed, std::optional<int> story_override) {
  quiz::Batch batch = quiz::instantiate_batch(t, seed, n, story_override);
  QuestionBank bank{bank_category(t, batch.instances), std::move(batch.instances)};
  Generated g;
  g.xml = emit_xml(bank);
  g.manifest = {seed, n, sha256_hex(g.xml)};
  g.warnings = std::move(batch.warnings);
  return g;
}

Written make_xml(const quiz::QuizTemplate& t, std::size_t n, const std::filesystem::path& folder, std::uint64_t seed,
                 std::optional<int> story_override) {
  Written w;
  w.result = generate(t, n, seed, story_override);
  std::error_code ec;
  std::filesystem::create_directories(folder, ec);
  if (ec) throw IoError("cannot create " + folder.string() + ": " + ec.message());
  w.xml_path = folder / (t.name + ".xml");
  w.manifest_path = folder / (t.name + ".manifest.json");
  write_file(w.xml_path, w.result.xml);
  write_file(w.manifest_path, manifest_json(w.result.manifest));
  return w;
}

ValidationReport validate_xml(std::string_view xml_text) {
  namespace pt = boost::property_tree;
  ValidationReport r;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml_text)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    r.errors.push_back(std::string("not well-formed XML: ") + e.what());
    return r;
  }
  r.well_formed = true;
  const auto quiz = tree.get_child_optional("quiz");
  if (!quiz) {
    r.errors.push_back("root element is not <quiz>");
    return r;
  }
  bool seen_cloze = false;
  for (const auto& [tag, node] : *quiz) {
    if (tag != "question") continue;
    const std::string type = node.get<std::string>("<xmlattr>.type", "");
    if (type == "category") {
      ++r.category_count;
      if (!seen_cloze && r.category_count == 1) r.category_first = true;
      continue;
    }
    if (type != "cloze") {
      r.errors.push_back("unsupported question type '" + type + "'");
      continue;
    }
    seen_cloze = true;
    ++r.cloze_count;
    QuestionReport q;
    q.name = node.get<std::string>("name.text", "");
    q.questiontext = node.get<std::string>("questiontext.text", "");
    const cloze::ParsedText parsed = cloze::parse_cloze(q.questiontext);
    q.subquestions = parsed.subquestions.size();
    for (const auto& d : parsed.diagnostics) {
      q.problems.push_back("offset " + std::to_string(d.offset) + ": " + d.message);
      r.errors.push_back(q.name + ": offset " + std::to_string(d.offset) + ": " + d.message);
    }
    r.questions.push_back(std::move(q));
  }
  if (r.category_count != 1) r.errors.push_back("expected exactly one category question, found " + std::to_string(r.category_count));
  if (r.category_count >= 1 && !r.category_first) r.errors.push_back("category question must precede the cloze questions");
  return r;
}

}  // namespace quizforge::xml
