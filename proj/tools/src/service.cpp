#include "quizforge/service.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>

#include <nlohmann/json.hpp>

#include "quizforge/checks.hpp"
#include "quizforge/corpus.hpp"
#include "quizforge/template.hpp"
#include "quizforge/xmlout.hpp"

namespace quizforge::service {
namespace {

using json = nlohmann::ordered_json;

// A request problem with an HTTP status; turned into an error reply.
struct Failure {
  int status;
  std::vector<quiz::Issue> issues;
};

Reply json_reply(int status, const json& body) {
  Reply r;
  r.status = status;
  r.body = body.dump();
  return r;
}

Reply error_reply(const Failure& f) {
  json errors = json::array();
  for (const auto& i : f.issues) errors.push_back({{"path", i.path}, {"message", i.message}});
  return json_reply(f.status, {{"ok", false}, {"errors", errors}});
}

json parse_body(std::string_view body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw Failure{400, {{"", std::string("malformed JSON: ") + e.what()}}};
  }
}

const json& object_field(const json& body, const std::string& key) {
  if (!body.is_object()) throw Failure{422, {{"", "request body must be a JSON object"}}};
  if (!body.contains(key)) throw Failure{422, {{key, "missing required field"}}};
  return body[key];
}

quiz::QuizTemplate template_from(const json& doc) {
  try {
    return quiz::load_template(doc.dump());
  } catch (const quiz::TemplateError& e) {
    std::vector<quiz::Issue> issues;
    for (const auto& i : e.issues()) issues.push_back({i.path.empty() ? "template" : "template." + i.path, i.message});
    throw Failure{422, issues};
  }
}

// Seeds may arrive as JSON numbers or as decimal strings, since JavaScript
// numbers cannot carry every 64-bit value.
std::uint64_t seed_from(const json& body) {
  const json& s = object_field(body, "seed");
  if (s.is_number_unsigned()) return s.get<std::uint64_t>();
  if (s.is_string()) {
    const std::string text = s.get<std::string>();
    std::uint64_t v = 0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec == std::errc{} && r.ptr == text.data() + text.size() && !text.empty()) return v;
  }
  throw Failure{422, {{"seed", "expected a nonnegative integer"}}};
}

std::int64_t integer_field(const json& body, const std::string& key, std::int64_t fallback, std::int64_t lo,
                           std::int64_t hi, const std::string& range_message) {
  if (!body.contains(key)) return fallback;
  const json& v = body[key];
  if (!v.is_number_integer()) throw Failure{422, {{key, "expected an integer"}}};
  const auto x = v.get<std::int64_t>();
  if (x < lo || x > hi) throw Failure{422, {{key, range_message}}};
  return x;
}

std::optional<int> story_from(const json& body) {
  if (!body.contains("story") || body["story"].is_null()) return std::nullopt;
  return static_cast<int>(integer_field(body, "story", 1, 1, 1000, "story must be ≥ 1"));
}

Reply guarded(std::string_view body, Reply (*run)(const json&)) {
  try {
    return run(parse_body(body));
  } catch (const Failure& f) {
    return error_reply(f);
  } catch (const quiz::GenerationError& e) {
    return error_reply({422, {{"instance " + std::to_string(e.index() + 1), e.what()}}});
  } catch (const xml::XmlError& e) {
    return error_reply({422, {{"", e.what()}}});
  } catch (const std::invalid_argument& e) {
    return error_reply({422, {{"", e.what()}}});
  }
}

Reply run_validate(const json& doc) {
  const quiz::QuizTemplate t = template_from(doc);
  std::vector<quiz::Issue> issues = checks::check_instances(t);
  if (!issues.empty()) {
    for (auto& i : issues) i.path = "template." + i.path;
    throw Failure{422, issues};
  }
  return json_reply(200, {{"ok", true}, {"name", t.name}, {"stories", t.stories.size()}});
}

Reply run_preview(const json& body) {
  const quiz::QuizTemplate t = template_from(object_field(body, "template"));
  const std::uint64_t seed = seed_from(body);
  const auto index = integer_field(body, "index", 0, 0, std::numeric_limits<std::int64_t>::max(), "index must be ≥ 0");
  const quiz::QuizInstance inst = quiz::instantiate(t, seed, static_cast<std::size_t>(index), story_from(body));
  return json_reply(200, {{"qtxt", inst.qtxt},
                          {"htxt", inst.htxt},
                          {"atxt", inst.atxt},
                          {"category", inst.category},
                          {"quizname", inst.quizname}});
}

Reply run_generate(const json& body) {
  const quiz::QuizTemplate t = template_from(object_field(body, "template"));
  const std::uint64_t seed = seed_from(body);
  const auto n = integer_field(body, "n", t.count, 1, 100000, "n must be ≥ 1");
  const xml::Generated g = xml::generate(t, static_cast<std::size_t>(n), seed, story_from(body));
  Reply r;
  r.content_type = "application/xml";
  r.body = g.xml;
  r.headers.emplace_back("Content-Disposition", "attachment; filename=\"" + t.name + ".xml\"");
  json manifest = {{"seed", g.manifest.seed}, {"n", g.manifest.n}, {"sha256", g.manifest.sha256}};
  r.headers.emplace_back(kManifestHeader, manifest.dump());
  return r;
}

Reply not_found(const std::string& what) { return error_reply({404, {{"", what}}}); }

}  // namespace

std::optional<std::string> Reply::header(std::string_view name) const {
  const auto same = [&](const std::string& h) {
    return std::equal(h.begin(), h.end(), name.begin(), name.end(),
                      [](char a, char b) { return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b)); });
  };
  for (const auto& [k, v] : headers) {
    if (same(k)) return v;
  }
  return std::nullopt;
}

Reply validate(std::string_view body) { return guarded(body, run_validate); }
Reply preview(std::string_view body) { return guarded(body, run_preview); }
Reply generate(std::string_view body) { return guarded(body, run_generate); }

Reply list_examples() {
  json out = json::array();
  for (const auto& e : corpus::list_examples()) {
    out.push_back({{"id", e.id}, {"file", e.file}, {"name", e.name}, {"title", e.title}, {"description", e.description}});
  }
  return json_reply(200, out);
}

Reply example(std::string_view id) {
  int n = 0;
  const auto r = std::from_chars(id.data(), id.data() + id.size(), n);
  if (r.ec != std::errc{} || r.ptr != id.data() + id.size()) return not_found("no example '" + std::string(id) + "'");
  try {
    Reply reply;
    reply.body = corpus::example_document(n);
    return reply;
  } catch (const std::out_of_range&) {
    return not_found("no example " + std::to_string(n));
  }
}

Reply handle(const Request& request) {
  constexpr std::string_view kExamples = "/api/examples";
  const std::string_view path = request.path;
  const bool get = request.method == "GET";
  const bool post = request.method == "POST";
  Reply r;
  if (path == "/api/validate" || path == "/api/preview" || path == "/api/generate") {
    if (!post) {
      r = error_reply({405, {{"", "use POST"}}});
      r.headers.emplace_back("Allow", "POST");
      return r;
    }
    if (path == "/api/validate") return validate(request.body);
    if (path == "/api/preview") return preview(request.body);
    return generate(request.body);
  }
  if (path == kExamples || path.starts_with(std::string(kExamples) + "/")) {
    if (!get) {
      r = error_reply({405, {{"", "use GET"}}});
      r.headers.emplace_back("Allow", "GET");
      return r;
    }
    if (path == kExamples) return list_examples();
    return example(path.substr(kExamples.size() + 1));
  }
  return not_found("no route for " + request.method + " " + request.path);
}

}  // namespace quizforge::service
