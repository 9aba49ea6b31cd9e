// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "quizforge/cli.hpp"
#include "quizforge/cloze.hpp"
#include "quizforge/corpus.hpp"
#include "quizforge/expr.hpp"
#include "quizforge/htmlgen.hpp"
#include "quizforge/numfmt.hpp"
#include "quizforge/pastedata.hpp"
#include "quizforge/service.hpp"
#include "quizforge/stats.hpp"
#include "quizforge/template.hpp"
#include "quizforge/xmlout.hpp"

namespace fs = std::filesystem;
using namespace quizforge;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int g_failed = 0;

void criterion(const char* name, double limit_seconds, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_seconds > 0 && seconds > limit_seconds) {
    o.pass = false;
    o.detail += "; exceeded " + std::to_string(static_cast<int>(limit_seconds)) + " s";
  }
  if (!o.pass) ++g_failed;
  std::printf("%s  %-22s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds);
  std::fflush(stdout);
}

// Keeps the first few mismatches for the report.
struct Tally {
  std::size_t checked = 0;
  std::size_t failed = 0;
  std::string first;

  void check(bool ok, const std::function<std::string()>& describe) {
    ++checked;
    if (ok) return;
    if (failed++ == 0) first = describe();
  }
  Outcome outcome(const std::string& what) const {
    std::string d = std::to_string(checked - failed) + "/" + std::to_string(checked) + " " + what;
    if (failed > 0) d += "; first mismatch: " + first;
    return {failed == 0, d};
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Cli {
  int code;
  std::string out;
  std::string err;
};

Cli run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "quizforge");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path corpus_dir() { return QUIZFORGE_CORPUS_DIR; }

class Fuzzer {
 public:
  explicit Fuzzer(std::uint64_t seed) : gen_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  bool chance(double p) { return real(0, 1) < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
  }

  std::string text(std::string_view alphabet, int min_len, int max_len) {
    std::string s;
    const int n = integer(min_len, max_len);
    for (int i = 0; i < n; ++i) s += alphabet[static_cast<std::size_t>(integer(0, static_cast<int>(alphabet.size()) - 1))];
    return s;
  }

  // A decimal with at most 9 significant digits, as text.
  std::string decimal_text() {
    std::string digits = std::to_string(integer(0, 999999999) % static_cast<int>(std::pow(10, integer(1, 9))));
    const int places = integer(0, 6);
    if (static_cast<int>(digits.size()) <= places) digits.insert(0, static_cast<std::size_t>(places + 1) - digits.size(), '0');
    if (places > 0) digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
    return chance(0.3) ? "-" + digits : digits;
  }

  double target(bool& exact) {
    if (chance(0.85)) return std::stod(decimal_text());
    exact = false;
    return real(-1e4, 1e4);
  }

  double tolerance() {
    if (chance(0.25)) return 0;
    return std::stod(std::to_string(integer(1, 999)) + "e-" + std::to_string(integer(0, 6)));
  }

  std::vector<int> weights(std::size_t n) {
    std::vector<int> w(n);
    for (int& x : w) x = chance(0.4) ? pick(std::vector<int>{0, 50, 80, 100}) : integer(0, 100);
    w[static_cast<std::size_t>(integer(0, static_cast<int>(n) - 1))] = 100;
    return w;
  }

  cloze::SubQuestion subquestion(bool& exact) {
    exact = true;
    cloze::SubQuestion s;
    s.kind = static_cast<cloze::Kind>(integer(0, 3));
    s.points = integer(1, 5);
    const std::size_t n = static_cast<std::size_t>(integer(1, 4));
    const std::vector<int> w = weights(n);
    for (std::size_t i = 0; i < n; ++i) {
      cloze::Answer a;
      a.weight = w[i];
      switch (s.kind) {
        case cloze::Kind::NM:
          a.target = target(exact);
          a.tolerance = tolerance();
          break;
        case cloze::Kind::MC:
          a.target = text("abcXY %~#}=", 1, 6);
          break;
        default:
          a.target = text("abAB c*%~#}=", 1, 8);
      }
      if (chance(0.1)) a.feedback = text("ok #~%}", 1, 5);
      s.answers.push_back(std::move(a));
    }
    return s;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

mpz_class pow10(unsigned long k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, k);
  return r;
}

// One of several spellings of the same exact value.
std::string spell(Fuzzer& f, const mpq_class& q) {
  std::string s;
  switch (f.integer(0, 3)) {
    case 0:
      s = oracle::to_decimal(q);
      break;
    case 1: {
      const int j = f.integer(-3, 3);
      const mpq_class scaled = j >= 0 ? mpq_class(q / pow10(static_cast<unsigned long>(j)))
                                      : mpq_class(q * pow10(static_cast<unsigned long>(-j)));
      s = oracle::to_decimal(scaled) + (f.chance(0.5) ? "e" : "E") + std::to_string(j);
      break;
    }
    case 2:
      s = (q >= 0 ? "+" : "") + oracle::to_decimal(q);
      break;
    default:
      s = " \t" + oracle::to_decimal(q) + " ";
  }
  return s;
}

std::vector<std::string> nm_responses(Fuzzer& f, const oracle::Question& q, std::size_t& boundary) {
  std::vector<std::string> out;
  for (const oracle::Answer& a : q.answers) {
    const mpq_class eps = a.tolerance / pow10(6) + mpq_class(1, 1000000000000);
    std::vector<mpq_class> points{a.target,
                                  a.target + a.tolerance,
                                  a.target - a.tolerance,
                                  a.target + a.tolerance + eps,
                                  a.target - a.tolerance - eps};
    if (a.tolerance > eps) {
      points.push_back(a.target + a.tolerance - eps);
      points.push_back(a.target - a.tolerance + eps);
    }
    for (const mpq_class& p : points) out.push_back(spell(f, p));
    boundary += points.size();
  }
  static const std::vector<std::string> junk{"",   "abc", "1,5", "--1", "1e", ".",   "5.",  ".5", "0x10",
                                             "inf", "nan", "1 2", "+-3", "e5", "1e+", " 7 ", "1.2.3"};
  for (int i = 0; i < 6; ++i) out.push_back(f.pick(junk));
  while (out.size() < 100) {
    const oracle::Answer& a = q.answers[static_cast<std::size_t>(f.integer(0, static_cast<int>(q.answers.size()) - 1))];
    const mpq_class offset = oracle::decimal(f.decimal_text()) / pow10(static_cast<unsigned long>(f.integer(0, 6)));
    out.push_back(spell(f, a.target + offset));
  }
  out.resize(100);
  return out;
}

std::string flip_case(Fuzzer& f, std::string s) {
  for (char& c : s) {
    if (std::isalpha(static_cast<unsigned char>(c)) && f.chance(0.3)) {
      c = static_cast<char>(std::isupper(static_cast<unsigned char>(c)) ? std::tolower(c) : std::toupper(c));
    }
  }
  return s;
}

std::vector<std::string> text_responses(Fuzzer& f, const oracle::Question& q) {
  std::vector<std::string> out;
  while (out.size() < 100) {
    const oracle::Answer& a = q.answers[static_cast<std::size_t>(f.integer(0, static_cast<int>(q.answers.size()) - 1))];
    switch (f.integer(0, 4)) {
      case 0:
        out.push_back(a.text);
        break;
      case 1:
        out.push_back(flip_case(f, a.text));
        break;
      case 2: {
        std::string filled;
        for (char c : a.text) filled += c == '*' ? f.text("ab AB c", 0, 3) : std::string(1, c);
        out.push_back(f.chance(0.5) ? flip_case(f, filled) : filled);
        break;
      }
      case 3:
        out.push_back(a.text + (f.chance(0.5) ? " " : ""));
        break;
      default:
        out.push_back(f.text("abAB c%~#}=*", 0, 8));
    }
  }
  return out;
}

Outcome cloze_exactness() {
  const std::vector<std::string> mc_options = cloze::builtin_mc_options(2);
  const std::vector<int> mc_weights{0, 0, 100};
  const std::string mc = cloze::encode_mc(mc_options, mc_weights, 1).question;
  const std::vector<double> targets{54.7}, tolerances{0.1, 0.5};
  const std::vector<int> nm_weights{100, 80};
  const std::string nm = cloze::encode_nm(targets, nm_weights, tolerances, 2);
  const std::vector<std::string> texts{"correlation coefficient"};
  const std::vector<int> sa_weights{100};
  const std::string sa = cloze::encode_sa(texts, sa_weights, true, 1);
  Tally t;
  t.check(mc == "{1:MC:~%0%lower~%0%not equal to~%100%higher}", [&] { return mc; });
  t.check(nm == "{2:NM:%100%54.7:0.1~%80%54.7:0.5}", [&] { return nm; });
  t.check(sa == "{1:SA:*correlation*coefficient*}", [&] { return sa; });
  return t.outcome("strings byte-identical");
}

Outcome grading_oracle() {
  Fuzzer f(20240601);
  Tally t;
  std::size_t boundary = 0;
  for (int i = 0; i < 1000; ++i) {
    bool exact = true;
    const cloze::SubQuestion sub = f.subquestion(exact);
    const std::string wire = cloze::encode(sub);
    const oracle::Question q = oracle::parse_wire(wire);
    const std::vector<std::string> responses =
        sub.kind == cloze::Kind::NM ? nm_responses(f, q, boundary) : text_responses(f, q);
    for (const std::string& r : responses) {
      const cloze::Grade g = cloze::grade(sub, r);
      const int expected = oracle::grade(q, r);
      bool ok = g.fraction == expected / 100.0;
      if (sub.kind == cloze::Kind::NM) ok = ok && g.non_numeric == !oracle::is_decimal(r);
      t.check(ok, [&] {
        return wire + " <- \"" + r + "\": library " + std::to_string(g.fraction) + ", oracle " +
               std::to_string(expected / 100.0);
      });
    }
  }
  return t.outcome("cases agree (" + std::to_string(boundary) + " NM boundary cases)");
}

Outcome round_trip() {
  Fuzzer f(77);
  Tally t;
  std::size_t shorthand = 0;
  for (int i = 0; i < 10000; ++i) {
    bool exact = true;
    const cloze::SubQuestion sub = f.subquestion(exact);
    const std::string w1 = cloze::encode(sub);
    const cloze::SubQuestion back = cloze::parse_subquestion(w1);
    const std::string w2 = cloze::encode(back);
    t.check(w1 == w2, [&] { return w1 + " -> " + w2; });
    if (exact) t.check(back == sub, [&] { return "structure changed: " + w1; });

    std::string shorthand_form;
    for (std::size_t pos = 0; pos < w1.size();) {
      if (w1.compare(pos, 5, "%100%") == 0 && w1[pos - 1] != '\\') {
        shorthand_form += '=';
        pos += 5;
      } else {
        shorthand_form += w1[pos++];
      }
    }
    if (shorthand_form != w1) {
      ++shorthand;
      const std::string canonical = cloze::encode(cloze::parse_subquestion(shorthand_form));
      t.check(canonical == w1, [&] { return shorthand_form + " -> " + canonical; });
    }
  }
  return t.outcome("checks (" + std::to_string(shorthand) + " '=' shorthand forms)");
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "quizforge_acceptance_det";
  fs::remove_all(base);
  Tally t;
  for (const auto& info : corpus::list_examples()) {
    const std::string path = (corpus_dir() / info.file).string();
    std::string bytes[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path dir = base / std::to_string(run);
      const Cli r = run_cli({"generate", path, "--seed", "42", "--n", "20", "--out", dir.string()});
      if (r.code != 0) throw std::runtime_error(info.file + ": " + r.err);
      bytes[run] = slurp(dir / (info.name + ".xml"));
    }
    t.check(bytes[0] == bytes[1], [&] { return info.file + " differs between runs"; });
    const xml::Manifest golden = xml::parse_manifest(slurp(corpus_dir() / "golden" / (info.name + ".manifest.json")));
    const std::string hash = xml::sha256_hex(bytes[0]);
    t.check(golden.seed == 42 && golden.n == 20 && golden.sha256 == hash,
            [&] { return info.file + " hash " + hash + " != golden " + golden.sha256; });
    t.check(slurp(corpus_dir() / "golden" / (info.name + ".xml")) == bytes[0],
            [&] { return info.file + " differs from golden XML"; });
  }
  fs::remove_all(base);
  return t.outcome("checks; golden hashes match for 15 templates");
}

Outcome corpus_soundness() {
  Tally t;
  std::size_t groups = 0, partial = 0;
  for (const auto& info : corpus::list_examples()) {
    const quiz::QuizTemplate tmpl = corpus::load_example(info.id);
    std::vector<std::uint64_t> seeds{42};
    for (std::uint64_t s = 1; s <= 50; ++s) seeds.push_back(s);
    for (std::uint64_t seed : seeds) {
      const quiz::Batch b = quiz::instantiate_batch(tmpl, seed, 20);
      t.check(b.instances.size() == 20, [&] { return info.file + " wrong count"; });
      for (const quiz::QuizInstance& q : b.instances) {
        const cloze::ParsedText p = cloze::parse_cloze(q.qtxt);
        t.check(p.ok() && p.subquestions.size() == q.answer_key.size(),
                [&] { return info.file + " " + q.quizname + " does not parse cleanly"; });
        if (!p.ok()) continue;
        for (std::size_t k = 0; k < p.subquestions.size(); ++k) {
          ++groups;
          const double g = cloze::grade(p.subquestions[k], q.answer_key[k]).fraction;
          t.check(g == 1.0, [&] {
            return info.file + " " + q.quizname + " group " + std::to_string(k + 1) + " \"" + q.answer_key[k] +
                   "\" -> " + std::to_string(g);
          });
        }
        if (info.id == 1) {
          const std::string unrounded = format_number(q.values.at("mean_x").as_number());
          if (unrounded == format_number(q.values.at("res").as_number())) continue;
          ++partial;
          const double g = cloze::grade(p.subquestions.at(0), unrounded).fraction;
          t.check(g == 0.8, [&] { return "example 1 unrounded " + unrounded + " -> " + std::to_string(g); });
        }
      }
    }
  }
  Outcome o = t.outcome("checks over 51 seeds x 15 templates x 20 instances; " + std::to_string(groups) +
                        " groups at 1.0; " + std::to_string(partial) + " unrounded means at 0.8");
  if (partial == 0) o = {false, o.detail + "; no partial-credit case exercised"};
  return o;
}

Outcome xml_validity() {
  namespace pt = boost::property_tree;
  Tally t;
  auto check_bank = [&](const std::string& label, const std::string& text,
                        const std::vector<quiz::QuizInstance>& instances) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
      pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
      t.check(false, [&] { return label + ": " + e.what(); });
      return;
    }
    std::vector<std::string> types;
    std::vector<std::string> payloads;
    for (const auto& [key, node] : tree.get_child("quiz")) {
      t.check(key == "question", [&] { return label + ": unexpected element " + key; });
      types.push_back(node.get<std::string>("<xmlattr>.type", ""));
      if (types.back() == "cloze") payloads.push_back(node.get<std::string>("questiontext.text"));
    }
    const bool shape = !types.empty() && types.front() == "category" &&
                       std::count(types.begin(), types.end(), "category") == 1 &&
                       std::count(types.begin(), types.end(), "cloze") == static_cast<long>(instances.size()) &&
                       types.size() == instances.size() + 1;
    t.check(shape, [&] { return label + ": wrong question sequence"; });
    for (std::size_t i = 0; i < std::min(payloads.size(), instances.size()); ++i) {
      t.check(payloads[i] == instances[i].qtxt, [&] { return label + ": payload " + std::to_string(i + 1) + " altered"; });
    }
    // Every CDATA section ends at its first "]]>", so a payload holding the
    // sequence must have been split for the text above to survive.
    for (std::size_t pos = text.find("<![CDATA["); pos != std::string::npos; pos = text.find("<![CDATA[", pos + 1)) {
      const std::size_t end = text.find("]]>", pos);
      t.check(end != std::string::npos, [&] { return label + ": unterminated CDATA"; });
    }
  };
  for (const auto& info : corpus::list_examples()) {
    const quiz::QuizTemplate tmpl = corpus::load_example(info.id);
    const xml::Generated g = xml::generate(tmpl, 20, 42);
    check_bank(info.file, g.xml, quiz::instantiate_batch(tmpl, 42, 20).instances);
  }
  quiz::QuizInstance hostile;
  hostile.quizname = "hostile";
  hostile.qtxt = "a ]]> b ]]]]> c {1:SA:=x}]]>";
  hostile.category = "c";
  check_bank("cdata terminators", xml::emit_xml({"c", {hostile}}), {hostile});
  return t.outcome("checks over 15 banks and a hostile payload");
}

Outcome data_round_trip() {
  Fuzzer f(4242);
  Tally t;
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = static_cast<std::size_t>(f.integer(1, 500));
    const int ncol = f.integer(1, 12);
    ColumnData values;
    if (i % 2 == 0) {
      NumVec v(n);
      const int digits = f.integer(0, 4);
      const double scale = std::pow(10, f.integer(0, 4));
      for (double& x : v) x = round_half_away(f.real(-1, 1) * scale, digits);
      values = v;
    } else {
      TextVec v(n);
      for (std::string& s : v) {
        do s = f.text("abcXYZ-_.0123456789", 1, 10);
        while (oracle::is_decimal(s));
      }
      values = v;
    }
    const std::string copied = htmlgen::text_projection(htmlgen::render_vector_table(values, ncol));
    const DataTable table = paste::parse_pasted(copied);
    t.check(table.columns.size() == 1 && table.columns[0].values == values && !table.columns[0].name,
            [&] { return "vector " + std::to_string(i) + " (n " + std::to_string(n) + ", ncol " + std::to_string(ncol) + ")"; });
    const std::string csv = paste::to_csv(table);
    t.check(paste::parse_csv(csv, table.has_names()) == table, [&] { return "csv of vector " + std::to_string(i); });
  }
  return t.outcome("checks over 500 vectors");
}

Outcome numeric_engine() {
  Tally t;
  Fuzzer f(99);
  const std::vector<std::pair<std::string, std::function<double(double)>>> closed{
      {"x * exp(x)", [](double x) { return (x - 1) * std::exp(x); }},
      {"x^2", [](double x) { return x * x * x / 3; }},
      {"sin(x)", [](double x) { return -std::cos(x); }},
  };
  for (const auto& [integrand, antiderivative] : closed) {
    const expr::ExprPtr e = expr::parse_expr("integrate(" + integrand + ", A, B)");
    for (int i = 0; i < 100; ++i) {
      double a = f.real(0, 2), b = f.real(0, 2);
      if (a > b) std::swap(a, b);
      RngStream rng = derive_stream(1, 0);
      const double got = expr::eval(*e, {{"A", expr::Value(a)}, {"B", expr::Value(b)}}, rng).as_number();
      const double want = antiderivative(b) - antiderivative(a);
      t.check(std::fabs(got - want) <= 1e-6,
              [&, integrand = integrand] { return integrand + " on [" + std::to_string(a) + ", " + std::to_string(b) + "]"; });
    }
  }

  const double n = 10000;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto mean_of = [&](const std::string& src) {
      RngStream rng = derive_stream(seed, 0);
      return expr::eval(*expr::parse_expr("mean(" + src + ")"), {}, rng).as_number();
    };
    const double m = mean_of("rnorm(10000, 5, 2)");
    t.check(std::fabs(m - 5) <= 4 * 2 / std::sqrt(n), [&] { return "rnorm seed " + std::to_string(seed); });
    const double u = mean_of("runif(10000, 2, 8)");
    t.check(std::fabs(u - 5) <= 4 * 6 / std::sqrt(12 * n), [&] { return "runif seed " + std::to_string(seed); });
    const double k = mean_of("rbinom(10000, 20, 0.3)");
    t.check(std::fabs(k - 6) <= 4 * std::sqrt(20 * 0.3 * 0.7) / std::sqrt(n), [&] { return "rbinom seed " + std::to_string(seed); });
  }

  const std::vector<double> alphabet{-2, 0, 0.5, 3, 10};
  const std::vector<std::string> probs{"0", "0.1", "0.25", "0.5", "0.75", "0.9", "1"};
  std::size_t vectors = 0;
  for (std::size_t len = 1; len <= 8; ++len) {
    std::vector<std::size_t> idx(len, 0);
    for (;;) {
      std::vector<double> x(len);
      for (std::size_t i = 0; i < len; ++i) x[i] = alphabet[idx[i]];
      ++vectors;
      std::vector<double> s = x;
      std::sort(s.begin(), s.end());
      auto median_of = [](const std::vector<double>& v) {
        const std::size_t m = v.size();
        return m % 2 ? v[m / 2] : (v[m / 2 - 1] + v[m / 2]) / 2;
      };
      // Tukey: hinges are medians of the halves, each half including the
      // median when the length is odd.
      const std::size_t half = (len + 1) / 2;
      const std::vector<double> lower(s.begin(), s.begin() + static_cast<long>(half));
      const std::vector<double> upper(s.end() - static_cast<long>(half), s.end());
      const std::vector<double> want{s.front(), median_of(lower), median_of(s), median_of(upper), s.back()};
      const std::vector<double> got = stats::fivenum(x);
      t.check(got == want, [&] { return "fivenum of length " + std::to_string(len); });
      for (const std::string& p : probs) {
        const mpq_class h = oracle::decimal(p) * static_cast<long>(len - 1);
        const mpz_class lo_z = h.get_num() / h.get_den();
        const std::size_t lo = lo_z.get_ui();
        mpq_class q(s[lo]);
        if (lo + 1 < len) q += (h - lo_z) * (mpq_class(s[lo + 1]) - mpq_class(s[lo]));
        const double v = stats::quantile(x, std::stod(p));
        t.check(std::fabs(v - q.get_d()) <= 1e-12 * (1 + std::fabs(q.get_d())),
                [&] { return "quantile " + p + " of length " + std::to_string(len); });
      }
      std::size_t pos = 0;
      while (pos < len && ++idx[pos] == alphabet.size()) idx[pos++] = 0;
      if (pos == len) break;
    }
  }
  return t.outcome("checks (300 integrals, 60 moment bounds, " + std::to_string(vectors) + " exhaustive vectors)");
}

Outcome parity() {
  Tally t;
  const fs::path dir = fs::temp_directory_path() / "quizforge_acceptance_parity";
  fs::remove_all(dir);
  for (const auto& info : corpus::list_examples()) {
    const std::string path = (corpus_dir() / info.file).string();
    const json doc = json::parse(corpus::example_document(info.id));

    const Cli gen = run_cli({"generate", path, "--seed", "42", "--n", "20", "--out", dir.string()});
    const std::string file = slurp(dir / (info.name + ".xml"));
    const service::Reply reply =
        service::handle({"POST", "/api/generate", json{{"template", doc}, {"seed", 42}, {"n", 20}}.dump()});
    t.check(gen.code == 0 && reply.status == 200 && reply.body == file,
            [&] { return info.file + ": /api/generate differs from generate"; });
    const auto manifest = reply.header(service::kManifestHeader);
    t.check(manifest && json::parse(*manifest)["sha256"] == xml::sha256_hex(file),
            [&] { return info.file + ": manifest header hash differs"; });

    for (int index : {0, 7}) {
      const Cli prev = run_cli({"preview", path, "--seed", "42", "--index", std::to_string(index)});
      const service::Reply pr = service::handle(
          {"POST", "/api/preview", json{{"template", doc}, {"seed", 42}, {"index", index}}.dump()});
      const json body = json::parse(pr.body);
      const cli::PreviewFields fields{body.value("qtxt", ""), body.value("htxt", ""), body.value("atxt", ""),
                                      body.value("category", ""), body.value("quizname", "")};
      t.check(prev.code == 0 && pr.status == 200 && cli::render_preview(fields, cli::PreviewFormat::html) == prev.out,
              [&] { return info.file + ": /api/preview differs from preview at index " + std::to_string(index); });
    }
  }
  fs::remove_all(dir);
  return t.outcome("checks over 15 templates");
}

}  // namespace

int main() {
  criterion("cloze-exactness", 1, cloze_exactness);
  criterion("grading-oracle", 30, grading_oracle);
  criterion("round-trip", 30, round_trip);
  criterion("determinism", 0, determinism);
  criterion("corpus-soundness", 60, corpus_soundness);
  criterion("xml-validity", 0, xml_validity);
  criterion("data-round-trip", 0, data_round_trip);
  criterion("numeric-engine", 0, numeric_engine);
  criterion("service-cli-parity", 0, parity);
  std::printf("%d criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
