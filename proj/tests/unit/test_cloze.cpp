#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "quizforge/cloze.hpp"
#include "quizforge/numfmt.hpp"

using namespace quizforge;
using namespace quizforge::cloze;

TEST_CASE("encode_nm reproduces the canonical strings") {
  const std::vector<double> t1{54.7}, tol1{0.1, 0.5};
  const std::vector<int> w1{100, 80};
  CHECK(encode_nm(t1, w1, tol1, 2) == "{2:NM:%100%54.7:0.1~%80%54.7:0.5}");

  const std::vector<double> t2{50}, tol2{0};
  const std::vector<int> w2{100};
  CHECK(encode_nm(t2, w2, tol2, 1) == "{1:NM:%100%50:0}");

  const std::vector<double> t3{10}, tol3{0.05, 0.5};
  const std::vector<int> w3{100, 50};
  const std::string s3 = encode_nm(t3, w3, tol3, 1);
  CHECK(s3 == "{1:NM:%100%10:0.05~%50%10:0.5}");
  CHECK(encode(parse_subquestion(s3)) == s3);
}

TEST_CASE("encode_nm rejects bad input") {
  const std::vector<double> t{1}, tol{0};
  const std::vector<int> no_full{80};
  CHECK_THROWS_AS(encode_nm(t, no_full, tol, 1), ClozeError);
  const std::vector<int> w{100};
  const std::vector<double> neg{-0.1};
  CHECK_THROWS_AS(encode_nm(t, w, neg, 1), ClozeError);
  const std::vector<double> three{1, 2, 3};
  const std::vector<int> two{100, 50};
  CHECK_THROWS_AS(encode_nm(three, two, tol, 1), ClozeError);
}

TEST_CASE("encode_nm_digits bands") {
  const std::string a = encode_nm_digits(54.738, 1, 1);
  CHECK(a.find("%100%54.7:0.005") != std::string::npos);
  CHECK(a.find("%80%54.74:0.0005") != std::string::npos);
  CHECK(encode_nm_digits(50, 0, 1).find("%100%50:0.05") != std::string::npos);
  CHECK(encode_nm_digits(0.125, 2, 2).find("%100%0.13:0.0005") != std::string::npos);
  CHECK_THROWS_AS(encode_nm_digits(1.5, -1, 1), ClozeError);

  // Band membership against the rule itself.
  const SubQuestion sub = nm_digits_question(54.738, 1);
  CHECK(grade(sub, "54.7").fraction == 1.0);
  CHECK(grade(sub, "54.74").fraction == 0.8);
  CHECK(grade(sub, "55").fraction == 0.8);
  CHECK(grade(sub, "54.8").fraction == 0.0);
}

TEST_CASE("encode_mc and the built-in option sets") {
  const auto set2 = builtin_mc_options(2);
  CHECK(set2 == std::vector<std::string>{"lower", "not equal to", "higher"});
  const std::vector<int> w{0, 0, 100};
  const McQuestion q = encode_mc(set2, w, 1);
  CHECK(q.question == "{1:MC:~%0%lower~%0%not equal to~%100%higher}");
  CHECK(q.correct_text == "higher");

  const std::vector<std::string> tf{"true", "false"};
  const std::vector<int> w2{100, 0};
  CHECK(encode_mc(tf, w2, 1).question == "{1:MC:~%100%true~%0%false}");
  CHECK(encode_mc(tf, w2, 1).correct_text == "true");

  const std::vector<std::string> three{"lower", "the same", "higher"};
  const std::vector<int> w3{0, 100, 0};
  const McQuestion q3 = encode_mc(three, w3, 1);
  CHECK(q3.question == "{1:MC:~%0%lower~%100%the same~%0%higher}");
  CHECK(q3.correct_text == "the same");
  CHECK(encode(parse_subquestion(q3.question)) == q3.question);

  CHECK(builtin_mc_options(1) == std::vector<std::string>{"lower", "not equal to", "higher", "can't tell"});
  CHECK(builtin_mc_options(5) == std::vector<std::string>{"is", "is not"});
  CHECK(builtin_mc_options(7) == std::vector<std::string>{"true", "false"});
  CHECK(builtin_mc_options(9) == std::vector<std::string>{"\\(\\ne\\)", "\\(<\\)", "\\(>\\)", "can't tell"});
  CHECK(builtin_mc_options(11) ==
        std::vector<std::string>{"\\(\\mu\\)", "\\(\\pi\\)", "\\(\\sigma\\)", "\\(\\lambda\\)", "\\(\\rho\\)", "other"});
  CHECK_THROWS_AS(builtin_mc_options(0), ClozeError);
  CHECK_THROWS_AS(builtin_mc_options(12), ClozeError);

  const std::vector<std::string> empty_opt{"a", ""};
  const std::vector<int> w4{100, 0};
  CHECK_THROWS_AS(encode_mc(empty_opt, w4, 1), ClozeError);
}

TEST_CASE("encode_sa inserts wildcards") {
  const std::vector<std::string> t1{"correlation coefficient"};
  const std::vector<int> w1{100};
  CHECK(encode_sa(t1, w1, true, 1) == "{1:SA:*correlation*coefficient*}");
  const std::vector<std::string> t2{"x"};
  CHECK(encode_sa(t2, w1, false, 1) == "{1:SAC:*x*}");
  const std::vector<std::string> t3{"chi square test", "chi-square test"};
  const std::vector<int> w3{100, 100};
  const std::string s3 = encode_sa(t3, w3, true, 1);
  CHECK(s3 == "{1:SA:*chi*square*test*~*chi-square*test*}");
  CHECK(parse_subquestion(s3) == parse_subquestion(encode(parse_subquestion(s3))));
  const std::vector<std::string> empty{""};
  CHECK_THROWS_AS(encode_sa(empty, w1, true, 1), ClozeError);
}

TEST_CASE("parse_cloze splits text and reports bad groups") {
  const ParsedText p = parse_cloze("{2:NM:%100%54.7:0.1~%80%54.7:0.5}");
  REQUIRE(p.ok());
  REQUIRE(p.subquestions.size() == 1);
  CHECK(p.subquestions[0].kind == Kind::NM);
  CHECK(p.subquestions[0].points == 2);
  CHECK(p.subquestions[0].answers.size() == 2);

  const ParsedText plain = parse_cloze("no braces here");
  CHECK(plain.segments == std::vector<std::string>{"no braces here"});
  CHECK(plain.subquestions.empty());

  const ParsedText latex = parse_cloze("\\(\\frac{1}{2}\\) and {1:MC:~=a~b}");
  REQUIRE(latex.ok());
  CHECK(latex.subquestions.size() == 1);
  CHECK(latex.segments.front() == "\\(\\frac{1}{2}\\) and ");

  const ParsedText bad = parse_cloze("before {1:NM:%100%abc:0} after");
  CHECK_FALSE(bad.ok());
  CHECK(bad.diagnostics[0].offset == 13);  // the offending answer, inside the group at 7

  CHECK_FALSE(parse_cloze("x {1:NM:%100%5:0").ok());
  CHECK_FALSE(parse_cloze("{1:MC:~%150%a}").ok());
  CHECK_THROWS_AS(parse_subquestion("{1:XX:a}"), ClozeError);
}

TEST_CASE("the '=' shorthand is canonicalised") {
  CHECK(encode(parse_subquestion("{1:NM:=50}")) == "{1:NM:%100%50:0}");
  CHECK(encode(parse_subquestion("{1:MC:=yes~no}")) == "{1:MC:~%100%yes~%0%no}");
  CHECK(encode(parse_subquestion("{3:SA:=*red*~%50%*pink*}")) == "{3:SA:*red*~%50%*pink*}");
}

TEST_CASE("feedback and escapes survive a round trip") {
  const std::string s = "{1:MC:~%100%50\\% off#right~%0%a \\} b\\~c}";
  const SubQuestion sub = parse_subquestion(s);
  CHECK(std::get<std::string>(sub.answers[0].target) == "50% off");
  CHECK(sub.answers[0].feedback == std::optional<std::string>("right"));
  CHECK(std::get<std::string>(sub.answers[1].target) == "a } b~c");
  CHECK(parse_subquestion(encode(sub)) == sub);
}

TEST_CASE("grade follows the matching rules") {
  const SubQuestion nm = parse_subquestion("{2:NM:%100%54.7:0.1~%80%54.7:0.5}");
  CHECK(grade(nm, "54.65").fraction == 1.0);
  CHECK(grade(nm, "55").fraction == 0.8);
  CHECK(grade(nm, "54.6").fraction == 1.0);  // exactly on the boundary
  CHECK(grade(nm, "54.80000001").fraction == 0.8);
  CHECK(grade(nm, "56").fraction == 0.0);
  CHECK(grade(nm, " 54.7 ").fraction == 1.0);
  const Grade g = grade(nm, "fifty");
  CHECK(g.fraction == 0.0);
  CHECK(g.non_numeric);

  const SubQuestion sa = parse_subquestion("{1:SA:*correlation*coefficient*}");
  CHECK(grade(sa, "correlation  coefficient").fraction == 1.0);
  CHECK(grade(sa, "Correlation Coefficient").fraction == 1.0);
  CHECK(grade(sa, "coefficient").fraction == 0.0);
  const SubQuestion sac = parse_subquestion("{1:SAC:*x*}");
  CHECK(grade(sac, "x").fraction == 1.0);
  CHECK(grade(sac, "X").fraction == 0.0);

  const SubQuestion mc = parse_subquestion("{1:MC:~%0%lower~%50%the same~%100%higher}");
  CHECK(grade(mc, "higher").fraction == 1.0);
  CHECK(grade(mc, "the same").fraction == 0.5);
  CHECK(grade(mc, "Higher").fraction == 0.0);
}

TEST_CASE("best matching band wins regardless of order") {
  const SubQuestion a = parse_subquestion("{1:NM:%50%10:1~%100%10:0.1}");
  const SubQuestion b = parse_subquestion("{1:NM:%100%10:0.1~%50%10:1}");
  for (const char* r : {"10", "10.05", "10.5", "12"}) CHECK(grade(a, r).fraction == grade(b, r).fraction);
  CHECK(grade(a, "10.05").fraction == 1.0);
}

TEST_CASE("properties over random subquestions") {
  std::mt19937_64 gen(20240611);
  std::uniform_int_distribution<int> pts(1, 5);
  std::uniform_real_distribution<double> val(-1000, 1000);
  for (int trial = 0; trial < 500; ++trial) {
    const double target = round_half_away(val(gen), 3);
    const double tol = round_half_away(std::uniform_real_distribution<double>(0, 2)(gen), 3);
    const std::vector<double> t{target}, tl{tol};
    const std::vector<int> w{100};
    const SubQuestion sub = parse_subquestion(encode_nm(t, w, tl, pts(gen)));
    CHECK(grade(sub, format_number(target)).fraction == 1.0);

    SubQuestion scaled = sub;
    scaled.points = 1;
    const std::string probe = format_number(target + tol * 0.7);
    CHECK(grade(sub, probe).fraction == grade(scaled, probe).fraction);
  }

  // Extra whitespace between tokens never lowers an SA grade.
  const std::vector<std::string> words{"least", "squares", "regression", "line"};
  const std::vector<std::string> texts{"least squares regression line"};
  const std::vector<int> w{100};
  const SubQuestion sa = parse_subquestion(encode_sa(texts, w, true, 1));
  for (int trial = 0; trial < 200; ++trial) {
    std::string response;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) response += std::string(1 + gen() % 4, gen() % 2 ? ' ' : '\t');
      response += words[i];
    }
    CHECK(grade(sa, response).fraction == 1.0);
  }
}
