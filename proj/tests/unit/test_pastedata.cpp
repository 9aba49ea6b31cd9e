#include <doctest.h>

#include <string>

#include "quizforge/htmlgen.hpp"
#include "quizforge/numfmt.hpp"
#include "quizforge/pastedata.hpp"
#include "quizforge/rng.hpp"

using namespace quizforge;
using namespace quizforge::paste;

TEST_CASE("a copied vector table comes back in order") {
  NumVec v;
  for (int i = 0; i < 23; ++i) v.push_back(100.5 + i * 1.25);
  const std::string text = htmlgen::text_projection(htmlgen::render_vector_table(v, 10));
  const DataTable t = parse_pasted(text);
  REQUIRE(t.columns.size() == 1);
  CHECK_FALSE(t.columns[0].name.has_value());
  CHECK(std::get<NumVec>(t.columns[0].values) == v);
}

TEST_CASE("header detection") {
  const DataTable t = parse_pasted("a b\n1 2\n3 4");
  REQUIRE(t.columns.size() == 2);
  CHECK(t.columns[0].name == "a");
  CHECK(t.columns[1].name == "b");
  CHECK(std::get<NumVec>(t.columns[0].values) == NumVec{1, 3});
  CHECK(std::get<NumVec>(t.columns[1].values) == NumVec{2, 4});
}

TEST_CASE("text columns and tabs") {
  const DataTable t = parse_pasted("brand\tn\nCoca-Cola\t12\nPepsi\t7\n");
  REQUIRE(t.columns.size() == 2);
  CHECK(t.columns[0].name == "brand");
  CHECK(std::get<TextVec>(t.columns[0].values) == TextVec{"Coca-Cola", "Pepsi"});
  CHECK(std::get<NumVec>(t.columns[1].values) == NumVec{12, 7});

  const DataTable words = parse_pasted("Coca-Cola Pepsi Pepsi\nCoca-Cola Pepsi");
  REQUIRE(words.columns.size() == 1);
  CHECK(std::get<TextVec>(words.columns[0].values) == TextVec{"Coca-Cola", "Pepsi", "Pepsi", "Coca-Cola", "Pepsi"});
}

TEST_CASE("only '.' is a decimal separator") {
  const DataTable t = parse_pasted("1,5 2,5");
  CHECK_FALSE(t.columns[0].is_numeric());
}

TEST_CASE("empty input is an error") {
  CHECK_THROWS_AS(parse_pasted(""), PasteError);
  CHECK_THROWS_AS(parse_pasted(" \n\t\n"), PasteError);
}

TEST_CASE("csv quoting and crlf") {
  DataTable t;
  t.columns.push_back({"name", TextVec{"a,b", "say \"hi\"", " pad", "line\nbreak"}});
  t.columns.push_back({"x", NumVec{1.5, -2, 1e-7, 3}});
  const std::string csv = to_csv(t);
  CHECK(csv.starts_with("name,x\r\n\"a,b\",1.5\r\n\"say \"\"hi\"\"\",-2\r\n\" pad\","));
  CHECK(csv.ends_with("\r\n"));
  CHECK(parse_csv(csv, true) == t);

  DataTable unnamed;
  unnamed.columns.push_back({std::nullopt, NumVec{1, 2}});
  CHECK(to_csv(unnamed) == "1\r\n2\r\n");
  CHECK(parse_csv(to_csv(unnamed), false) == unnamed);
}

TEST_CASE("random vectors survive render, copy and parse") {
  RngStream rng = derive_stream(11, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.next_below(60);
    const int digits = static_cast<int>(rng.next_below(4));
    NumVec v(n);
    for (double& x : v) x = round_half_away((rng.next_uniform() - 0.3) * 1000, digits);
    const int ncol = 1 + static_cast<int>(rng.next_below(12));
    const DataTable t = parse_pasted(htmlgen::text_projection(htmlgen::render_vector_table(v, ncol)));
    REQUIRE(t.columns.size() == 1);
    CHECK(std::get<NumVec>(t.columns[0].values) == v);
  }
}
