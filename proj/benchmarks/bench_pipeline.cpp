#include <benchmark/benchmark.h>

#include <string>

#include "quizforge/corpus.hpp"
#include "quizforge/expr.hpp"
#include "quizforge/htmlgen.hpp"
#include "quizforge/pastedata.hpp"
#include "quizforge/template.hpp"
#include "quizforge/xmlout.hpp"

using namespace quizforge;

namespace {

void BM_Instantiate(benchmark::State& state) {
  const quiz::QuizTemplate t = corpus::load_example(static_cast<int>(state.range(0)));
  std::size_t index = 0;
  for (auto _ : state) benchmark::DoNotOptimize(quiz::instantiate(t, 42, index++));
}
BENCHMARK(BM_Instantiate)->DenseRange(1, 15);

void BM_GenerateBank(benchmark::State& state) {
  const quiz::QuizTemplate t = corpus::load_example(1);
  for (auto _ : state) benchmark::DoNotOptimize(xml::generate(t, static_cast<std::size_t>(state.range(0)), 42));
}
BENCHMARK(BM_GenerateBank)->Arg(20)->Arg(200);

void BM_EvalSample(benchmark::State& state) {
  const expr::ExprPtr e = expr::parse_expr("round(rnorm(100, 100, 10), 1)");
  RngStream rng = derive_stream(42, 0);
  for (auto _ : state) benchmark::DoNotOptimize(expr::eval(*e, {}, rng));
}
BENCHMARK(BM_EvalSample);

void BM_Integrate(benchmark::State& state) {
  const expr::ExprPtr e = expr::parse_expr("integrate(x * exp(x), 0.5, 1.5)");
  RngStream rng = derive_stream(42, 0);
  for (auto _ : state) benchmark::DoNotOptimize(expr::eval(*e, {}, rng));
}
BENCHMARK(BM_Integrate);

void BM_Histogram(benchmark::State& state) {
  NumVec x;
  RngStream rng = derive_stream(1, 1);
  for (int i = 0; i < 200; ++i) x.push_back(rng.normal() * 10 + 50);
  for (auto _ : state) benchmark::DoNotOptimize(htmlgen::render_chart(htmlgen::ChartKind::histogram, x, {}, {.binwidth = 5}));
}
BENCHMARK(BM_Histogram);

void BM_PasteRoundTrip(benchmark::State& state) {
  NumVec x;
  for (int i = 0; i < state.range(0); ++i) x.push_back(i * 0.5 - 20);
  const std::string text = htmlgen::text_projection(htmlgen::render_vector_table(x));
  for (auto _ : state) benchmark::DoNotOptimize(paste::parse_pasted(text));
}
BENCHMARK(BM_PasteRoundTrip)->Arg(100)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
