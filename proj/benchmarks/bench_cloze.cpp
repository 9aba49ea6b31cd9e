#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "quizforge/cloze.hpp"

using namespace quizforge;

namespace {

void BM_EncodeNm(benchmark::State& state) {
  const std::vector<double> targets{54.7}, tolerances{0.1, 0.5};
  const std::vector<int> weights{100, 80};
  for (auto _ : state) benchmark::DoNotOptimize(cloze::encode_nm(targets, weights, tolerances, 2));
}
BENCHMARK(BM_EncodeNm);

void BM_ParseCloze(benchmark::State& state) {
  std::string text;
  for (int i = 0; i < state.range(0); ++i) {
    text += "<p>Part " + std::to_string(i) + " {1:NM:%100%54.7:0.1~%80%54.7:0.5} and {1:MC:~%0%lower~%100%higher}</p>";
  }
  for (auto _ : state) benchmark::DoNotOptimize(cloze::parse_cloze(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseCloze)->Arg(1)->Arg(16)->Arg(256);

void BM_GradeNm(benchmark::State& state) {
  const cloze::SubQuestion sub = cloze::parse_subquestion("{2:NM:%100%54.7:0.1~%80%54.7:0.5}");
  for (auto _ : state) benchmark::DoNotOptimize(cloze::grade(sub, "54.80000001"));
}
BENCHMARK(BM_GradeNm);

void BM_GradeSa(benchmark::State& state) {
  const cloze::SubQuestion sub = cloze::parse_subquestion("{1:SA:*correlation*coefficient*~%50%*pearson*}");
  for (auto _ : state) benchmark::DoNotOptimize(cloze::grade(sub, "the Correlation    Coefficient r"));
}
BENCHMARK(BM_GradeSa);

}  // namespace
