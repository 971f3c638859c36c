#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "rpcrf/crf.hpp"
#include "rpcrf/pattern_machine.hpp"
#include "rpcrf/rng.hpp"

using namespace rpcrf;

namespace {

std::vector<std::string> agreement_patterns() {
  std::vector<std::string> out;
  for (char a : std::string("ABCDEF"))
    for (char b : std::string("ABCDEF"))
      if (a < b)
        out.push_back(std::string("^_*(") + a + "_*" + b + "|" + b + "_*" + a + ")_*$");
  return out;
}

std::vector<std::string> cardinality_patterns() {
  std::vector<std::string> out;
  for (int k = 1; k <= 9; ++k) out.push_back("^(_*A){" + std::to_string(k) + "}_*$");
  return out;
}

void BM_MachineCardinality(benchmark::State& state) {
  const Alphabet sigma("A_");
  const auto set = build_pattern_set(sigma, cardinality_patterns());
  for (auto _ : state) benchmark::DoNotOptimize(build_pattern_machine(set));
}
BENCHMARK(BM_MachineCardinality);

void BM_MachineAgreement(benchmark::State& state) {
  const Alphabet sigma("ABCDEF_");
  const auto set = build_pattern_set(sigma, agreement_patterns());
  for (auto _ : state) benchmark::DoNotOptimize(build_pattern_machine(set));
}
BENCHMARK(BM_MachineAgreement);

struct Tables {
  PatternMachine machine;
  int length;
  std::vector<double> emission, pattern, transition;
};

Tables random_tables(int length) {
  const Alphabet sigma("ABCDEF_");
  Tables t{build_pattern_machine(build_pattern_set(sigma, agreement_patterns())), length, {}, {}, {}};
  SplitMix64 rng(7);
  const auto k = static_cast<std::size_t>(t.machine.symbol_count());
  const auto m = static_cast<std::size_t>(t.machine.pattern_count());
  const auto n = static_cast<std::size_t>(length);
  for (std::size_t i = 0; i < n * k; ++i) t.emission.push_back(rng.uniform() - 0.5);
  for (std::size_t i = 0; i < n * m; ++i) t.pattern.push_back(rng.uniform() - 0.5);
  for (std::size_t i = 0; i < k * k; ++i) t.transition.push_back(rng.uniform() - 0.5);
  return t;
}

void BM_Viterbi(benchmark::State& state) {
  const auto t = random_tables(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const auto lat = build_lattice(t.machine, t.length, t.emission, t.pattern, t.transition);
    benchmark::DoNotOptimize(viterbi(lat));
  }
}
BENCHMARK(BM_Viterbi)->Arg(10)->Arg(25)->Arg(100);

void BM_Marginals(benchmark::State& state) {
  const auto t = random_tables(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const auto lat = build_lattice(t.machine, t.length, t.emission, t.pattern, t.transition);
    benchmark::DoNotOptimize(posterior_marginals(lat));
  }
}
BENCHMARK(BM_Marginals)->Arg(10)->Arg(25)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
