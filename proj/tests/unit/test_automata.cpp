#include <doctest.h>

#include "rpcrf/automata.hpp"
#include "rpcrf/error.hpp"
#include "support/oracles.hpp"

using namespace rpcrf;

namespace {

Dfa core_of(const std::string& text, const Alphabet& a) {
  return minimize(determinize(compile_to_nfa(parse_pattern(text, a), a), a));
}

/// Pairwise distinguishability by exhaustive search over strings shorter than
/// the state count.
bool all_pairs_distinguishable(const Dfa& d) {
  for (int p = 0; p < d.state_count; ++p)
    for (int q = p + 1; q < d.state_count; ++q) {
      bool split = d.is_accepting(p) != d.is_accepting(q);
      for (int n = 1; n < d.state_count && !split; ++n)
        oracle::for_each_sequence(d.symbol_count, n, [&](const LabelSeq& w) {
          int a = p, b = q;
          for (Symbol s : w) {
            a = d.next(a, s);
            b = d.next(b, s);
          }
          split = split || d.is_accepting(a) != d.is_accepting(b);
        });
      if (!split) return false;
    }
  return true;
}

Dfa random_dfa(SplitMix64& rng, int states, int symbols) {
  Dfa d;
  d.state_count = states;
  d.symbol_count = symbols;
  d.initial = static_cast<int>(rng.below(static_cast<std::uint64_t>(states)));
  for (int i = 0; i < states * symbols; ++i)
    d.table.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(states))));
  for (int i = 0; i < states; ++i) d.accepting.push_back(rng.below(3) == 0 ? 1 : 0);
  return d;
}

}  // namespace

TEST_CASE("determinizing {A} over {A,_} gives start, accept and sink") {
  const Alphabet a("A_");
  const auto dfa = determinize(compile_to_nfa(parse_pattern("A", a), a), a);
  CHECK(dfa.complete());
  CHECK(dfa.state_count == 3);
  CHECK(minimize(dfa).state_count == 3);
  CHECK(dfa.accepts({0}));
  CHECK_FALSE(dfa.accepts({0, 0}));
}

TEST_CASE("suffix DFA for AX*A agrees with the all-suffix oracle") {
  const Alphabet a("ABX");
  const auto ast = parse_pattern("AX*A", a);
  const auto dfa = suffix_closure(core_of("AX*A", a), false, a);
  SplitMix64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto w = oracle::random_sequence(rng, 3, static_cast<int>(rng.below(10)));
    bool any_suffix = false;
    for (std::size_t j = 0; j <= w.size(); ++j)
      any_suffix |= oracle::matches(ast.root, LabelSeq(w.begin() + static_cast<long>(j), w.end()));
    CHECK(dfa.accepts(w) == any_suffix);
  }
}

TEST_CASE("A____A minimizes to a 7-state chain plus sink") {
  const Alphabet a("A_");
  const auto d = core_of("A____A", a);
  CHECK(d.state_count == 8);
  CHECK(d.complete());
  CHECK(all_pairs_distinguishable(d));
}

TEST_CASE("minimize is idempotent on a minimal automaton") {
  const Alphabet a("A_");
  const auto d = core_of("A", a);
  CHECK(minimize(d) == d);
}

TEST_CASE("bisimilar accepting states merge") {
  // 0 -A-> 1, 0 -_-> 2, both 1 and 2 accepting sinks: 1 and 2 are equivalent.
  Dfa d;
  d.state_count = 3;
  d.symbol_count = 2;
  d.initial = 0;
  d.table = {1, 2, 1, 1, 2, 2};
  d.accepting = {0, 1, 1};
  const auto m = minimize(d);
  CHECK(m.state_count == d.state_count - 1);
  CHECK(all_pairs_distinguishable(m));
}

TEST_CASE("random DFAs: minimization is idempotent, minimal and language-preserving") {
  SplitMix64 rng(99);
  for (int t = 0; t < 200; ++t) {
    const int states = 1 + static_cast<int>(rng.below(12));
    const int symbols = 1 + static_cast<int>(rng.below(3));
    const auto d = random_dfa(rng, states, symbols);
    const auto m = minimize(d);
    CHECK(m.complete());
    CHECK(minimize(m).state_count == m.state_count);
    CHECK(m.state_count <= d.state_count);
    CHECK(all_pairs_distinguishable(m));
    for (int s = 0; s < 200; ++s) {
      const auto w = oracle::random_sequence(rng, symbols, static_cast<int>(rng.below(10)));
      CHECK(m.accepts(w) == d.accepts(w));
    }
  }
}

TEST_CASE("determinization preserves the NFA language") {
  SplitMix64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const std::string sigma = t % 2 ? "AB" : "ABC";
    const Alphabet a(sigma);
    const auto nfa = compile_to_nfa(parse_pattern(oracle::random_pattern(rng, sigma, 3), a), a);
    const auto dfa = determinize(nfa, a);
    REQUIRE(dfa.complete());
    for (int s = 0; s < 200; ++s) {
      const auto w = oracle::random_sequence(rng, static_cast<int>(sigma.size()),
                                             static_cast<int>(rng.below(8)));
      CHECK(dfa.accepts(w) == nfa.accepts(w));
    }
  }
}

TEST_CASE("suffix closure of {A} is the two-state ends-in-A automaton") {
  const Alphabet a("A_");
  const auto d = suffix_closure(core_of("A", a), false, a);
  CHECK(d.state_count == 2);
  CHECK(d.accepts({1, 1, 0}));
  CHECK_FALSE(d.accepts({0, 1}));
}

TEST_CASE("suffix closure of AX*A has three states") {
  const Alphabet a("ABX");
  const auto d = suffix_closure(core_of("AX*A", a), false, a);
  CHECK(d.state_count == 3);
  CHECK(d.complete());
}

TEST_CASE("anchored cores bypass suffix closure") {
  const Alphabet a("A_");
  const auto core = core_of("(_*A){2}_*", a);
  CHECK(suffix_closure(core, true, a) == core);
}

TEST_CASE("match end positions on the worked example") {
  const Alphabet a("ABX");
  const auto y = a.encode("BAXAA");
  CHECK(match_end_positions(suffix_closure(core_of("AX*A", a), false, a), false, y) ==
        std::vector<int>{4, 5});
  CHECK(match_end_positions(suffix_closure(core_of("BX*B", a), false, a), false, y).empty());
}

TEST_CASE("cardinality pattern fires only at the end") {
  const Alphabet a("A_");
  const auto ast = parse_pattern("^(_*A){3}_*$", a);
  const auto core = core_of("(_*A){3}_*", a);
  const auto d = suffix_closure(core, ast.anchored_start, a);
  CHECK(match_end_positions(d, true, a.encode("__A_AA____")) == std::vector<int>{10});
  CHECK(match_end_positions(d, true, a.encode("__A_A_____")).empty());
  CHECK_THROWS_AS(match_end_positions(d, true, LabelSeq{0, 7}), AlphabetError);
}

TEST_CASE("suffix-closed matching equals the all-substrings oracle") {
  SplitMix64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::string sigma = "ABC";
    const Alphabet a(sigma);
    const auto text = oracle::random_pattern(rng, sigma, 3);
    const auto ast = parse_pattern(text, a);
    const auto d = suffix_closure(core_of(text, a), false, a);
    for (int s = 0; s < 20; ++s) {
      const auto y = oracle::random_sequence(rng, 3, 1 + static_cast<int>(rng.below(8)));
      INFO(text << " on " << a.decode(y));
      CHECK(match_end_positions(d, false, y) == oracle::match_positions(ast, y));
    }
  }
}

TEST_CASE("DOT export lists states and double circles") {
  const Alphabet a("A_");
  const auto dot = to_dot(core_of("A", a), a);
  CHECK(dot.find("doublecircle") != std::string::npos);
  CHECK(dot.find("digraph") == 0);
}

TEST_CASE("empty matches never fire") {
  const Alphabet a("AB");
  const auto ast = parse_pattern("A?", a);
  const auto d = suffix_closure(core_of("A?", a), false, a);
  CHECK(match_end_positions(d, false, a.encode("BAB")) == std::vector<int>{2});
  CHECK(match_end_positions(d, false, a.encode("BAB")) ==
        oracle::match_positions(ast, a.encode("BAB")));
}
