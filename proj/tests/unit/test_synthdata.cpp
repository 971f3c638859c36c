#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "rpcrf/error.hpp"
#include "rpcrf/synthdata.hpp"

using namespace rpcrf;

namespace {

constexpr std::size_t kSamples = 10'000;

std::string grid(const std::vector<std::string>& rows) {
  std::string out;
  for (const auto& r : rows) out += r;
  return out;
}

bool is_outcome(Task task, const Sample& s) {
  for (const auto& o : enumerate_outcomes(task))
    if (o.sample == s) return o.probability.num > 0;
  return false;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

}  // namespace

TEST_CASE("task names and defaults") {
  CHECK(parse_task("agreement") == Task::Agreement);
  CHECK_FALSE(parse_task("chess").has_value());
  CHECK(task_name(Task::Battleship) == "battleship");
  CHECK(default_seed(Task::Cardinality) == 1);
  CHECK(default_seed(Task::Agreement) == 2);
  CHECK(default_seed(Task::Battleship) == 3);
  CHECK(task_labels(Task::Agreement) == "_ABCDEF");
}

TEST_CASE("cardinality postconditions") {
  for (std::uint64_t j = 0; j < kSamples; ++j) {
    const auto s = draw_cardinality(1, 0, j);
    REQUIRE(s.x.size() == 10);
    REQUIRE(s.y.size() == 10);
    const int k = s.x[0] - '0';
    CHECK((k >= 1 && k <= 9));
    CHECK(s.x.substr(1) == std::string(9, '0'));
    CHECK(s.y[0] == '_');
    CHECK(std::count(s.y.begin(), s.y.end(), 'A') == k);
    CHECK(std::count(s.y.begin(), s.y.end(), '_') == 10 - k);
  }
}

TEST_CASE("cardinality k is uniform (chi-square, 8 dof, p > 0.01)") {
  std::vector<double> counts(10, 0.0);
  const std::size_t total = 90'000;
  for (std::uint64_t j = 0; j < total; ++j) counts[static_cast<std::size_t>(draw_cardinality(1, 0, j).x[0] - '0')] += 1;
  const double expected = total / 9.0;
  double chi2 = 0.0;
  for (int k = 1; k <= 9; ++k) chi2 += (counts[static_cast<std::size_t>(k)] - expected) *
                                      (counts[static_cast<std::size_t>(k)] - expected) / expected;
  CHECK(chi2 < 20.090);  // 99th percentile of chi-square with 8 dof
}

TEST_CASE("agreement postconditions and labeling frequencies") {
  const std::set<std::pair<char, char>> valid{{'A', 'B'}, {'B', 'A'}, {'C', 'D'},
                                              {'D', 'C'}, {'E', 'F'}, {'F', 'E'}};
  std::map<std::pair<char, char>, double> freq;
  const std::size_t total = 60'000;
  for (std::uint64_t j = 0; j < total; ++j) {
    const auto s = draw_agreement(2, 0, j);
    REQUIRE(s.x.size() == 10);
    REQUIRE(s.y.size() == 10);
    std::vector<std::size_t> ones;
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK((s.x[i] == '0' || s.x[i] == '1'));
      if (s.x[i] == '1') ones.push_back(i);
      else CHECK(s.y[i] == '_');
    }
    REQUIRE(ones.size() == 2);
    const std::pair<char, char> pair{s.y[ones[0]], s.y[ones[1]]};
    CHECK(valid.count(pair) == 1);
    freq[pair] += 1;
  }
  CHECK(freq.size() == 6);
  for (const auto& [pair, c] : freq) CHECK(std::abs(c / total - 1.0 / 6.0) <= 0.01);
}

TEST_CASE("battleship postconditions") {
  std::set<std::string> placements;
  for (std::uint64_t j = 0; j < kSamples; ++j) {
    const auto s = draw_battleship(3, 0, j);
    REQUIRE(s.x.size() == 25);
    REQUIRE(s.y.size() == 25);
    std::vector<int> cells;
    for (int c = 0; c < 25; ++c)
      if (s.y[static_cast<std::size_t>(c)] == 'A') cells.push_back(c);
      else CHECK(s.y[static_cast<std::size_t>(c)] == '_');
    REQUIRE(cells.size() == 4);
    const bool horizontal = cells[3] - cells[0] == 3 && cells[0] / 5 == cells[3] / 5;
    const bool vertical = cells[1] - cells[0] == 5 && cells[2] - cells[1] == 5 && cells[3] - cells[2] == 5;
    CHECK((horizontal || vertical));
    CHECK(std::count(s.x.begin(), s.x.end(), '1') == 1);
    CHECK(std::count(s.x.begin(), s.x.end(), '0') == 24);
    CHECK(s.y[s.x.find('1')] == 'A');
    placements.insert(s.y);
  }
  CHECK(placements.size() == 20);
}

TEST_CASE("paper examples are possible outcomes") {
  CHECK(is_outcome(Task::Cardinality, {"3000000000", "__A_AA____"}));
  CHECK(is_outcome(Task::Cardinality, {"9000000000", "_AAAAAAAAA"}));
  CHECK(is_outcome(Task::Cardinality, {"1000000000", "_____A____"}));
  CHECK_FALSE(is_outcome(Task::Cardinality, {"3000000000", "A_A_A_____"}));
  CHECK(is_outcome(Task::Agreement, {"0010000100", "__A____B__"}));
  CHECK(is_outcome(Task::Agreement, {"0011000000", "__DC______"}));
  CHECK(is_outcome(Task::Agreement, {"0001000001", "___F_____E"}));
  CHECK_FALSE(is_outcome(Task::Agreement, {"0010000100", "__A____C__"}));
  const std::string zeros = "00000";
  CHECK(is_outcome(Task::Battleship, {grid({zeros, zeros, "00010", zeros, zeros}),
                                      grid({"___A_", "___A_", "___A_", "___A_", "_____"})}));
  CHECK(is_outcome(Task::Battleship, {grid({zeros, zeros, "10000", zeros, zeros}),
                                      grid({"_____", "_____", "AAAA_", "_____", "_____"})}));
  CHECK(is_outcome(Task::Battleship, {grid({zeros, zeros, "10000", zeros, zeros}),
                                      grid({"_____", "A____", "A____", "A____", "A____"})}));
}

TEST_CASE("outcome probabilities sum to one") {
  for (Task task : {Task::Cardinality, Task::Agreement, Task::Battleship}) {
    Rational total;
    for (const auto& o : enumerate_outcomes(task)) total = total + o.probability;
    CHECK(total == Rational::of(1, 1));
  }
  CHECK(enumerate_outcomes(Task::Cardinality).size() == 511);
  CHECK(enumerate_outcomes(Task::Agreement).size() == 270);
  CHECK(enumerate_outcomes(Task::Battleship).size() == 80);
}

TEST_CASE("optimal accuracies") {
  double closed = 0.0;
  for (int k = 1; k <= 9; ++k) closed += 1.0 / binomial(9, k);
  closed /= 9.0;
  CHECK(optimal_accuracy(Task::Cardinality).value() == doctest::Approx(closed).epsilon(1e-14));
  CHECK(optimal_accuracy(Task::Agreement) == Rational::of(1, 6));

  // Every joint (placement, hit) has mass 1/80, so the optimum is (#cells any
  // placement covers) / 80.
  std::set<int> covered;
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c + 4 <= 5; ++c)
      for (int d = 0; d < 4; ++d) {
        covered.insert(r * 5 + c + d);
        covered.insert((c + d) * 5 + r);
      }
  CHECK(optimal_accuracy(Task::Battleship) == Rational::of(static_cast<std::int64_t>(covered.size()), 80));
  CHECK(optimal_accuracy(Task::Battleship) == Rational::of(5, 16));

  CHECK(std::round(optimal_accuracy(Task::Cardinality).value() * 10000) == 1464);
  CHECK(std::round(optimal_accuracy(Task::Agreement).value() * 10000) == 1667);
  CHECK(std::round(optimal_accuracy(Task::Battleship).value() * 10000) == 3125);
}

TEST_CASE("generation is deterministic and split-aware") {
  TaskSpec spec{Task::Agreement, 50, 20, 2};
  const auto a = generate(spec);
  const auto b = generate(spec);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train.size() == 50);
  CHECK(a.test.size() == 20);
  CHECK(a.train[7] == draw_agreement(2, 0, 7));
  CHECK(a.test[7] == draw_agreement(2, 1, 7));
  spec.seed = 3;
  CHECK(generate(spec).train != a.train);
}

TEST_CASE("exact-match accuracy") {
  CHECK(exact_match_accuracy({"AB", "BA"}, {"AB", "BA"}) == 1.0);
  CHECK(exact_match_accuracy({"AB", "BB"}, {"AB", "BA"}) == 0.5);
  CHECK(exact_match_accuracy({"AA", "BB"}, {"AB", "BA"}) == 0.0);
  CHECK_THROWS_AS(exact_match_accuracy({"AB"}, {"AB", "BA"}), DataError);
  CHECK_THROWS_AS(exact_match_accuracy({"ABC"}, {"AB"}), DataError);
}
