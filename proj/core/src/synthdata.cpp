#include "rpcrf/synthdata.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <map>
#include <numeric>

#include "rpcrf/error.hpp"
#include "rpcrf/rng.hpp"

namespace rpcrf {

std::string_view task_name(Task task) {
  switch (task) {
    case Task::Cardinality: return "cardinality";
    case Task::Agreement: return "agreement";
    case Task::Battleship: return "battleship";
  }
  return "";
}

std::optional<Task> parse_task(std::string_view name) {
  for (Task t : {Task::Cardinality, Task::Agreement, Task::Battleship})
    if (task_name(t) == name) return t;
  return std::nullopt;
}

std::string_view task_labels(Task task) {
  switch (task) {
    case Task::Cardinality: return "_A";
    case Task::Agreement: return "_ABCDEF";
    case Task::Battleship: return "_A";
  }
  return "";
}

std::uint64_t default_seed(Task task) {
  switch (task) {
    case Task::Cardinality: return 1;
    case Task::Agreement: return 2;
    case Task::Battleship: return 3;
  }
  return 0;
}

namespace {

constexpr int kCardinalityLength = 10;
constexpr int kAgreementLength = 10;
constexpr int kGrid = 5;
constexpr int kShip = 4;
constexpr std::array<std::array<char, 2>, 3> kPairs{{{'A', 'B'}, {'C', 'D'}, {'E', 'F'}}};

/// Ship cells (row-major indices) of the 20 placements: horizontal ones first,
/// by row then starting column, then vertical ones by starting row then column.
std::vector<std::array<int, kShip>> placements() {
  std::vector<std::array<int, kShip>> out;
  for (int r = 0; r < kGrid; ++r)
    for (int c = 0; c + kShip <= kGrid; ++c) {
      std::array<int, kShip> cells{};
      for (int j = 0; j < kShip; ++j) cells[static_cast<std::size_t>(j)] = r * kGrid + c + j;
      out.push_back(cells);
    }
  for (int r = 0; r + kShip <= kGrid; ++r)
    for (int c = 0; c < kGrid; ++c) {
      std::array<int, kShip> cells{};
      for (int j = 0; j < kShip; ++j) cells[static_cast<std::size_t>(j)] = (r + j) * kGrid + c;
      out.push_back(cells);
    }
  return out;
}

/// First `count` entries of a Fisher-Yates shuffle of 0..n-1.
std::vector<int> choose(SplitMix64& rng, int n, int count) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int j = 0; j < count; ++j) {
    const auto pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - j)));
    std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

template <typename Draw>
SyntheticData generate_with(const TaskSpec& spec, Draw draw) {
  if (spec.train_size < 1 || spec.test_size < 1)
    throw DataError("dataset sizes must be at least 1");
  SyntheticData out;
  out.train.reserve(spec.train_size);
  out.test.reserve(spec.test_size);
  for (std::size_t i = 0; i < spec.train_size; ++i) out.train.push_back(draw(spec.seed, 0, i));
  for (std::size_t i = 0; i < spec.test_size; ++i) out.test.push_back(draw(spec.seed, 1, i));
  return out;
}

std::int64_t binomial(int n, int k) {
  std::int64_t r = 1;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

}  // namespace

Sample draw_cardinality(std::uint64_t seed, int split, std::uint64_t index) {
  auto rng = SplitMix64::for_item(seed, static_cast<std::uint64_t>(split), index);
  const int k = 1 + static_cast<int>(rng.below(9));
  Sample s;
  s.x = std::string(1, static_cast<char>('0' + k)) + std::string(kCardinalityLength - 1, '0');
  s.y = std::string(kCardinalityLength, '_');
  for (int p : choose(rng, kCardinalityLength - 1, k)) s.y[static_cast<std::size_t>(p + 1)] = 'A';
  return s;
}

Sample draw_agreement(std::uint64_t seed, int split, std::uint64_t index) {
  auto rng = SplitMix64::for_item(seed, static_cast<std::uint64_t>(split), index);
  auto pos = choose(rng, kAgreementLength, 2);
  std::sort(pos.begin(), pos.end());
  const auto& pair = kPairs[rng.below(kPairs.size())];
  const auto flip = rng.below(2);
  Sample s;
  s.x = std::string(kAgreementLength, '0');
  s.y = std::string(kAgreementLength, '_');
  for (int j = 0; j < 2; ++j) {
    const auto p = static_cast<std::size_t>(pos[static_cast<std::size_t>(j)]);
    s.x[p] = '1';
    s.y[p] = pair[static_cast<std::size_t>(j) ^ flip];
  }
  return s;
}

Sample draw_battleship(std::uint64_t seed, int split, std::uint64_t index) {
  static const auto kPlacements = placements();
  auto rng = SplitMix64::for_item(seed, static_cast<std::uint64_t>(split), index);
  const auto& cells = kPlacements[rng.below(kPlacements.size())];
  const auto hit = cells[rng.below(kShip)];
  Sample s;
  s.x = std::string(kGrid * kGrid, '0');
  s.y = std::string(kGrid * kGrid, '_');
  for (int c : cells) s.y[static_cast<std::size_t>(c)] = 'A';
  s.x[static_cast<std::size_t>(hit)] = '1';
  return s;
}

SyntheticData gen_cardinality(const TaskSpec& spec) {
  if (spec.task != Task::Cardinality) throw DataError("task mismatch: expected cardinality");
  return generate_with(spec, draw_cardinality);
}

SyntheticData gen_agreement(const TaskSpec& spec) {
  if (spec.task != Task::Agreement) throw DataError("task mismatch: expected agreement");
  return generate_with(spec, draw_agreement);
}

SyntheticData gen_battleship(const TaskSpec& spec) {
  if (spec.task != Task::Battleship) throw DataError("task mismatch: expected battleship");
  return generate_with(spec, draw_battleship);
}

SyntheticData generate(const TaskSpec& spec) {
  switch (spec.task) {
    case Task::Cardinality: return gen_cardinality(spec);
    case Task::Agreement: return gen_agreement(spec);
    case Task::Battleship: return gen_battleship(spec);
  }
  throw DataError("unknown task");
}

Rational Rational::of(std::int64_t num, std::int64_t den) {
  if (den <= 0 || num < 0) throw DataError("rational must be nonnegative with positive denominator");
  const auto g = std::gcd(num, den);
  return {num / g, den / g};
}

Rational operator+(Rational a, Rational b) {
  const auto l = std::lcm(a.den, b.den);
  return Rational::of(a.num * (l / a.den) + b.num * (l / b.den), l);
}

Rational operator*(Rational a, Rational b) {
  const auto g1 = std::gcd(a.num, b.den);
  const auto g2 = std::gcd(b.num, a.den);
  return Rational::of((a.num / g1) * (b.num / g2), (a.den / g2) * (b.den / g1));
}

bool operator<(Rational a, Rational b) {
  return a.num * b.den < b.num * a.den;
}

std::vector<Outcome> enumerate_outcomes(Task task) {
  std::vector<Outcome> out;
  switch (task) {
    case Task::Cardinality: {
      for (int k = 1; k <= 9; ++k) {
        const auto p = Rational::of(1, 9 * binomial(9, k));
        for (unsigned mask = 0; mask < (1u << 9); ++mask) {
          if (std::popcount(mask) != k) continue;
          Sample s;
          s.x = std::string(1, static_cast<char>('0' + k)) + std::string(9, '0');
          s.y = std::string(10, '_');
          for (int j = 0; j < 9; ++j)
            if (mask >> j & 1u) s.y[static_cast<std::size_t>(j + 1)] = 'A';
          out.push_back({std::move(s), p});
        }
      }
      break;
    }
    case Task::Agreement: {
      const auto p = Rational::of(1, binomial(kAgreementLength, 2) * 6);
      for (int a = 0; a < kAgreementLength; ++a)
        for (int b = a + 1; b < kAgreementLength; ++b)
          for (const auto& pair : kPairs)
            for (int flip = 0; flip < 2; ++flip) {
              Sample s;
              s.x = std::string(kAgreementLength, '0');
              s.y = std::string(kAgreementLength, '_');
              s.x[static_cast<std::size_t>(a)] = s.x[static_cast<std::size_t>(b)] = '1';
              s.y[static_cast<std::size_t>(a)] = pair[static_cast<std::size_t>(flip)];
              s.y[static_cast<std::size_t>(b)] = pair[static_cast<std::size_t>(1 - flip)];
              out.push_back({std::move(s), p});
            }
      break;
    }
    case Task::Battleship: {
      const auto all = placements();
      const auto p = Rational::of(1, static_cast<std::int64_t>(all.size()) * kShip);
      for (const auto& cells : all)
        for (int hit : cells) {
          Sample s;
          s.x = std::string(kGrid * kGrid, '0');
          s.y = std::string(kGrid * kGrid, '_');
          for (int c : cells) s.y[static_cast<std::size_t>(c)] = 'A';
          s.x[static_cast<std::size_t>(hit)] = '1';
          out.push_back({std::move(s), p});
        }
      break;
    }
  }
  return out;
}

Rational optimal_accuracy(Task task) {
  // P(x, y) summed over identical outcomes, then the best y per x.
  std::map<std::string, std::map<std::string, Rational>> joint;
  for (const auto& o : enumerate_outcomes(task)) {
    auto& cell = joint[o.sample.x][o.sample.y];
    cell = cell + o.probability;
  }
  Rational total;
  for (const auto& [x, ys] : joint) {
    Rational best;
    for (const auto& [y, p] : ys)
      if (best < p) best = p;
    total = total + best;
  }
  return total;
}

double exact_match_accuracy(const std::vector<std::string>& predictions,
                            const std::vector<std::string>& golds) {
  if (predictions.size() != golds.size())
    throw DataError("prediction and gold counts differ");
  if (golds.empty()) throw DataError("no sequences to score");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (predictions[i].size() != golds[i].size())
      throw DataError("prediction " + std::to_string(i) + " has the wrong length");
    if (predictions[i] == golds[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(golds.size());
}

}  // namespace rpcrf
