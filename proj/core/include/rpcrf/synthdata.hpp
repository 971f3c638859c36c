#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rpcrf {

enum class Task { Cardinality, Agreement, Battleship };

std::string_view task_name(Task task);
std::optional<Task> parse_task(std::string_view name);
/// Label alphabet used by the task's label strings.
std::string_view task_labels(Task task);
/// Default generation seed per task (1, 2, 3).
std::uint64_t default_seed(Task task);

struct TaskSpec {
  Task task = Task::Cardinality;
  std::size_t train_size = 10'000;
  std::size_t test_size = 2'000;
  std::uint64_t seed = 1;
};

/// One raw (x, y) pair as strings.
struct Sample {
  std::string x;
  std::string y;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct SyntheticData {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

/// Sample `index` of split `split` (0 = train, 1 = test) is drawn from its own
/// SplitMix64 stream, so generation is a pure function of (spec, split, index).
Sample draw_cardinality(std::uint64_t seed, int split, std::uint64_t index);
Sample draw_agreement(std::uint64_t seed, int split, std::uint64_t index);
Sample draw_battleship(std::uint64_t seed, int split, std::uint64_t index);

SyntheticData gen_cardinality(const TaskSpec& spec);
SyntheticData gen_agreement(const TaskSpec& spec);
SyntheticData gen_battleship(const TaskSpec& spec);
SyntheticData generate(const TaskSpec& spec);

/// Nonnegative exact fraction.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend Rational operator+(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(Rational a, Rational b);
};

/// Every outcome of the generative process with its exact probability.
struct Outcome {
  Sample sample;
  Rational probability;
};
std::vector<Outcome> enumerate_outcomes(Task task);

/// Bayes-optimal exact-match accuracy: sum over x of max_y P(x, y), by
/// exhaustive enumeration of the generative process.
Rational optimal_accuracy(Task task);

/// Fraction of sequences predicted exactly. Throws DataError on count or
/// length mismatch.
double exact_match_accuracy(const std::vector<std::string>& predictions,
                            const std::vector<std::string>& golds);

}  // namespace rpcrf
