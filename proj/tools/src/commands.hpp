#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rpcrf/io.hpp"
#include "rpcrf/synthdata.hpp"
#include "rpcrf/trainer.hpp"

namespace rpcrf::cli {

namespace fs = std::filesystem;

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kCapacity = 3,
  kDivergence = 4,
};

/// Maps a library exception to its exit code.
int exit_code_for(const std::exception& e);

struct GenerateOptions {
  Task task = Task::Cardinality;
  std::size_t train_size = 10'000;
  std::size_t test_size = 2'000;
  std::optional<std::uint64_t> seed;  // task default when unset
  fs::path out_dir = "data";
};

struct GenerateOutcome {
  fs::path train_path;
  fs::path test_path;
};

/// Writes train.jsonl, test.jsonl and config.json into out_dir.
GenerateOutcome run_generate(const GenerateOptions& options);

struct TrainOptions {
  fs::path patterns;
  fs::path data;
  fs::path out_dir = "run";
  FeatureConfig features;
  TrainConfig train;
  std::size_t max_states = kDefaultMaxStates;
  /// Print the objective every this many epochs to the log stream; 0 is silent.
  int progress_every = 0;
};

struct TrainOutcome {
  Model model;
  TrainResult result;
  std::string dataset_hash;
  double seconds = 0.0;
};

/// Writes model.json, metrics.json, timing.json and config.json into out_dir.
TrainOutcome run_train(const TrainOptions& options, std::ostream* log = nullptr);

struct EvalOptions {
  fs::path model;
  fs::path data;
  /// When empty nothing is written.
  fs::path out_dir;
  /// Taken from the dataset header when unset.
  std::optional<Task> task;
};

struct EvalOutcome {
  std::size_t count = 0;
  double exact_match = 0.0;
  std::optional<Task> task;
  std::optional<double> optimal;
  std::optional<double> ratio;  // exact_match / optimal
  std::vector<std::string> predictions;
};

/// Decodes every sample with Viterbi; writes metrics.json, predictions.jsonl
/// and config.json into out_dir when it is set.
EvalOutcome run_eval(const EvalOptions& options);

/// Decodes one input string with a loaded model.
std::string decode(const Model& model, const std::string& x);

struct ExportOptions {
  fs::path patterns;
  fs::path out;
  std::size_t max_states = kDefaultMaxStates;
};

/// Writes the product machine as Graphviz DOT; returns its state count.
int run_export_automaton(const ExportOptions& options);

struct InspectOptions {
  /// Exactly one of these is set.
  fs::path patterns;
  fs::path model;
  bool json = false;
  std::size_t max_states = kDefaultMaxStates;
};

/// Machine statistics as text or JSON.
std::string run_inspect(const InspectOptions& options);

}  // namespace rpcrf::cli
