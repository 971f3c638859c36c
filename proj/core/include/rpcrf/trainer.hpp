#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rpcrf/crf.hpp"

namespace rpcrf {

struct TrainConfig {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 500;
  /// Stop once |f_prev - f| / max(1, |f_prev|) drops below this.
  double tolerance = 1e-6;
  double l2 = 1e-4;
  /// 0 trains full-batch; otherwise examples are shuffled each epoch.
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  /// Weights start uniform in [-init_scale, init_scale]; 0 starts at zero.
  double init_scale = 0.0;
};

struct TrainResult {
  ModelParams params;
  /// The feature configuration with max_position fixed from the data.
  FeatureConfig features;
  /// Objective (NLL + L2 term) at the start of every epoch.
  std::vector<double> trace;
  /// Unregularized NLL at the same points.
  std::vector<double> nll_trace;
  double final_objective = 0.0;
  double final_nll = 0.0;
  int epochs = 0;
  bool converged = false;
};

/// Regularized negative log-likelihood over a fixed dataset, on a dense
/// weight vector. Examples sharing an input share one forward-backward pass.
class TrainingProblem {
 public:
  TrainingProblem(const PatternMachine& machine, const Alphabet& labels,
                  const FeatureConfig& config, std::span<const Example> data);

  std::size_t dimension() const noexcept { return keys_.size(); }
  const std::vector<FeatureKey>& keys() const noexcept { return keys_; }
  std::size_t example_count() const noexcept { return examples_.size(); }

  struct Value {
    double nll = 0.0;
    double objective = 0.0;
  };

  /// Objective over the examples listed in `subset` (all when empty);
  /// `gradient` is overwritten.
  Value evaluate(std::span<const double> theta, double l2, std::vector<double>& gradient,
                 std::span<const std::size_t> subset = {}) const;

  ModelParams to_params(std::span<const double> theta) const;
  std::vector<double> from_params(const ModelParams& params) const;

 private:
  struct CompiledInput {
    int length = 0;
    std::vector<std::vector<int>> emission;  // (i, label) -> feature ids
    std::vector<std::vector<int>> pattern;   // (i, pattern) -> feature ids
  };
  struct CompiledExample {
    int input = 0;
    std::vector<int> features;  // observed feature ids, with multiplicity
  };

  const PatternMachine* machine_;
  Alphabet labels_;
  FeatureConfig config_;
  std::vector<FeatureKey> keys_;
  std::vector<CompiledInput> inputs_;
  std::vector<CompiledExample> examples_;
};

/// Adam on the regularized NLL. Throws DivergenceError when the objective
/// stops being finite.
TrainResult train(const PatternMachine& machine, const Alphabet& labels,
                  FeatureConfig config, std::span<const Example> data,
                  const TrainConfig& train_config,
                  const std::function<void(int epoch, double objective)>& on_epoch = {});

}  // namespace rpcrf
