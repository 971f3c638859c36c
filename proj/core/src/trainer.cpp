#include "rpcrf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "rpcrf/error.hpp"
#include "rpcrf/rng.hpp"

namespace rpcrf {

namespace {
std::size_t idx(int v) { return static_cast<std::size_t>(v); }
}  // namespace

TrainingProblem::TrainingProblem(const PatternMachine& machine, const Alphabet& labels,
                                 const FeatureConfig& config,
                                 std::span<const Example> data)
    : machine_(&machine), labels_(labels), config_(config) {
  if (data.empty()) throw DataError("training set is empty");
  if (static_cast<int>(labels_.size()) != machine.symbol_count())
    throw DataError("label alphabet does not match the pattern machine");
  config_.validate();
  const int k = machine.symbol_count();
  const int m = machine.pattern_count();

  std::map<InputSeq, int> input_ids;
  std::vector<const InputSeq*> distinct;
  for (const auto& ex : data) {
    if (ex.x.empty()) throw DataError("training example with empty input");
    if (ex.x.size() != ex.y.size())
      throw DataError("input and label sequences differ in length");
    auto [it, inserted] = input_ids.try_emplace(ex.x, static_cast<int>(distinct.size()));
    if (inserted) distinct.push_back(&it->first);
  }
  if (config_.position_buckets.empty() && config_.max_position == 0) {
    for (const auto* x : distinct)
      config_.max_position = std::max(config_.max_position, static_cast<int>(x->size()));
  }

  std::set<FeatureKey> sparse;
  for (const auto* x : distinct) {
    const int n = static_cast<int>(x->size());
    for (int i = 1; i <= n; ++i) {
      for (Symbol a = 0; a < k; ++a)
        for (const auto& key : emission_features(labels_, config_, *x, a, i)) sparse.insert(key);
      for (int l = 0; l < m; ++l)
        for (const auto& key : pattern_features(config_, *x, l, i)) sparse.insert(key);
    }
  }
  std::map<FeatureKey, int> ids;
  for (Symbol a = 0; a < k; ++a)
    for (Symbol b = 0; b < k; ++b) {
      const auto key = transition_features(labels_, a, b).front();
      ids.emplace(key, static_cast<int>(keys_.size()));
      keys_.push_back(key);
    }
  for (const auto& key : sparse) {
    ids.emplace(key, static_cast<int>(keys_.size()));
    keys_.push_back(key);
  }
  auto lookup = [&](const std::vector<FeatureKey>& keys) {
    std::vector<int> out;
    out.reserve(keys.size());
    for (const auto& key : keys) out.push_back(ids.at(key));
    return out;
  };

  inputs_.reserve(distinct.size());
  for (const auto* x : distinct) {
    CompiledInput in;
    in.length = static_cast<int>(x->size());
    for (int i = 1; i <= in.length; ++i) {
      for (Symbol a = 0; a < k; ++a)
        in.emission.push_back(lookup(emission_features(labels_, config_, *x, a, i)));
      for (int l = 0; l < m; ++l)
        in.pattern.push_back(lookup(pattern_features(config_, *x, l, i)));
    }
    inputs_.push_back(std::move(in));
  }

  examples_.reserve(data.size());
  for (const auto& ex : data) {
    CompiledExample ce;
    ce.input = input_ids.at(ex.x);
    const auto fired = fired_patterns(machine, ex.y);
    const int n = static_cast<int>(ex.y.size());
    const auto& in = inputs_[idx(ce.input)];
    for (int i = 1; i <= n; ++i) {
      const Symbol a = ex.y[idx(i - 1)];
      const auto& em = in.emission[idx(i - 1) * idx(k) + idx(a)];
      ce.features.insert(ce.features.end(), em.begin(), em.end());
      if (i < n) ce.features.push_back(a * k + ex.y[idx(i)]);
      for (int l : fired[idx(i - 1)]) {
        const auto& pf = in.pattern[idx(i - 1) * idx(m) + idx(l)];
        ce.features.insert(ce.features.end(), pf.begin(), pf.end());
      }
    }
    examples_.push_back(std::move(ce));
  }
}

TrainingProblem::Value TrainingProblem::evaluate(std::span<const double> theta, double l2,
                                                 std::vector<double>& gradient,
                                                 std::span<const std::size_t> subset) const {
  const auto& machine = *machine_;
  const int k = machine.symbol_count();
  const int m = machine.pattern_count();
  gradient.assign(keys_.size(), 0.0);
  Value value;

  std::vector<double> counts(inputs_.size(), 0.0);
  auto observe = [&](const CompiledExample& ex) {
    counts[idx(ex.input)] += 1.0;
    for (int f : ex.features) {
      gradient[idx(f)] -= 1.0;
      value.nll -= theta[idx(f)];
    }
  };
  if (subset.empty()) {
    for (const auto& ex : examples_) observe(ex);
  } else {
    for (std::size_t e : subset) observe(examples_.at(e));
  }

  const std::span<const double> transition = theta.subspan(0, idx(k) * idx(k));
  std::vector<double> emission;
  std::vector<double> pattern;
  for (std::size_t in_id = 0; in_id < inputs_.size(); ++in_id) {
    const double c = counts[in_id];
    if (c == 0.0) continue;
    const auto& in = inputs_[in_id];
    const int n = in.length;
    emission.assign(idx(n) * idx(k), 0.0);
    pattern.assign(idx(n) * idx(m), 0.0);
    for (std::size_t s = 0; s < emission.size(); ++s)
      for (int f : in.emission[s]) emission[s] += theta[idx(f)];
    for (std::size_t s = 0; s < pattern.size(); ++s)
      for (int f : in.pattern[s]) pattern[s] += theta[idx(f)];
    const Lattice lat = build_lattice(machine, n, emission, pattern, transition);
    const Marginals mg = posterior_marginals(lat);
    value.nll += c * mg.log_z;
    for (std::size_t s = 0; s < emission.size(); ++s)
      for (int f : in.emission[s]) gradient[idx(f)] += c * mg.label[s];
    for (std::size_t s = 0; s < pattern.size(); ++s)
      for (int f : in.pattern[s]) gradient[idx(f)] += c * mg.pattern[s];
    for (std::size_t t = 0; t < mg.transition.size(); ++t)
      gradient[t] += c * mg.transition[t];
  }

  value.objective = value.nll;
  if (l2 != 0.0) {
    for (std::size_t j = 0; j < keys_.size(); ++j) {
      value.objective += 0.5 * l2 * theta[j] * theta[j];
      gradient[j] += l2 * theta[j];
    }
  }
  return value;
}

ModelParams TrainingProblem::to_params(std::span<const double> theta) const {
  ModelParams params(labels_, machine_->pattern_count());
  for (std::size_t j = 0; j < keys_.size(); ++j) params.set(keys_[j], theta[j]);
  return params;
}

std::vector<double> TrainingProblem::from_params(const ModelParams& params) const {
  std::vector<double> theta(keys_.size());
  for (std::size_t j = 0; j < keys_.size(); ++j) theta[j] = params.weight(keys_[j]);
  return theta;
}

TrainResult train(const PatternMachine& machine, const Alphabet& labels,
                  FeatureConfig config, std::span<const Example> data,
                  const TrainConfig& tc,
                  const std::function<void(int, double)>& on_epoch) {
  const TrainingProblem problem(machine, labels, config, data);
  const std::size_t dim = problem.dimension();

  std::vector<double> theta(dim, 0.0);
  if (tc.init_scale > 0.0) {
    SplitMix64 rng = SplitMix64::for_item(tc.seed, 0x1717, 0);
    for (auto& w : theta) w = tc.init_scale * (2.0 * rng.uniform() - 1.0);
  }
  std::vector<double> m1(dim, 0.0), m2(dim, 0.0), grad;
  double b1t = 1.0, b2t = 1.0;
  auto step = [&] {
    b1t *= tc.beta1;
    b2t *= tc.beta2;
    for (std::size_t j = 0; j < dim; ++j) {
      m1[j] = tc.beta1 * m1[j] + (1.0 - tc.beta1) * grad[j];
      m2[j] = tc.beta2 * m2[j] + (1.0 - tc.beta2) * grad[j] * grad[j];
      const double mhat = m1[j] / (1.0 - b1t);
      const double vhat = m2[j] / (1.0 - b2t);
      theta[j] -= tc.learning_rate * mhat / (std::sqrt(vhat) + tc.epsilon);
    }
  };

  TrainResult result;
  std::vector<std::size_t> order(problem.example_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool minibatch = tc.batch_size > 0 && tc.batch_size < order.size();

  for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    const auto value = problem.evaluate(theta, tc.l2, grad);
    if (!std::isfinite(value.objective))
      throw DivergenceError("objective became non-finite at epoch " + std::to_string(epoch));
    if (!result.trace.empty()) {
      const double prev = result.trace.back();
      if (std::abs(prev - value.objective) / std::max(1.0, std::abs(prev)) < tc.tolerance) {
        result.trace.push_back(value.objective);
        result.nll_trace.push_back(value.nll);
        result.converged = true;
        break;
      }
    }
    result.trace.push_back(value.objective);
    result.nll_trace.push_back(value.nll);
    if (on_epoch) on_epoch(epoch, value.objective);
    result.epochs = epoch;

    if (!minibatch) {
      step();
      continue;
    }
    SplitMix64 rng = SplitMix64::for_item(tc.seed, 0x5EED, static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t stop = std::min(order.size(), start + tc.batch_size);
      const auto batch = std::span<const std::size_t>(order).subspan(start, stop - start);
      const auto v = problem.evaluate(theta, tc.l2, grad, batch);
      if (!std::isfinite(v.objective))
        throw DivergenceError("objective became non-finite at epoch " + std::to_string(epoch));
      step();
    }
  }

  const auto final_value = problem.evaluate(theta, tc.l2, grad);
  if (!std::isfinite(final_value.objective))
    throw DivergenceError("objective became non-finite after training");
  result.final_objective = final_value.objective;
  result.final_nll = final_value.nll;
  result.params = problem.to_params(theta);
  result.features = config;
  if (result.features.position_buckets.empty() && result.features.max_position == 0) {
    for (const auto& ex : data)
      result.features.max_position =
          std::max(result.features.max_position, static_cast<int>(ex.x.size()));
  }
  return result;
}

}  // namespace rpcrf
