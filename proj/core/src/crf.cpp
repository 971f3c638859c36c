#include "rpcrf/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rpcrf/error.hpp"

namespace rpcrf {

namespace {

std::size_t idx(int v) { return static_cast<std::size_t>(v); }

/// Running log-sum-exp with a rescaled accumulator.
class LogSumExp {
 public:
  void add(double v) {
    if (!any_) {
      max_ = v;
      sum_ = 1.0;
      any_ = true;
    } else if (v <= max_) {
      sum_ += std::exp(v - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - v) + 1.0;
      max_ = v;
    }
  }
  bool any() const { return any_; }
  double value() const { return max_ + std::log(sum_); }

 private:
  double max_ = 0.0;
  double sum_ = 0.0;
  bool any_ = false;
};

struct Forward {
  std::vector<double> alpha;   // length x arcs
  std::vector<char> reached;   // length x arcs
  double log_z = 0.0;
};

Forward run_forward(const Lattice& lat) {
  const auto& m = lat.machine();
  const int n = lat.length();
  const int arcs = lat.arc_count();
  Forward f;
  f.alpha.assign(idx(n) * idx(arcs), 0.0);
  f.reached.assign(idx(n) * idx(arcs), 0);
  for (int e = 0; e < arcs; ++e)
    if (lat.live(1, e)) {
      f.alpha[idx(e)] = lat.value(1, e);
      f.reached[idx(e)] = 1;
    }
  for (int i = 2; i <= n; ++i) {
    const std::size_t prev = idx(i - 2) * idx(arcs);
    const std::size_t cur = idx(i - 1) * idx(arcs);
    for (int e = 0; e < arcs; ++e) {
      const Arc& arc = m.arc(e);
      LogSumExp acc;
      for (int p : m.arcs_into(arc.source)) {
        if (!f.reached[prev + idx(p)]) continue;
        acc.add(f.alpha[prev + idx(p)] + lat.transition(m.arc(p).symbol, arc.symbol));
      }
      if (!acc.any()) continue;
      f.alpha[cur + idx(e)] = acc.value() + lat.value(i, e);
      f.reached[cur + idx(e)] = 1;
    }
  }
  LogSumExp z;
  const std::size_t last = idx(n - 1) * idx(arcs);
  for (int e = 0; e < arcs; ++e)
    if (f.reached[last + idx(e)]) z.add(f.alpha[last + idx(e)]);
  f.log_z = z.value();
  return f;
}

std::vector<double> run_backward(const Lattice& lat) {
  const auto& m = lat.machine();
  const int n = lat.length();
  const int arcs = lat.arc_count();
  const int k = m.symbol_count();
  std::vector<double> beta(idx(n) * idx(arcs), 0.0);
  for (int i = n - 1; i >= 1; --i) {
    const std::size_t cur = idx(i - 1) * idx(arcs);
    const std::size_t nxt = idx(i) * idx(arcs);
    for (int e = 0; e < arcs; ++e) {
      const Arc& arc = m.arc(e);
      LogSumExp acc;
      for (Symbol b = 0; b < k; ++b) {
        const int succ = m.arc_id(arc.target, b);
        acc.add(lat.transition(arc.symbol, b) + lat.value(i + 1, succ) +
                beta[nxt + idx(succ)]);
      }
      beta[cur + idx(e)] = acc.value();
    }
  }
  return beta;
}

void require_length(const InputSeq& x) {
  if (x.empty()) throw DataError("input sequence must be nonempty");
}

}  // namespace

Lattice::Lattice(const PatternMachine& machine, int length, std::vector<double> arc_values,
                 std::vector<double> transition)
    : machine_(&machine),
      length_(length),
      values_(std::move(arc_values)),
      transition_(std::move(transition)) {
  if (length_ < 1) throw DataError("lattice length must be at least 1");
  if (values_.size() != idx(length_) * idx(machine.arc_count()))
    throw DataError("lattice: arc table has the wrong size");
  if (transition_.size() != idx(machine.symbol_count()) * idx(machine.symbol_count()))
    throw DataError("lattice: transition table has the wrong size");
}

Lattice build_lattice(const PatternMachine& machine, int length,
                      std::span<const double> emission, std::span<const double> pattern,
                      std::span<const double> transition) {
  const int k = machine.symbol_count();
  const int m = machine.pattern_count();
  const int arcs = machine.arc_count();
  if (emission.size() != idx(length) * idx(k) || pattern.size() != idx(length) * idx(m))
    throw DataError("lattice: potential tables do not match the machine");
  std::vector<double> values(idx(length) * idx(arcs));
  for (int i = 1; i <= length; ++i) {
    const double* em = emission.data() + idx(i - 1) * idx(k);
    const double* pat = pattern.data() + idx(i - 1) * idx(m);
    for (int e = 0; e < arcs; ++e) {
      const Arc& arc = machine.arc(e);
      double v = em[arc.symbol];
      for (int l : machine.labels(arc.target))
        if (i == length || !machine.end_anchored(l)) v += pat[l];
      values[idx(i - 1) * idx(arcs) + idx(e)] = v;
    }
  }
  return Lattice(machine, length, std::move(values),
                 std::vector<double>(transition.begin(), transition.end()));
}

Lattice build_lattice(const PatternMachine& machine, const ModelParams& params,
                      const FeatureConfig& config, const InputSeq& x) {
  require_length(x);
  const int n = static_cast<int>(x.size());
  const int k = machine.symbol_count();
  const int m = machine.pattern_count();
  if (static_cast<int>(params.labels.size()) != k || params.pattern_count != m)
    throw DataError("model parameters do not match the pattern machine");
  std::vector<double> emission(idx(n) * idx(k));
  std::vector<double> pattern(idx(n) * idx(m));
  for (int i = 1; i <= n; ++i) {
    for (Symbol a = 0; a < k; ++a)
      emission[idx(i - 1) * idx(k) + idx(a)] = log_emission(params, config, x, a, i);
    for (int l = 0; l < m; ++l)
      pattern[idx(i - 1) * idx(m) + idx(l)] = log_pattern(params, config, x, l, i);
  }
  return build_lattice(machine, n, emission, pattern, params.transition);
}

double path_score(const Lattice& lat, const std::vector<int>& path) {
  const auto& m = lat.machine();
  if (static_cast<int>(path.size()) != lat.length())
    throw DataError("path length does not match lattice length");
  double score = 0.0;
  for (int i = 1; i <= lat.length(); ++i) {
    const int e = path[idx(i - 1)];
    if (e < 0 || e >= lat.arc_count()) throw DataError("arc id out of range");
    if (!lat.live(i, e)) throw DataError("path does not start at the initial state");
    score += lat.value(i, e);
    if (i > 1) {
      const Arc& prev = m.arc(path[idx(i - 2)]);
      if (prev.target != m.arc(e).source) throw DataError("path arcs are not chained");
      score += lat.transition(prev.symbol, m.arc(e).symbol);
    }
  }
  return score;
}

double score_sequence(const PatternSet& patterns, const ModelParams& params,
                      const FeatureConfig& config, const InputSeq& x, const LabelSeq& y) {
  if (x.size() != y.size())
    throw DataError("input and label sequences differ in length");
  double score = 0.0;
  const int n = static_cast<int>(y.size());
  for (int i = 1; i <= n; ++i) {
    score += log_emission(params, config, x, y[idx(i - 1)], i);
    if (i < n) score += log_transition(params, y[idx(i - 1)], y[idx(i)]);
  }
  for (const auto& p : patterns.patterns)
    for (int i : match_end_positions(p.dfa, p.anchored_end, y))
      score += log_pattern(params, config, x, p.id, i);
  return score;
}

double log_partition(const Lattice& lattice) { return run_forward(lattice).log_z; }

LabelSeq viterbi(const Lattice& lat) {
  const auto& m = lat.machine();
  const int n = lat.length();
  const int arcs = lat.arc_count();
  auto tied = [](double a, double b) {
    return std::abs(a - b) <= kViterbiTieTolerance * (1.0 + std::max(std::abs(a), std::abs(b)));
  };

  std::vector<double> delta(idx(n) * idx(arcs), 0.0);
  std::vector<int> back(idx(n) * idx(arcs), -1);
  std::vector<char> reached(idx(n) * idx(arcs), 0);
  for (int e = 0; e < arcs; ++e)
    if (lat.live(1, e)) {
      delta[idx(e)] = lat.value(1, e);
      reached[idx(e)] = 1;
    }
  for (int i = 2; i <= n; ++i) {
    const std::size_t prev = idx(i - 2) * idx(arcs);
    const std::size_t cur = idx(i - 1) * idx(arcs);
    for (int e = 0; e < arcs; ++e) {
      const Arc& arc = m.arc(e);
      int best = -1;
      double best_value = 0.0;
      for (int p : m.arcs_into(arc.source)) {  // ascending arc ids
        if (!reached[prev + idx(p)]) continue;
        const double v = delta[prev + idx(p)] + lat.transition(m.arc(p).symbol, arc.symbol);
        if (best < 0 || (v > best_value && !tied(v, best_value))) {
          best = p;
          best_value = v;
        }
      }
      if (best < 0) continue;
      delta[cur + idx(e)] = best_value + lat.value(i, e);
      back[cur + idx(e)] = best;
      reached[cur + idx(e)] = 1;
    }
  }

  const std::size_t last = idx(n - 1) * idx(arcs);
  int best = -1;
  for (int e = 0; e < arcs; ++e) {
    if (!reached[last + idx(e)]) continue;
    const double v = delta[last + idx(e)];
    if (best < 0 || (v > delta[last + idx(best)] && !tied(v, delta[last + idx(best)])))
      best = e;
  }
  LabelSeq y(idx(n));
  for (int i = n; i >= 1; --i) {
    y[idx(i - 1)] = m.arc(best).symbol;
    best = back[idx(i - 1) * idx(arcs) + idx(best)];
  }
  return y;
}

Marginals posterior_marginals(const Lattice& lat) {
  const auto& m = lat.machine();
  const int n = lat.length();
  const int arcs = lat.arc_count();
  const int k = m.symbol_count();
  const int np = m.pattern_count();
  const Forward f = run_forward(lat);
  const std::vector<double> beta = run_backward(lat);

  Marginals out;
  out.length = n;
  out.symbol_count = k;
  out.pattern_count = np;
  out.arc_count = arcs;
  out.log_z = f.log_z;
  out.arc.assign(idx(n) * idx(arcs), 0.0);
  out.label.assign(idx(n) * idx(k), 0.0);
  out.pattern.assign(idx(n) * idx(np), 0.0);
  out.transition.assign(idx(k) * idx(k), 0.0);

  for (int i = 1; i <= n; ++i) {
    const std::size_t cur = idx(i - 1) * idx(arcs);
    for (int e = 0; e < arcs; ++e) {
      if (!f.reached[cur + idx(e)]) continue;
      const double mu = std::exp(f.alpha[cur + idx(e)] + beta[cur + idx(e)] - f.log_z);
      const Arc& arc = m.arc(e);
      out.arc[cur + idx(e)] = mu;
      out.label[idx(i - 1) * idx(k) + idx(arc.symbol)] += mu;
      for (int l : m.labels(arc.target))
        if (i == n || !m.end_anchored(l)) out.pattern[idx(i - 1) * idx(np) + idx(l)] += mu;
    }
    if (i == 1) continue;
    const std::size_t prev = idx(i - 2) * idx(arcs);
    for (int e = 0; e < arcs; ++e) {
      const Arc& arc = m.arc(e);
      const double tail = lat.value(i, e) + beta[cur + idx(e)] - f.log_z;
      for (int p : m.arcs_into(arc.source)) {
        if (!f.reached[prev + idx(p)]) continue;
        const Symbol b = m.arc(p).symbol;
        out.transition[idx(b) * idx(k) + idx(arc.symbol)] +=
            std::exp(f.alpha[prev + idx(p)] + lat.transition(b, arc.symbol) + tail);
      }
    }
  }
  return out;
}

FeatureVector expected_feature_counts(const Lattice& lattice, const ModelParams& params,
                                      const FeatureConfig& config, const InputSeq& x) {
  if (static_cast<int>(x.size()) != lattice.length())
    throw DataError("input length does not match lattice length");
  const Marginals mg = posterior_marginals(lattice);
  FeatureVector out;
  for (int i = 1; i <= mg.length; ++i) {
    for (Symbol a = 0; a < mg.symbol_count; ++a)
      for (const auto& key : emission_features(params.labels, config, x, a, i))
        out[key] += mg.label_at(i, a);
    for (int l = 0; l < mg.pattern_count; ++l)
      for (const auto& key : pattern_features(config, x, l, i))
        out[key] += mg.pattern_at(i, l);
  }
  for (Symbol a = 0; a < mg.symbol_count; ++a)
    for (Symbol b = 0; b < mg.symbol_count; ++b)
      out[transition_features(params.labels, a, b).front()] +=
          mg.transition[idx(a) * idx(mg.symbol_count) + idx(b)];
  return out;
}

FeatureVector observed_feature_counts(const PatternMachine& machine,
                                      const ModelParams& params,
                                      const FeatureConfig& config, const InputSeq& x,
                                      const LabelSeq& y) {
  if (x.size() != y.size()) throw DataError("input and label sequences differ in length");
  FeatureVector out;
  const auto fired = fired_patterns(machine, y);
  const int n = static_cast<int>(y.size());
  for (int i = 1; i <= n; ++i) {
    for (const auto& key : emission_features(params.labels, config, x, y[idx(i - 1)], i))
      out[key] += 1.0;
    if (i < n)
      out[transition_features(params.labels, y[idx(i - 1)], y[idx(i)]).front()] += 1.0;
    for (int l : fired[idx(i - 1)])
      for (const auto& key : pattern_features(config, x, l, i)) out[key] += 1.0;
  }
  return out;
}

Objective nll_and_gradient(const PatternMachine& machine, const ModelParams& params,
                           const FeatureConfig& config, std::span<const Example> batch,
                           double l2) {
  if (batch.empty()) throw DataError("empty batch");
  Objective out;
  for (const auto& ex : batch) {
    if (ex.x.size() != ex.y.size())
      throw DataError("input and label sequences differ in length");
    const Lattice lat = build_lattice(machine, params, config, ex.x);
    const double log_z = log_partition(lat);
    out.nll += log_z - path_score(lat, path_of(machine, ex.y));
    for (const auto& [key, v] : expected_feature_counts(lat, params, config, ex.x))
      out.gradient[key] += v;
    for (const auto& [key, v] : observed_feature_counts(machine, params, config, ex.x, ex.y))
      out.gradient[key] -= v;
  }
  out.objective = out.nll;
  if (l2 != 0.0) {
    for (const auto& [key, w] : params.to_vector()) {
      out.objective += 0.5 * l2 * w * w;
      out.gradient[key] += l2 * w;
    }
  }
  return out;
}

}  // namespace rpcrf
