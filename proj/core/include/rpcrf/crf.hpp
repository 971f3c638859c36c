#pragma once

#include <span>
#include <vector>

#include "rpcrf/pattern_machine.hpp"
#include "rpcrf/potentials.hpp"

namespace rpcrf {

struct Example {
  InputSeq x;
  LabelSeq y;
};

/// Per-position arc log-potentials of the auxiliary arc CRF over a pattern
/// machine. Positions are 1-based. At i = 1 only arcs leaving the initial
/// state are live; at i > 1 an arc may follow another only when the first
/// one's target is the second one's source. Neither rule is encoded as -inf.
///
/// Holds a non-owning pointer to the machine, which must outlive the lattice.
class Lattice {
 public:
  Lattice(const PatternMachine& machine, int length, std::vector<double> arc_values,
          std::vector<double> transition);

  const PatternMachine& machine() const noexcept { return *machine_; }
  int length() const noexcept { return length_; }
  int arc_count() const noexcept { return machine_->arc_count(); }

  double value(int i, int arc) const {
    return values_[static_cast<std::size_t>((i - 1) * arc_count() + arc)];
  }
  double transition(Symbol from, Symbol to) const {
    return transition_[static_cast<std::size_t>(from * machine_->symbol_count() + to)];
  }
  /// Structural mask of the first position.
  bool live(int i, int arc) const {
    return i > 1 || machine_->arc(arc).source == machine_->initial();
  }

 private:
  const PatternMachine* machine_;
  int length_;
  std::vector<double> values_;
  std::vector<double> transition_;
};

/// Arc value at position i for q -a-> r: log_emission(x, a, i) plus
/// log_pattern(x, L, i) for every L labelling r that may fire at i.
Lattice build_lattice(const PatternMachine& machine, const ModelParams& params,
                      const FeatureConfig& config, const InputSeq& x);

/// Same construction from precomputed tables: `emission` is length x |labels|,
/// `pattern` is length x |patterns|, `transition` is |labels| x |labels|.
Lattice build_lattice(const PatternMachine& machine, int length,
                      std::span<const double> emission, std::span<const double> pattern,
                      std::span<const double> transition);

/// Score of an arc path through the lattice; throws DataError when the path
/// does not start at the initial state or is not chained.
double path_score(const Lattice& lattice, const std::vector<int>& path);

/// Unnormalized log score computed straight from the pattern automata: every
/// emission and transition along y plus log_pattern wherever a pattern match
/// ends. Does not consult the product machine.
double score_sequence(const PatternSet& patterns, const ModelParams& params,
                      const FeatureConfig& config, const InputSeq& x, const LabelSeq& y);

double log_partition(const Lattice& lattice);

/// Highest-scoring label sequence. Each backpointer (and the final arc) goes to
/// the lowest arc id among candidates whose scores agree within
/// kViterbiTieTolerance * (1 + |best|).
LabelSeq viterbi(const Lattice& lattice);
inline constexpr double kViterbiTieTolerance = 1e-10;

/// Posterior quantities from one forward-backward pass.
struct Marginals {
  int length = 0;
  int symbol_count = 0;
  int pattern_count = 0;
  int arc_count = 0;
  double log_z = 0.0;
  std::vector<double> arc;         // length x arcs
  std::vector<double> label;       // length x symbols
  std::vector<double> pattern;     // length x patterns: P(pattern fires at i)
  std::vector<double> transition;  // symbols x symbols, summed over positions

  double arc_at(int i, int a) const {
    return arc[static_cast<std::size_t>((i - 1) * arc_count + a)];
  }
  double label_at(int i, Symbol s) const {
    return label[static_cast<std::size_t>((i - 1) * symbol_count + s)];
  }
  double pattern_at(int i, int p) const {
    return pattern[static_cast<std::size_t>((i - 1) * pattern_count + p)];
  }
};

Marginals posterior_marginals(const Lattice& lattice);

FeatureVector expected_feature_counts(const Lattice& lattice, const ModelParams& params,
                                      const FeatureConfig& config, const InputSeq& x);
FeatureVector observed_feature_counts(const PatternMachine& machine,
                                      const ModelParams& params,
                                      const FeatureConfig& config, const InputSeq& x,
                                      const LabelSeq& y);

struct Objective {
  double nll = 0.0;        // sum over the batch of log Z - score
  double objective = 0.0;  // nll + l2 / 2 * |theta|^2
  FeatureVector gradient;  // of `objective`
};

/// Throws DataError on an empty batch or when |x| != |y| in any example.
Objective nll_and_gradient(const PatternMachine& machine, const ModelParams& params,
                           const FeatureConfig& config, std::span<const Example> batch,
                           double l2 = 0.0);

}  // namespace rpcrf
