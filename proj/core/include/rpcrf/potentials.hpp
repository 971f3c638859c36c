#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rpcrf/alphabet.hpp"

namespace rpcrf {

/// Log-linear feature templates standing in for the emission and pattern
/// potentials.
struct FeatureConfig {
  /// Emission features look at x[i-r .. i+r]; at most 4.
  int window_radius = 1;
  /// 1-based input positions whose token is exposed to every pattern potential.
  std::vector<int> anchor_positions{1};
  /// Ascending upper bounds for bucketing the firing position. Empty means one
  /// bucket per exact position, clamped at `max_position`.
  std::vector<int> position_buckets;
  /// Longest training sequence; later positions reuse the final bucket.
  /// Zero leaves exact buckets unclamped.
  int max_position = 0;
  /// Token used for window slots and anchors that fall outside x.
  char pad = '#';
  /// 1-based input positions whose token is exposed to every emission, keyed
  /// by its offset from the labelled position.
  std::vector<int> emission_anchor_positions;

  /// Throws DataError on a radius outside [0, 4], a non-positive anchor, or
  /// unsorted buckets.
  void validate() const;
  int bucket(int position) const;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

enum class FeatureKind { Transition, Emission, Bias, Anchor, PosBucket, EmissionAnchor };

/// One sparse feature. Field meaning per kind:
///   Transition: (from label, to label)
///   Emission:   (window offset, token, label)
///   Bias:       (pattern id)
///   Anchor:     (pattern id, position, token)
///   PosBucket:  (pattern id, bucket)
///   EmissionAnchor: (anchor position - labelled position, token, label)
/// Labels and tokens are stored as their character codes.
struct FeatureKey {
  FeatureKind kind = FeatureKind::Bias;
  int f1 = 0;
  int f2 = 0;
  int f3 = 0;

  static FeatureKey transition(char from, char to);
  static FeatureKey emission(int offset, char token, char label);
  static FeatureKey bias(int pattern);
  static FeatureKey anchor(int pattern, int position, char token);
  static FeatureKey posbucket(int pattern, int bucket);
  static FeatureKey emission_anchor(int offset, char token, char label);

  /// Emission and EmissionAnchor keys.
  bool is_emission() const noexcept {
    return kind == FeatureKind::Emission || kind == FeatureKind::EmissionAnchor;
  }

  /// `kind|field1|field2|field3`, e.g. `emit|-1|3|A`, `bias|2||` or `eanchor|-7|1|A`.
  std::string to_string() const;
  /// Inverse of to_string; throws DataError on malformed keys.
  static FeatureKey parse(std::string_view text);

  friend auto operator<=>(const FeatureKey&, const FeatureKey&) = default;
};

/// Sparse feature -> value map with deterministic iteration order.
using FeatureVector = std::map<FeatureKey, double>;

/// All model weights, in log space. Absent features weigh zero.
struct ModelParams {
  Alphabet labels;
  int pattern_count = 0;
  std::vector<double> transition;  // |labels| x |labels|, row = from label
  std::map<FeatureKey, double> emission;  // Emission and EmissionAnchor keys
  std::map<FeatureKey, double> pattern;

  ModelParams() = default;
  ModelParams(Alphabet labels, int pattern_count);

  double weight(const FeatureKey& key) const;
  /// Sets a weight, growing the sparse maps as needed.
  void set(const FeatureKey& key, double value);
  /// Adds `scale * delta` to every listed feature.
  void add(const FeatureVector& delta, double scale = 1.0);
  /// Every weight including transitions, keyed.
  FeatureVector to_vector() const;
  bool all_finite() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

using InputSeq = std::string;

/// Features summed by log_emission for label `label` (id) at 1-based position i.
std::vector<FeatureKey> emission_features(const Alphabet& labels,
                                          const FeatureConfig& config,
                                          const InputSeq& x, Symbol label, int i);
std::vector<FeatureKey> transition_features(const Alphabet& labels, Symbol from,
                                            Symbol to);
/// Features summed by log_pattern for pattern `pattern` firing at position i.
std::vector<FeatureKey> pattern_features(const FeatureConfig& config,
                                         const InputSeq& x, int pattern, int i);

double log_emission(const ModelParams& params, const FeatureConfig& config,
                    const InputSeq& x, Symbol label, int i);
double log_transition(const ModelParams& params, Symbol from, Symbol to);
double log_pattern(const ModelParams& params, const FeatureConfig& config,
                   const InputSeq& x, int pattern, int i);

}  // namespace rpcrf
