#include "rpcrf/potentials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "rpcrf/error.hpp"

namespace rpcrf {

void FeatureConfig::validate() const {
  if (window_radius < 0 || window_radius > 4)
    throw DataError("window radius must lie in [0, 4]");
  for (int p : anchor_positions)
    if (p < 1) throw DataError("anchor positions are 1-based");
  for (int p : emission_anchor_positions)
    if (p < 1) throw DataError("emission anchor positions are 1-based");
  if (!std::is_sorted(position_buckets.begin(), position_buckets.end()) ||
      std::adjacent_find(position_buckets.begin(), position_buckets.end()) !=
          position_buckets.end())
    throw DataError("position buckets must be strictly ascending");
  if (max_position < 0) throw DataError("max position must be nonnegative");
}

int FeatureConfig::bucket(int position) const {
  if (position_buckets.empty())
    return max_position > 0 ? std::min(position, max_position) : position;
  for (std::size_t j = 0; j < position_buckets.size(); ++j)
    if (position <= position_buckets[j]) return static_cast<int>(j) + 1;
  return static_cast<int>(position_buckets.size());
}

FeatureKey FeatureKey::transition(char from, char to) {
  return {FeatureKind::Transition, static_cast<unsigned char>(from),
          static_cast<unsigned char>(to), 0};
}
FeatureKey FeatureKey::emission(int offset, char token, char label) {
  return {FeatureKind::Emission, offset, static_cast<unsigned char>(token),
          static_cast<unsigned char>(label)};
}
FeatureKey FeatureKey::bias(int pattern) { return {FeatureKind::Bias, pattern, 0, 0}; }
FeatureKey FeatureKey::anchor(int pattern, int position, char token) {
  return {FeatureKind::Anchor, pattern, position, static_cast<unsigned char>(token)};
}
FeatureKey FeatureKey::posbucket(int pattern, int bucket) {
  return {FeatureKind::PosBucket, pattern, bucket, 0};
}

FeatureKey FeatureKey::emission_anchor(int offset, char token, char label) {
  return {FeatureKind::EmissionAnchor, offset, static_cast<unsigned char>(token),
          static_cast<unsigned char>(label)};
}

namespace {

std::string ch(int code) { return std::string(1, static_cast<char>(code)); }

int parse_int(std::string_view s, std::string_view whole) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty())
    throw DataError("malformed feature key \"" + std::string(whole) + "\"");
  return v;
}

int parse_char(std::string_view s, std::string_view whole) {
  if (s.size() != 1) throw DataError("malformed feature key \"" + std::string(whole) + "\"");
  return static_cast<unsigned char>(s.front());
}

}  // namespace

std::string FeatureKey::to_string() const {
  const std::string n1 = std::to_string(f1);
  const std::string n2 = std::to_string(f2);
  switch (kind) {
    case FeatureKind::Transition: return "trans|" + ch(f1) + "|" + ch(f2) + "|";
    case FeatureKind::Emission: return "emit|" + n1 + "|" + ch(f2) + "|" + ch(f3);
    case FeatureKind::Bias: return "bias|" + n1 + "||";
    case FeatureKind::Anchor: return "anchor|" + n1 + "|" + n2 + "|" + ch(f3);
    case FeatureKind::PosBucket: return "posbucket|" + n1 + "|" + n2 + "|";
    case FeatureKind::EmissionAnchor: return "eanchor|" + n1 + "|" + ch(f2) + "|" + ch(f3);
  }
  return {};
}

FeatureKey FeatureKey::parse(std::string_view text) {
  // Exactly four fields; '|' is not a valid token or label character.
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const auto bar = text.find('|', start);
    if (bar == std::string_view::npos)
      throw DataError("malformed feature key \"" + std::string(text) + "\"");
    parts.push_back(text.substr(start, bar - start));
    start = bar + 1;
  }
  parts.push_back(text.substr(start));
  const auto kind = parts[0];
  if (kind == "trans") {
    if (!parts[3].empty()) throw DataError("malformed feature key \"" + std::string(text) + "\"");
    return {FeatureKind::Transition, parse_char(parts[1], text), parse_char(parts[2], text), 0};
  }
  if (kind == "emit" || kind == "eanchor")
    return {kind == "emit" ? FeatureKind::Emission : FeatureKind::EmissionAnchor,
            parse_int(parts[1], text), parse_char(parts[2], text), parse_char(parts[3], text)};
  if (kind == "bias") {
    if (!parts[2].empty() || !parts[3].empty())
      throw DataError("malformed feature key \"" + std::string(text) + "\"");
    return {FeatureKind::Bias, parse_int(parts[1], text), 0, 0};
  }
  if (kind == "anchor")
    return {FeatureKind::Anchor, parse_int(parts[1], text), parse_int(parts[2], text),
            parse_char(parts[3], text)};
  if (kind == "posbucket") {
    if (!parts[3].empty()) throw DataError("malformed feature key \"" + std::string(text) + "\"");
    return {FeatureKind::PosBucket, parse_int(parts[1], text), parse_int(parts[2], text), 0};
  }
  throw DataError("unknown feature kind in \"" + std::string(text) + "\"");
}

ModelParams::ModelParams(Alphabet label_alphabet, int patterns)
    : labels(std::move(label_alphabet)),
      pattern_count(patterns),
      transition(labels.size() * labels.size(), 0.0) {}

double ModelParams::weight(const FeatureKey& key) const {
  switch (key.kind) {
    case FeatureKind::Transition: {
      const auto from = static_cast<char>(key.f1);
      const auto to = static_cast<char>(key.f2);
      if (!labels.contains(from) || !labels.contains(to)) return 0.0;
      return transition[static_cast<std::size_t>(labels.id(from)) * labels.size() +
                        static_cast<std::size_t>(labels.id(to))];
    }
    case FeatureKind::Emission:
    case FeatureKind::EmissionAnchor: {
      const auto it = emission.find(key);
      return it == emission.end() ? 0.0 : it->second;
    }
    default: {
      const auto it = pattern.find(key);
      return it == pattern.end() ? 0.0 : it->second;
    }
  }
}

void ModelParams::set(const FeatureKey& key, double value) {
  switch (key.kind) {
    case FeatureKind::Transition:
      transition[static_cast<std::size_t>(labels.id(static_cast<char>(key.f1))) *
                     labels.size() +
                 static_cast<std::size_t>(labels.id(static_cast<char>(key.f2)))] = value;
      return;
    case FeatureKind::Emission:
    case FeatureKind::EmissionAnchor:
      emission[key] = value;
      return;
    default:
      pattern[key] = value;
  }
}

void ModelParams::add(const FeatureVector& delta, double scale) {
  for (const auto& [key, value] : delta) set(key, weight(key) + scale * value);
}

FeatureVector ModelParams::to_vector() const {
  FeatureVector out;
  for (std::size_t a = 0; a < labels.size(); ++a)
    for (std::size_t b = 0; b < labels.size(); ++b)
      out[FeatureKey::transition(labels.symbols()[a], labels.symbols()[b])] =
          transition[a * labels.size() + b];
  out.insert(emission.begin(), emission.end());
  out.insert(pattern.begin(), pattern.end());
  return out;
}

bool ModelParams::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(transition.begin(), transition.end(), finite) &&
         std::all_of(emission.begin(), emission.end(),
                     [&](const auto& kv) { return finite(kv.second); }) &&
         std::all_of(pattern.begin(), pattern.end(),
                     [&](const auto& kv) { return finite(kv.second); });
}

std::vector<FeatureKey> emission_features(const Alphabet& labels,
                                          const FeatureConfig& config,
                                          const InputSeq& x, Symbol label, int i) {
  std::vector<FeatureKey> out;
  out.reserve(static_cast<std::size_t>(2 * config.window_radius + 1) +
              config.emission_anchor_positions.size());
  const int n = static_cast<int>(x.size());
  const char l = labels.symbol(label);
  for (int o = -config.window_radius; o <= config.window_radius; ++o) {
    const int p = i + o;
    const char token = (p >= 1 && p <= n) ? x[static_cast<std::size_t>(p - 1)] : config.pad;
    out.push_back(FeatureKey::emission(o, token, l));
  }
  for (int p : config.emission_anchor_positions) {
    const char token = p <= n ? x[static_cast<std::size_t>(p - 1)] : config.pad;
    out.push_back(FeatureKey::emission_anchor(p - i, token, l));
  }
  return out;
}

std::vector<FeatureKey> transition_features(const Alphabet& labels, Symbol from,
                                            Symbol to) {
  return {FeatureKey::transition(labels.symbol(from), labels.symbol(to))};
}

std::vector<FeatureKey> pattern_features(const FeatureConfig& config,
                                         const InputSeq& x, int pattern, int i) {
  std::vector<FeatureKey> out;
  out.reserve(config.anchor_positions.size() + 2);
  out.push_back(FeatureKey::bias(pattern));
  const int n = static_cast<int>(x.size());
  for (int p : config.anchor_positions) {
    const char token = p <= n ? x[static_cast<std::size_t>(p - 1)] : config.pad;
    out.push_back(FeatureKey::anchor(pattern, p, token));
  }
  out.push_back(FeatureKey::posbucket(pattern, config.bucket(i)));
  return out;
}

double log_emission(const ModelParams& params, const FeatureConfig& config,
                    const InputSeq& x, Symbol label, int i) {
  double sum = 0.0;
  for (const auto& key : emission_features(params.labels, config, x, label, i))
    sum += params.weight(key);
  return sum;
}

double log_transition(const ModelParams& params, Symbol from, Symbol to) {
  return params.transition[static_cast<std::size_t>(from) * params.labels.size() +
                           static_cast<std::size_t>(to)];
}

double log_pattern(const ModelParams& params, const FeatureConfig& config,
                   const InputSeq& x, int pattern, int i) {
  double sum = 0.0;
  for (const auto& key : pattern_features(config, x, pattern, i)) sum += params.weight(key);
  return sum;
}

}  // namespace rpcrf
