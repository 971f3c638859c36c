#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rpcrf/pattern_machine.hpp"
#include "rpcrf/potentials.hpp"
#include "rpcrf/synthdata.hpp"

namespace rpcrf {

/// First line of a dataset file.
struct DatasetHeader {
  std::string task;
  std::uint64_t seed = 0;
  std::string split;
  std::size_t size = 0;

  friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

struct Dataset {
  std::optional<DatasetHeader> header;
  std::vector<Sample> samples;
};

/// JSONL: an optional header object {"task","seed","split","size"} followed by
/// one {"x": ..., "y": ...} object per line.
std::string dataset_to_jsonl(const DatasetHeader& header, const std::vector<Sample>& samples);
Dataset parse_dataset_jsonl(std::string_view text);
Dataset load_dataset(const std::filesystem::path& path);

/// A trained model: everything needed to rebuild and decode.
struct Model {
  Alphabet labels;
  std::vector<std::string> patterns;
  FeatureConfig features;
  ModelParams params;
  PatternMachine machine;
};

std::string model_to_json(const Model& model);
/// Throws DataError on malformed input, or when the embedded machine differs
/// from the one rebuilt from the pattern texts.
Model model_from_json(std::string_view text);
Model load_model(const std::filesystem::path& path);

std::string machine_to_json(const PatternMachine& machine);
PatternMachine machine_from_json(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string content_hash(std::string_view bytes);

}  // namespace rpcrf
