#include "rpcrf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rpcrf/error.hpp"

namespace rpcrf {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("malformed " + what + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* name, const std::string& what) {
  if (!j.is_object() || !j.contains(name))
    throw DataError(what + " is missing field \"" + name + "\"");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw DataError(what + " field \"" + name + "\": " + e.what());
  }
}

json machine_json(const PatternMachine& m) {
  json states = json::array();
  for (const auto& s : m.states())
    states.push_back({{"components", s.components}, {"labels", s.labels}});
  json arcs = json::array();
  for (const Arc& a : m.arcs()) arcs.push_back({a.source, a.symbol, a.target});
  std::vector<int> anchored(m.end_anchored_flags().begin(), m.end_anchored_flags().end());
  return {{"symbol_count", m.symbol_count()},
          {"initial", m.initial()},
          {"end_anchored", anchored},
          {"states", states},
          {"transitions", m.table()},
          {"arcs", arcs}};
}

PatternMachine machine_from(const json& j) {
  const std::string what = "pattern machine";
  const int k = field<int>(j, "symbol_count", what);
  if (field<int>(j, "initial", what) != 0) throw DataError("pattern machine initial state must be 0");
  std::vector<MachineState> states;
  for (const auto& s : field<json>(j, "states", what))
    states.push_back({field<std::vector<int>>(s, "components", what),
                      field<std::vector<int>>(s, "labels", what)});
  std::vector<char> anchored;
  for (int v : field<std::vector<int>>(j, "end_anchored", what)) anchored.push_back(v ? 1 : 0);
  PatternMachine m(k, std::move(states), field<std::vector<int>>(j, "transitions", what),
                   std::move(anchored));
  const auto arcs = field<std::vector<std::vector<int>>>(j, "arcs", what);
  if (arcs.size() != m.arcs().size()) throw DataError("pattern machine arc list is inconsistent");
  for (std::size_t e = 0; e < arcs.size(); ++e) {
    const Arc& a = m.arc(static_cast<int>(e));
    if (arcs[e] != std::vector<int>{a.source, a.symbol, a.target})
      throw DataError("pattern machine arc list is inconsistent");
  }
  return m;
}

json features_json(const FeatureConfig& c) {
  return {{"window_radius", c.window_radius},
          {"anchor_positions", c.anchor_positions},
          {"position_buckets", c.position_buckets},
          {"max_position", c.max_position},
          {"pad", std::string(1, c.pad)},
          {"emission_anchor_positions", c.emission_anchor_positions}};
}

FeatureConfig features_from(const json& j) {
  const std::string what = "feature config";
  FeatureConfig c;
  c.window_radius = field<int>(j, "window_radius", what);
  c.anchor_positions = field<std::vector<int>>(j, "anchor_positions", what);
  c.position_buckets = field<std::vector<int>>(j, "position_buckets", what);
  c.max_position = field<int>(j, "max_position", what);
  const auto pad = field<std::string>(j, "pad", what);
  if (pad.size() != 1) throw DataError("feature config pad must be one character");
  c.pad = pad.front();
  if (j.contains("emission_anchor_positions"))
    c.emission_anchor_positions = field<std::vector<int>>(j, "emission_anchor_positions", what);
  c.validate();
  return c;
}

}  // namespace

std::string dataset_to_jsonl(const DatasetHeader& header, const std::vector<Sample>& samples) {
  std::string out = json{{"task", header.task},
                         {"seed", header.seed},
                         {"split", header.split},
                         {"size", header.size}}
                        .dump();
  out.push_back('\n');
  for (const auto& s : samples) {
    out += json{{"x", s.x}, {"y", s.y}}.dump();
    out.push_back('\n');
  }
  return out;
}

Dataset parse_dataset_jsonl(std::string_view text) {
  Dataset d;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    const auto line = text.substr(start, stop - start);
    start = stop + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string what = "dataset line " + std::to_string(line_no);
    const json j = parse_json(line, what);
    if (!j.is_object()) throw DataError(what + " is not an object");
    if (!j.contains("x")) {
      if (line_no != 1 || d.header)
        throw DataError(what + " has no \"x\" field");
      d.header = DatasetHeader{field<std::string>(j, "task", what),
                               field<std::uint64_t>(j, "seed", what),
                               field<std::string>(j, "split", what),
                               field<std::size_t>(j, "size", what)};
      continue;
    }
    Sample s{field<std::string>(j, "x", what), field<std::string>(j, "y", what)};
    if (s.x.size() != s.y.size()) throw DataError(what + ": x and y differ in length");
    if (s.x.empty()) throw DataError(what + ": empty sequence");
    if (s.x.find('|') != std::string::npos) throw DataError(what + ": '|' is not a valid token");
    d.samples.push_back(std::move(s));
  }
  if (d.header && d.header->size != d.samples.size())
    throw DataError("dataset header declares " + std::to_string(d.header->size) +
                    " samples but the file holds " + std::to_string(d.samples.size()));
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset_jsonl(read_file(path));
}

std::string machine_to_json(const PatternMachine& machine) {
  return machine_json(machine).dump();
}

PatternMachine machine_from_json(std::string_view text) {
  return machine_from(parse_json(text, "pattern machine"));
}

std::string model_to_json(const Model& model) {
  const auto& p = model.params;
  const std::size_t k = p.labels.size();
  json transition = json::array();
  for (std::size_t a = 0; a < k; ++a)
    transition.push_back(std::vector<double>(p.transition.begin() + static_cast<long>(a * k),
                                             p.transition.begin() + static_cast<long>((a + 1) * k)));
  json emission = json::object();
  for (const auto& [key, w] : p.emission) emission[key.to_string()] = w;
  json pattern = json::object();
  for (const auto& [key, w] : p.pattern) pattern[key.to_string()] = w;
  const json j = {{"format", "rpcrf-model/1"},
                  {"alphabet", model.labels.symbols()},
                  {"patterns", model.patterns},
                  {"features", features_json(model.features)},
                  {"weights",
                   {{"transition", transition}, {"emission", emission}, {"pattern", pattern}}},
                  {"machine", machine_json(model.machine)}};
  return j.dump(1) + "\n";
}

Model model_from_json(std::string_view text) {
  const std::string what = "model file";
  const json j = parse_json(text, what);
  if (field<std::string>(j, "format", what) != "rpcrf-model/1")
    throw DataError("unsupported model format");
  Model m;
  m.labels = Alphabet(field<std::string>(j, "alphabet", what));
  m.patterns = field<std::vector<std::string>>(j, "patterns", what);
  m.features = features_from(field<json>(j, "features", what));
  m.params = ModelParams(m.labels, static_cast<int>(m.patterns.size()));
  const json weights = field<json>(j, "weights", what);
  const auto transition = field<std::vector<std::vector<double>>>(weights, "transition", what);
  const std::size_t k = m.labels.size();
  if (transition.size() != k) throw DataError("transition table has the wrong shape");
  for (std::size_t a = 0; a < k; ++a) {
    if (transition[a].size() != k) throw DataError("transition table has the wrong shape");
    for (std::size_t b = 0; b < k; ++b) m.params.transition[a * k + b] = transition[a][b];
  }
  const json emission = field<json>(weights, "emission", what);
  for (const auto& [name, w] : emission.items()) {
    const auto key = FeatureKey::parse(name);
    if (!key.is_emission()) throw DataError("non-emission key " + name);
    if (!w.is_number()) throw DataError("weight " + name + " is not a number");
    m.params.emission[key] = w.get<double>();
  }
  const json pattern = field<json>(weights, "pattern", what);
  for (const auto& [name, w] : pattern.items()) {
    const auto key = FeatureKey::parse(name);
    if (key.is_emission() || key.kind == FeatureKind::Transition)
      throw DataError("non-pattern key " + name);
    if (!w.is_number()) throw DataError("weight " + name + " is not a number");
    m.params.pattern[key] = w.get<double>();
  }
  if (!m.params.all_finite()) throw DataError("model contains non-finite weights");
  m.machine = machine_from(field<json>(j, "machine", what));
  const auto rebuilt = build_pattern_machine(build_pattern_set(m.labels, m.patterns));
  if (!(rebuilt == m.machine))
    throw DataError("embedded pattern machine does not match the pattern texts");
  return m;
}

Model load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rpcrf
