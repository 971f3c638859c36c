#include "commands.hpp"

#include <chrono>
#include <map>
#include <ostream>

#include <json.hpp>

#include "rpcrf/error.hpp"

namespace rpcrf::cli {

using nlohmann::json;

namespace {

json features_json(const FeatureConfig& f) {
  return {{"window_radius", f.window_radius},
          {"anchor_positions", f.anchor_positions},
          {"position_buckets", f.position_buckets},
          {"emission_anchor_positions", f.emission_anchor_positions},
          {"pad", std::string(1, f.pad)}};
}

json train_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"beta1", t.beta1},
          {"beta2", t.beta2},                 {"epsilon", t.epsilon},
          {"max_epochs", t.max_epochs},       {"tolerance", t.tolerance},
          {"l2", t.l2},                       {"batch_size", t.batch_size},
          {"seed", t.seed},                   {"init_scale", t.init_scale}};
}

void write_json(const fs::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<Example> to_examples(const Dataset& data, const Alphabet& labels) {
  std::vector<Example> out;
  out.reserve(data.samples.size());
  for (const auto& s : data.samples) out.push_back({s.x, labels.encode(s.y)});
  return out;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const CapacityError*>(&e)) return kCapacity;
  if (dynamic_cast<const DivergenceError*>(&e)) return kDivergence;
  return kDataError;
}

GenerateOutcome run_generate(const GenerateOptions& o) {
  if (o.train_size == 0 || o.test_size == 0) throw DataError("dataset sizes must be at least 1");
  const TaskSpec spec{o.task, o.train_size, o.test_size, o.seed.value_or(default_seed(o.task))};
  const auto data = generate(spec);
  const std::string task(task_name(o.task));
  GenerateOutcome out{o.out_dir / "train.jsonl", o.out_dir / "test.jsonl"};
  write_file_atomic(out.train_path,
                    dataset_to_jsonl({task, spec.seed, "train", data.train.size()}, data.train));
  write_file_atomic(out.test_path,
                    dataset_to_jsonl({task, spec.seed, "test", data.test.size()}, data.test));
  write_json(o.out_dir / "config.json", {{"command", "generate"},
                                         {"task", task},
                                         {"train_size", spec.train_size},
                                         {"test_size", spec.test_size},
                                         {"seed", spec.seed},
                                         {"out", o.out_dir.string()}});
  return out;
}

TrainOutcome run_train(const TrainOptions& o, std::ostream* log) {
  o.features.validate();
  const auto file = load_pattern_file(o.patterns);
  const auto set = build_pattern_set(file);
  if (log)
    for (const auto& w : set.warnings) *log << "warning: " << w << "\n";
  const std::string raw = read_file(o.data);
  const auto data = parse_dataset_jsonl(raw);
  if (data.samples.empty()) throw DataError("dataset " + o.data.string() + " is empty");
  const auto examples = to_examples(data, file.alphabet);

  TrainOutcome out;
  out.dataset_hash = content_hash(raw);
  out.model.labels = file.alphabet;
  out.model.patterns = file.patterns;
  out.model.machine = build_pattern_machine(set, o.max_states);

  const auto start = std::chrono::steady_clock::now();
  std::function<void(int, double)> progress;
  if (log && o.progress_every > 0)
    progress = [&](int epoch, double objective) {
      if (epoch % o.progress_every == 0) *log << "epoch " << epoch << " objective " << objective << "\n";
    };
  out.result = train(out.model.machine, file.alphabet, o.features, examples, o.train, progress);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.model.features = out.result.features;
  out.model.params = out.result.params;

  write_file_atomic(o.out_dir / "model.json", model_to_json(out.model));
  const auto& r = out.result;
  write_json(o.out_dir / "metrics.json",
             {{"command", "train"},
              {"dataset_hash", out.dataset_hash},
              {"examples", examples.size()},
              {"pattern_count", set.size()},
              {"machine", {{"states", out.model.machine.state_count()},
                           {"arcs", out.model.machine.arc_count()}}},
              {"weights", r.params.to_vector().size()},
              {"seed", o.train.seed},
              {"epochs", r.epochs},
              {"converged", r.converged},
              {"final_nll", r.final_nll},
              {"final_objective", r.final_objective},
              {"nll_trace", r.nll_trace},
              {"objective_trace", r.trace}});
  write_json(o.out_dir / "timing.json", {{"train_seconds", out.seconds}});
  write_json(o.out_dir / "config.json", {{"command", "train"},
                                         {"patterns", o.patterns.string()},
                                         {"data", o.data.string()},
                                         {"out", o.out_dir.string()},
                                         {"max_states", o.max_states},
                                         {"features", features_json(o.features)},
                                         {"train", train_json(o.train)}});
  return out;
}

std::string decode(const Model& model, const std::string& x) {
  if (x.empty()) throw DataError("cannot decode an empty sequence");
  const auto lattice = build_lattice(model.machine, model.params, model.features, x);
  return model.labels.decode(viterbi(lattice));
}

EvalOutcome run_eval(const EvalOptions& o) {
  const std::string model_text = read_file(o.model);
  const auto model = model_from_json(model_text);
  const std::string raw = read_file(o.data);
  const auto data = parse_dataset_jsonl(raw);
  if (data.samples.empty()) throw DataError("dataset " + o.data.string() + " is empty");

  EvalOutcome out;
  out.task = o.task;
  if (!out.task && data.header) out.task = parse_task(data.header->task);

  std::vector<std::string> golds;
  std::map<std::string, std::string> cache;
  for (const auto& s : data.samples) {
    for (char c : s.y)
      if (!model.labels.contains(c))
        throw AlphabetError(std::string("dataset label '") + c + "' is not in the model alphabet");
    auto it = cache.find(s.x);
    if (it == cache.end()) it = cache.emplace(s.x, decode(model, s.x)).first;
    out.predictions.push_back(it->second);
    golds.push_back(s.y);
  }
  out.count = golds.size();
  out.exact_match = exact_match_accuracy(out.predictions, golds);
  if (out.task) {
    out.optimal = optimal_accuracy(*out.task).value();
    out.ratio = out.exact_match / *out.optimal;
  }

  if (!o.out_dir.empty()) {
    json metrics = {{"command", "eval"},
                    {"dataset_hash", content_hash(raw)},
                    {"model_hash", content_hash(model_text)},
                    {"count", out.count},
                    {"exact_match", out.exact_match},
                    {"task", out.task ? json(std::string(task_name(*out.task))) : json()},
                    {"optimal", out.optimal ? json(*out.optimal) : json()},
                    {"percent_of_optimal", out.ratio ? json(100.0 * *out.ratio) : json()}};
    write_json(o.out_dir / "metrics.json", metrics);
    std::string lines;
    for (std::size_t j = 0; j < data.samples.size(); ++j)
      lines += json{{"x", data.samples[j].x}, {"y", data.samples[j].y}, {"y_hat", out.predictions[j]}}
                   .dump() +
               "\n";
    write_file_atomic(o.out_dir / "predictions.jsonl", lines);
    write_json(o.out_dir / "config.json",
               {{"command", "eval"},
                {"model", o.model.string()},
                {"data", o.data.string()},
                {"out", o.out_dir.string()},
                {"task", o.task ? json(std::string(task_name(*o.task))) : json()}});
  }
  return out;
}

int run_export_automaton(const ExportOptions& o) {
  const auto file = load_pattern_file(o.patterns);
  const auto machine = build_pattern_machine(build_pattern_set(file), o.max_states);
  write_file_atomic(o.out, to_dot(machine, file.alphabet));
  return machine.state_count();
}

std::string run_inspect(const InspectOptions& o) {
  Alphabet labels;
  std::vector<std::string> texts;
  PatternMachine machine;
  std::optional<PatternSet> set;
  if (!o.model.empty()) {
    const auto model = load_model(o.model);
    labels = model.labels;
    texts = model.patterns;
    machine = model.machine;
    set = build_pattern_set(labels, texts);
  } else {
    const auto file = load_pattern_file(o.patterns);
    labels = file.alphabet;
    texts = file.patterns;
    set = build_pattern_set(file);
    machine = build_pattern_machine(*set, o.max_states);
  }

  json patterns = json::array();
  for (const auto& p : set->patterns)
    patterns.push_back({{"id", p.id},
                        {"text", p.ast.source_text},
                        {"component_states", p.dfa.state_count},
                        {"anchored_start", p.ast.anchored_start},
                        {"anchored_end", p.anchored_end},
                        {"matches_empty", p.matches_empty}});
  if (o.json) {
    return json{{"alphabet", labels.symbols()},
                {"states", machine.state_count()},
                {"arcs", machine.arc_count()},
                {"patterns", patterns},
                {"warnings", set->warnings}}
               .dump(2) + "\n";
  }
  std::string out = "alphabet: " + labels.symbols() + "\n";
  out += "states: " + std::to_string(machine.state_count()) + "\n";
  out += "arcs: " + std::to_string(machine.arc_count()) + "\n";
  out += "patterns: " + std::to_string(set->size()) + "\n";
  for (const auto& p : patterns) {
    out += "  L" + std::to_string(p["id"].get<int>()) + "  " + p["text"].get<std::string>() +
           "  component states " + std::to_string(p["component_states"].get<int>());
    if (p["matches_empty"].get<bool>()) out += "  (matches empty)";
    out += "\n";
  }
  for (const auto& w : set->warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace rpcrf::cli
