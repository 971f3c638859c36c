#include <algorithm>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "rpcrf/error.hpp"

namespace {

using nlohmann::json;
namespace cli = rpcrf::cli;

/// Reads `--config` files as JSON objects addressed to one subcommand. Nested
/// objects are flattened, keys may use underscores for dashes, and the
/// "command" key is ignored.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::string section) : section_(std::move(section)) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, items);
    if (!section_.empty())
      for (auto& item : items) item.parents = {section_};
    return items;
  }

 private:
  std::string section_;

  static std::string scalar(const json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  }

  static void flatten(const json& j, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (key == "command" || value.is_null()) continue;
      if (value.is_object()) {
        flatten(value, items);
        continue;
      }
      CLI::ConfigItem item;
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
        if (item.inputs.empty()) item.inputs.push_back("none");
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

/// Integer list option; a lone "none" means the empty list.
std::vector<int> int_list(const std::string& flag, const std::vector<std::string>& raw) {
  std::vector<int> out;
  if (raw.size() == 1 && raw.front() == "none") return out;
  for (const auto& s : raw) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "'" + s + "' is not an integer");
    }
  }
  return out;
}

rpcrf::Task task_from(const std::string& name) {
  const auto t = rpcrf::parse_task(name);
  if (!t) throw CLI::ValidationError("--task", "unknown task '" + name + "'");
  return *t;
}

const auto kTaskNames = CLI::IsMember({"cardinality", "agreement", "battleship"});

const std::vector<std::string> kCommands{"generate", "train", "eval", "export-automaton", "inspect"};

std::string command_in(int argc, char** argv) {
  for (int i = 1; i < argc; ++i)
    if (std::find(kCommands.begin(), kCommands.end(), argv[i]) != kCommands.end()) return argv[i];
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regular-pattern CRF: generate data, train, evaluate, and inspect pattern machines"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "JSON file with option values; command-line flags win");
  app.config_formatter(std::make_shared<JsonConfig>(command_in(argc, argv)));

  // generate
  auto* gen = app.add_subcommand("generate", "Write synthetic train/test datasets");
  std::string gen_task = "cardinality";
  cli::GenerateOptions gen_opts;
  std::uint64_t gen_seed = 0;
  gen->add_option("--task", gen_task, "cardinality, agreement or battleship")
      ->check(kTaskNames)
      ->required();
  gen->add_option("--train-size", gen_opts.train_size, "Training samples")->capture_default_str();
  gen->add_option("--test-size", gen_opts.test_size, "Test samples")->capture_default_str();
  auto* seed_opt = gen->add_option("--seed", gen_seed, "Generation seed (default: 1, 2, 3 per task)");
  gen->add_option("--out", gen_opts.out_dir, "Output directory")->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "Fit a model with full-batch Adam");
  cli::TrainOptions tr_opts;
  std::string pad = "#";
  std::vector<std::string> anchors{"1"}, buckets{"none"}, emission_anchors{"none"};
  tr->add_option("--patterns", tr_opts.patterns, "Pattern file")->required()->check(CLI::ExistingFile);
  tr->add_option("--data", tr_opts.data, "Training JSONL")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", tr_opts.out_dir, "Run directory")->capture_default_str();
  tr->add_option("--window-radius", tr_opts.features.window_radius, "Emission window radius (0-4)")
      ->capture_default_str();
  tr->add_option("--anchor-positions", anchors,
                 "Input positions exposed to pattern potentials ('none' for no anchors)")
      ->capture_default_str();
  tr->add_option("--position-buckets", buckets,
                 "Ascending bucket bounds for firing positions ('none' = exact positions)")
      ->capture_default_str();
  tr->add_option("--emission-anchor-positions", emission_anchors,
                 "Input positions exposed to every emission by relative offset")
      ->capture_default_str();
  tr->add_option("--pad", pad, "Boundary token")->capture_default_str();
  tr->add_option("--learning-rate", tr_opts.train.learning_rate)->capture_default_str();
  tr->add_option("--beta1", tr_opts.train.beta1)->capture_default_str();
  tr->add_option("--beta2", tr_opts.train.beta2)->capture_default_str();
  tr->add_option("--epsilon", tr_opts.train.epsilon)->capture_default_str();
  tr->add_option("--max-epochs", tr_opts.train.max_epochs)->capture_default_str();
  tr->add_option("--tolerance", tr_opts.train.tolerance, "Relative objective change that stops training")
      ->capture_default_str();
  tr->add_option("--l2", tr_opts.train.l2, "L2 regularization strength")->capture_default_str();
  tr->add_option("--batch-size", tr_opts.train.batch_size, "0 = full batch")->capture_default_str();
  tr->add_option("--seed", tr_opts.train.seed, "Seed for shuffling and random init")->capture_default_str();
  tr->add_option("--init-scale", tr_opts.train.init_scale, "Uniform init half-width; 0 = zeros")
      ->capture_default_str();
  tr->add_option("--max-states", tr_opts.max_states, "Product machine size cap")->capture_default_str();
  tr->add_option("--progress", tr_opts.progress_every, "Log the objective every N epochs");

  // eval
  auto* ev = app.add_subcommand("eval", "Decode a dataset and report exact-match accuracy");
  cli::EvalOptions ev_opts;
  std::string ev_task;
  ev->add_option("--model", ev_opts.model, "Model file")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", ev_opts.data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", ev_opts.out_dir, "Directory for metrics.json and predictions.jsonl");
  ev->add_option("--task", ev_task, "Task for the optimal-strategy ratio (default: dataset header)")
      ->check(kTaskNames);

  // export-automaton
  auto* ex = app.add_subcommand("export-automaton", "Write the product machine as Graphviz DOT");
  cli::ExportOptions ex_opts;
  ex->add_option("--patterns", ex_opts.patterns, "Pattern file")->required()->check(CLI::ExistingFile);
  ex->add_option("--out", ex_opts.out, "DOT output path")->required();
  ex->add_option("--max-states", ex_opts.max_states)->capture_default_str();

  // inspect
  auto* in = app.add_subcommand("inspect", "Print product machine statistics");
  cli::InspectOptions in_opts;
  auto* in_pat = in->add_option("--patterns", in_opts.patterns, "Pattern file")->check(CLI::ExistingFile);
  auto* in_model = in->add_option("--model", in_opts.model, "Model file")->check(CLI::ExistingFile);
  in_pat->excludes(in_model);
  in->add_flag("--json", in_opts.json, "Emit JSON");
  in->add_option("--max-states", in_opts.max_states)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "rpcrf: " << one_line(e.what()) << "\n";
    return cli::kUsage;
  }

  try {
    if (gen->parsed()) {
      gen_opts.task = task_from(gen_task);
      if (seed_opt->count() > 0) gen_opts.seed = gen_seed;
      const auto out = cli::run_generate(gen_opts);
      std::cout << out.train_path.string() << "\n" << out.test_path.string() << "\n";
    } else if (tr->parsed()) {
      if (pad.size() != 1) throw CLI::ValidationError("--pad", "must be a single character");
      tr_opts.features.pad = pad.front();
      tr_opts.features.anchor_positions = int_list("--anchor-positions", anchors);
      tr_opts.features.position_buckets = int_list("--position-buckets", buckets);
      tr_opts.features.emission_anchor_positions =
          int_list("--emission-anchor-positions", emission_anchors);
      const auto out = cli::run_train(tr_opts, &std::cerr);
      std::cout << "epochs " << out.result.epochs << (out.result.converged ? " (converged)" : "")
                << ", final NLL " << out.result.final_nll << ", model "
                << (tr_opts.out_dir / "model.json").string() << "\n";
    } else if (ev->parsed()) {
      if (!ev_task.empty()) ev_opts.task = task_from(ev_task);
      const auto out = cli::run_eval(ev_opts);
      std::ostringstream line;
      line << "exact match " << 100.0 * out.exact_match << "% over " << out.count << " sequences";
      if (out.optimal)
        line << "; optimal " << 100.0 * *out.optimal << "%, " << 100.0 * *out.ratio << "% of optimal";
      std::cout << line.str() << "\n";
    } else if (ex->parsed()) {
      const int states = cli::run_export_automaton(ex_opts);
      std::cout << states << " states written to " << ex_opts.out.string() << "\n";
    } else if (in->parsed()) {
      if (in_opts.patterns.empty() && in_opts.model.empty())
        throw CLI::ValidationError("inspect", "one of --patterns or --model is required");
      std::cout << cli::run_inspect(in_opts);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "rpcrf: " << one_line(e.what()) << "\n";
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "rpcrf: error: " << one_line(e.what()) << "\n";
    return cli::exit_code_for(e);
  }
  return cli::kOk;
}
