#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ilash/config.hpp"
#include "ilash/dataset.hpp"
#include "ilash/encoding.hpp"
#include "ilash/energy.hpp"
#include "ilash/report.hpp"
#include "ilash/search.hpp"
#include "ilash/surrogate.hpp"
#include "ilash/trainer.hpp"
#include "ilash/util.hpp"

namespace {

using namespace ilash;

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitSearch = 4;

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("short write to " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// Flags shared by run-heu and run-pred. Flag > config file > default.
struct RunFlags {
  std::string data_dir;
  std::string out_dir;
  std::string config_file;
  std::string profiles_file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* cmd, bool with_threads) {
    cmd->add_option("--data", data_dir, "Dataset directory (from gen-data)")->required();
    cmd->add_option("--out", out_dir, "Output directory for run artifacts")->required();
    cmd->add_option("--config", config_file, "Key-value config file");
    cmd->add_option("--profiles", profiles_file, "Power profile registry (JSON)");
    add_override(cmd, "--g-th", "g_th", "Green threshold in [0,1] (default 0.2)");
    add_override(cmd, "--ll", "ll", "Lowest branchable depth (default 2)");
    add_override(cmd, "--ul", "ul", "Highest branchable depth (default trunk-2)");
    add_override(cmd, "--epochs", "epochs", "Training epochs (default 50)");
    add_override(cmd, "--batch-size", "batch_size", "Minibatch size (default 32)");
    add_override(cmd, "--learning-rate", "learning_rate",
                 "Adam learning rate (default 1e-3)");
    add_override(cmd, "--seed", "seed", "Run seed (default 0)");
    add_override(cmd, "--trunk-layers", "trunk_layers",
                 "Backbone template depth (default 12)");
    add_override(cmd, "--power-profile", "power_profile",
                 "Power profile name, 'none' disables metering (default desk-cpu)");
    add_override(cmd, "--pue", "pue", "Power usage effectiveness factor (default 1.58)");
    add_override(cmd, "--train-shared", "train_shared_layers",
                 "Also update shared layers when training branch candidates");
    if (with_threads) {
      add_override(cmd, "--threads", "threads", "Concurrent candidate evaluations");
    }
  }

  RunParams resolve() const {
    const Config cfg = config_file.empty() ? Config() : Config::load(config_file);
    return resolve_run_params(cfg, overrides);
  }

 private:
  void add_override(CLI::App* cmd, const std::string& flag, const std::string& key,
                    const std::string& help) {
    if (key == "train_shared_layers") {
      cmd->add_flag_callback(
          flag, [this, key] { overrides[key] = "true"; }, help);
      return;
    }
    cmd->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { overrides[key] = v; }, help);
  }
};

struct SearchSetup {
  MultiTaskDataset data;
  std::vector<TaskInfo> tasks;
  std::vector<LayerSpec> base_template;
  SearchParams params;
  PowerProfile profile;
  bool metered = false;
  double pue = kDefaultPue;
};

SearchSetup prepare_search(const RunFlags& flags, const RunParams& rp) {
  SearchSetup s;
  try {
    s.data = load_dataset(flags.data_dir);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  s.tasks = s.data.task_infos();
  if (s.tasks.empty()) throw DataError("dataset has no tasks");
  const TaskInfo& first = s.tasks.front();
  s.base_template =
      make_backbone_template(first.input_h, first.input_w, first.input_c, rp.trunk_layers);

  s.params.ll = rp.ll;
  s.params.ul = rp.ul;
  s.params.g_th = rp.g_th;
  s.params.seed = rp.seed;
  s.params.threads = rp.threads;
  s.params.train.learning_rate = rp.learning_rate;
  s.params.train.batch_size = rp.batch_size;
  s.params.train.epochs = rp.epochs;
  s.params.train.seed = rp.seed;
  s.params.train.train_shared_layers = rp.train_shared_layers;

  if (rp.power_profile != "none") {
    std::vector<PowerProfile> registry;
    if (!flags.profiles_file.empty()) {
      try {
        registry = load_profiles(flags.profiles_file);
      } catch (const std::exception& e) {
        throw DataError(e.what());
      }
    }
    try {
      s.profile = find_profile(rp.power_profile, registry);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    s.metered = true;
    s.pue = rp.pue;
  }
  return s;
}

void print_trace_summary(const std::vector<TaskTrace>& trace) {
  for (const TaskTrace& t : trace) {
    std::printf("task %d: depth %d (gn %.4f)%s\n", t.task, t.chosen_depth, t.best_gn,
                t.fallback ? " [fallback]" : "");
  }
}

void print_energy(const EnergyReport& e) {
  std::printf("energy [%s]: %.6f h, %.9f kWh-PUE, %.9f lbs CO2e\n", e.profile.c_str(),
              e.hours, e.kwh_pue, e.co2_lbs);
}

int cmd_gen_data(const std::string& out_dir, int tasks, int samples, int size, int channels,
                 std::uint64_t seed) {
  SynthSpec spec;
  spec.tasks = tasks;
  spec.samples = samples;
  spec.h = spec.w = size;
  spec.c = channels;
  spec.seed = seed;
  MultiTaskDataset ds;
  try {
    ds = synth_dataset(spec);
    save_dataset(out_dir, ds);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  std::printf("wrote %d-task dataset (%d samples, %dx%dx%d) to %s\n", tasks, samples, size,
              size, channels, out_dir.c_str());
  std::printf("splits: %zu train / %zu val / %zu test\n", ds.splits.train.size(),
              ds.splits.val.size(), ds.splits.test.size());
  return 0;
}

int cmd_run_heu(const RunFlags& flags) {
  const RunParams rp = flags.resolve();
  SearchSetup s = prepare_search(flags, rp);

  TrainingEvaluator evaluator;
  HeuResult result;
  EnergyReport energy;
  try {
    EnergyMeter meter(s.profile, s.pue);
    result = ilash_heu(s.base_template, s.data, s.tasks, s.params, evaluator);
    energy = meter.report();
  } catch (const std::exception& e) {
    throw SearchError(e.what());
  }

  std::filesystem::create_directories(flags.out_dir);
  const std::filesystem::path out(flags.out_dir);
  try {
    write_records_csv(out / "ilash_dataset.csv", result.dataset);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  write_json(out / "model.json", result.model.to_json());
  write_json(out / "report.json",
             heu_report_json(result, s.params, s.metered ? &energy : nullptr));

  print_trace_summary(result.trace);
  std::printf("trainer calls: %d, harvested records: %zu\n", result.trainer_calls,
              result.dataset.size());
  if (s.metered) print_energy(energy);
  return 0;
}

int cmd_fit_surrogate(const std::vector<std::string>& record_specs,
                      const std::string& hold_out, const std::string& kind_name,
                      std::uint64_t seed, const std::string& out_dir) {
  SurrogateKind kind;
  try {
    kind = surrogate_kind_from_string(kind_name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  std::map<std::string, std::vector<BranchRecord>> datasets;
  for (const std::string& spec : record_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw ConfigError("--records expects NAME=PATH, got '" + spec + "'");
    }
    const std::string name = spec.substr(0, eq);
    const std::string path = spec.substr(eq + 1);
    try {
      datasets[name] = read_records_csv(path);
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
  }

  LooResult res;
  try {
    res = leave_one_out_fit(datasets, hold_out, kind, seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path out(out_dir);
  write_json(out / "surrogate.json", res.model->to_json());
  nlohmann::ordered_json metrics;
  metrics["schema_version"] = 1;
  metrics["kind"] = to_string(kind);
  metrics["mae"] = res.metrics.mae;
  metrics["mse"] = res.metrics.mse;
  metrics["rmse"] = res.metrics.rmse;
  metrics["r2"] = res.metrics.r2;
  metrics["held_out"] = hold_out;
  metrics["trained_on"] = res.trained_on;
  metrics["train_rows"] = res.train_sources.size();
  metrics["val_rows"] = res.val_sources.size();
  write_json(out / "metrics.json", metrics);

  std::printf("fit %s on %zu rows (held out: %s); val mae %.4f rmse %.4f r2 %.4f\n",
              to_string(kind), res.train_sources.size(), hold_out.c_str(), res.metrics.mae,
              res.metrics.rmse, res.metrics.r2);
  return 0;
}

int cmd_run_pred(const RunFlags& flags, const std::string& surrogate_file) {
  const RunParams rp = flags.resolve();
  SearchSetup s = prepare_search(flags, rp);

  const nlohmann::json sj = read_json(surrogate_file);
  std::unique_ptr<SurrogateModel> surrogate;
  try {
    surrogate = SurrogateModel::from_json(sj);
  } catch (const std::exception& e) {
    throw DataError(std::string("surrogate file: ") + e.what());
  }

  TrainingEvaluator trainer;
  PredResult result;
  EnergyReport energy;
  try {
    EnergyMeter meter(s.profile, s.pue);
    result = ilash_pred(s.base_template, *surrogate, s.data, s.tasks, s.params, trainer);
    energy = meter.report();
  } catch (const std::exception& e) {
    throw SearchError(e.what());
  }

  std::filesystem::create_directories(flags.out_dir);
  const std::filesystem::path out(flags.out_dir);
  write_json(out / "model.json", result.model.to_json());
  write_json(out / "report.json",
             pred_report_json(result, s.params, to_string(surrogate->kind()),
                              s.metered ? &energy : nullptr));

  print_trace_summary(result.trace);
  std::printf("trainer calls: %d, surrogate calls: %d\n", result.trainer_calls,
              result.surrogate_calls);
  if (s.metered) print_energy(energy);
  return 0;
}

int cmd_compare(const std::string& heu_path, const std::string& pred_path,
                const std::string& out_path) {
  const nlohmann::json heu = read_json(heu_path);
  const nlohmann::json pred = read_json(pred_path);
  nlohmann::ordered_json cmp;
  try {
    cmp = compare_runs(heu, pred);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  write_json(out_path, cmp);
  for (const auto& t : cmp.at("tasks")) {
    std::printf("task %d: heu depth %d vs pred depth %d\n", t.at("id").get<int>(),
                t.at("heu_depth").get<int>(), t.at("pred_depth").get<int>());
  }
  if (cmp.at("ratios").contains("kwh_pue")) {
    std::printf("heu/pred energy ratio: %.2f\n",
                cmp.at("ratios").at("kwh_pue").get<double>());
  }
  std::printf("heu/pred trainer-call ratio: %.2f\n",
              cmp.at("ratios").at("trainer_calls").get<double>());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer-shared multi-task neural architecture search"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic multi-task dataset");
  std::string gen_out;
  int gen_tasks = 3, gen_samples = 300, gen_size = 12, gen_channels = 1;
  std::uint64_t gen_seed = 1;
  gen->add_option("--out", gen_out, "Output dataset directory")->required();
  gen->add_option("--tasks", gen_tasks, "Number of tasks (default 3)");
  gen->add_option("--samples", gen_samples, "Samples shared by all tasks (default 300)");
  gen->add_option("--size", gen_size, "Square image size (default 12)");
  gen->add_option("--channels", gen_channels, "Image channels (default 1)");
  gen->add_option("--seed", gen_seed, "Generator seed (default 1)");

  auto* heu = app.add_subcommand("run-heu", "Exhaustive branch search (trains candidates)");
  RunFlags heu_flags;
  heu_flags.attach(heu, /*with_threads=*/true);

  auto* fit = app.add_subcommand("fit-surrogate",
                                 "Fit a goodness regressor on harvested record CSVs");
  std::vector<std::string> fit_records;
  std::string fit_hold_out, fit_kind = "dt", fit_out;
  std::uint64_t fit_seed = 0;
  fit->add_option("--records", fit_records,
                  "Named record CSVs as NAME=PATH (repeatable, need >= 2)")
      ->required()
      ->expected(-1);
  fit->add_option("--hold-out", fit_hold_out, "Dataset name to exclude from training")
      ->required();
  fit->add_option("--kind", fit_kind, "dt | rf | linear | gbm (default dt)");
  fit->add_option("--seed", fit_seed, "Split/fit seed (default 0)");
  fit->add_option("--out", fit_out, "Output directory")->required();

  auto* pred = app.add_subcommand("run-pred", "Surrogate-guided search (one training pass)");
  RunFlags pred_flags;
  std::string pred_surrogate;
  pred_flags.attach(pred, /*with_threads=*/false);
  pred->add_option("--surrogate", pred_surrogate, "Fitted surrogate JSON")->required();

  auto* cmp = app.add_subcommand("compare", "Compare heu and pred run reports");
  std::string cmp_heu, cmp_pred, cmp_out;
  cmp->add_option("--heu", cmp_heu, "Heuristic run report.json")->required();
  cmp->add_option("--pred", cmp_pred, "Predictive run report.json")->required();
  cmp->add_option("--out", cmp_out, "Comparison report output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (app.got_subcommand(gen)) {
      return cmd_gen_data(gen_out, gen_tasks, gen_samples, gen_size, gen_channels, gen_seed);
    }
    if (app.got_subcommand(heu)) return cmd_run_heu(heu_flags);
    if (app.got_subcommand(fit)) {
      return cmd_fit_surrogate(fit_records, fit_hold_out, fit_kind, fit_seed, fit_out);
    }
    if (app.got_subcommand(pred)) return cmd_run_pred(pred_flags, pred_surrogate);
    if (app.got_subcommand(cmp)) return cmd_compare(cmp_heu, cmp_pred, cmp_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const SearchError& e) {
    std::cerr << "search error: " << e.what() << '\n';
    return kExitSearch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
