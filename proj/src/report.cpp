#include "ilash/report.hpp"

#include <set>
#include <stdexcept>

namespace ilash {

namespace {

nlohmann::ordered_json stats_json(const ModelGraph& model) {
  const GraphStats st = model.stats();
  nlohmann::ordered_json shared;
  for (const auto& [task, count] : st.shared_layer_count) {
    shared[std::to_string(task)] = count;
  }
  return {{"param_count", st.param_count},
          {"layer_count", st.layer_count},
          {"flops_estimate", st.flops_estimate},
          {"shared_layer_count", std::move(shared)}};
}

std::string utc_now() {
  char buf[32];
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

nlohmann::ordered_json run_report_json(const std::string& algorithm,
                                       const SearchParams& params,
                                       const std::vector<TaskTrace>& trace,
                                       const ModelGraph& model, int trainer_calls,
                                       int score_calls, int surrogate_calls,
                                       const std::string& surrogate_kind,
                                       const EnergyReport* energy) {
  nlohmann::ordered_json report;
  report["schema_version"] = 1;
  report["algorithm"] = algorithm;
  report["params"] = {{"g_th", params.g_th},
                      {"ll", params.ll},
                      {"ul", params.ul},
                      {"epochs", params.train.epochs},
                      {"batch_size", params.train.batch_size},
                      {"learning_rate", params.train.learning_rate},
                      {"seed", params.train.seed},
                      {"model_seed", params.seed},
                      {"train_shared_layers", params.train.train_shared_layers}};
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  for (const TaskTrace& t : trace) {
    nlohmann::ordered_json cands = nlohmann::ordered_json::array();
    for (const CandidateEval& c : t.candidates) {
      cands.push_back({{"depth", c.depth}, {"gn", c.gn}});
    }
    tasks.push_back({{"id", t.task},
                     {"chosen_depth", t.chosen_depth},
                     {"best_gn", t.best_gn},
                     {"fallback", t.fallback},
                     {"candidates", std::move(cands)}});
  }
  report["tasks"] = std::move(tasks);
  report["stats"] = stats_json(model);
  nlohmann::ordered_json counts;
  counts["trainer_calls"] = trainer_calls;
  if (algorithm == "heu") counts["score_calls"] = score_calls;
  if (algorithm == "pred") counts["surrogate_calls"] = surrogate_calls;
  report["counts"] = std::move(counts);
  if (!surrogate_kind.empty()) report["surrogate_kind"] = surrogate_kind;
  if (energy) report["energy"] = to_json(*energy);
  report["meta"] = {{"created_utc", utc_now()}};
  return report;
}

nlohmann::ordered_json heu_report_json(const HeuResult& result, const SearchParams& params,
                                       const EnergyReport* energy) {
  return run_report_json("heu", params, result.trace, result.model, result.trainer_calls,
                         result.score_calls, 0, "", energy);
}

nlohmann::ordered_json pred_report_json(const PredResult& result, const SearchParams& params,
                                        const std::string& surrogate_kind,
                                        const EnergyReport* energy) {
  return run_report_json("pred", params, result.trace, result.model, result.trainer_calls,
                         0, result.surrogate_calls, surrogate_kind, energy);
}

void validate_run_report(const nlohmann::json& report) {
  const char* required[] = {"schema_version", "algorithm", "params", "tasks", "stats",
                            "counts"};
  for (const char* key : required) {
    if (!report.contains(key)) {
      throw std::invalid_argument(std::string("run report: missing field '") + key + "'");
    }
  }
  if (report.at("schema_version").get<int>() != 1) {
    throw std::invalid_argument("run report: unsupported schema_version");
  }
  for (const auto& t : report.at("tasks")) {
    for (const char* key : {"id", "chosen_depth", "best_gn", "candidates"}) {
      if (!t.contains(key)) {
        throw std::invalid_argument(std::string("run report: task entry missing '") + key +
                                    "'");
      }
    }
  }
  if (!report.at("counts").contains("trainer_calls")) {
    throw std::invalid_argument("run report: counts.trainer_calls missing");
  }
}

nlohmann::ordered_json compare_runs(const nlohmann::json& heu, const nlohmann::json& pred) {
  validate_run_report(heu);
  validate_run_report(pred);

  std::set<int> heu_ids, pred_ids;
  for (const auto& t : heu.at("tasks")) heu_ids.insert(t.at("id").get<int>());
  for (const auto& t : pred.at("tasks")) pred_ids.insert(t.at("id").get<int>());
  if (heu_ids != pred_ids) {
    throw std::invalid_argument("compare_runs: reports cover different task sets");
  }

  nlohmann::ordered_json out;
  out["schema_version"] = 1;
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  for (const auto& ht : heu.at("tasks")) {
    const int id = ht.at("id").get<int>();
    for (const auto& pt : pred.at("tasks")) {
      if (pt.at("id").get<int>() != id) continue;
      tasks.push_back({{"id", id},
                       {"heu_depth", ht.at("chosen_depth")},
                       {"pred_depth", pt.at("chosen_depth")},
                       {"heu_gn", ht.at("best_gn")},
                       {"pred_gn", pt.at("best_gn")},
                       {"same_depth", ht.at("chosen_depth") == pt.at("chosen_depth")}});
    }
  }
  out["tasks"] = std::move(tasks);

  const double heu_calls = heu.at("counts").at("trainer_calls").get<double>();
  const double pred_calls = pred.at("counts").at("trainer_calls").get<double>();
  nlohmann::ordered_json ratios;
  ratios["trainer_calls"] = pred_calls > 0 ? heu_calls / pred_calls : 0.0;
  if (heu.contains("energy") && pred.contains("energy")) {
    const auto& he = heu.at("energy");
    const auto& pe = pred.at("energy");
    for (const char* key : {"runtime_hours", "kwh_pue", "co2_lbs"}) {
      const double hv = he.at(key).get<double>();
      const double pv = pe.at(key).get<double>();
      if (pv > 0.0) ratios[key] = hv / pv;
    }
  }
  out["ratios"] = std::move(ratios);
  out["heu"] = {{"counts", heu.at("counts")}};
  out["pred"] = {{"counts", pred.at("counts")}};
  if (heu.contains("energy")) out["heu"]["energy"] = heu.at("energy");
  if (pred.contains("energy")) out["pred"]["energy"] = pred.at("energy");
  return out;
}

nlohmann::ordered_json strip_volatile(const nlohmann::json& report) {
  nlohmann::ordered_json out = report;
  out.erase("energy");
  out.erase("meta");
  return out;
}

}  // namespace ilash
