#pragma once

#include <optional>
#include <string>

#include "ilash/energy.hpp"
#include "ilash/search.hpp"
#include "json.hpp"

namespace ilash {

// RunReport JSON: {schema_version, algorithm, params, tasks, stats, counts,
// [surrogate_kind], [energy], meta}. The energy and meta blocks hold the
// volatile wall-clock values; everything else is reproducible byte for byte
// under a fixed seed.
nlohmann::ordered_json run_report_json(const std::string& algorithm,
                                       const SearchParams& params,
                                       const std::vector<TaskTrace>& trace,
                                       const ModelGraph& model, int trainer_calls,
                                       int score_calls, int surrogate_calls,
                                       const std::string& surrogate_kind,
                                       const EnergyReport* energy);

nlohmann::ordered_json heu_report_json(const HeuResult& result, const SearchParams& params,
                                       const EnergyReport* energy = nullptr);
nlohmann::ordered_json pred_report_json(const PredResult& result, const SearchParams& params,
                                        const std::string& surrogate_kind,
                                        const EnergyReport* energy = nullptr);

// Throws std::invalid_argument when required fields are missing.
void validate_run_report(const nlohmann::json& report);

// Side-by-side depths, goodness, call counts, and energy with heu/pred
// ratios. Both reports must cover the same task set.
nlohmann::ordered_json compare_runs(const nlohmann::json& heu, const nlohmann::json& pred);

// Copy without the volatile blocks (energy, meta); the byte-reproducible part.
nlohmann::ordered_json strip_volatile(const nlohmann::json& report);

}  // namespace ilash
