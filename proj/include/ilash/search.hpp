#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ilash/dataset.hpp"
#include "ilash/encoding.hpp"
#include "ilash/model_graph.hpp"
#include "ilash/surrogate.hpp"
#include "ilash/trainer.hpp"

namespace ilash {

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SearchParams {
  int ll = 2;
  int ul = -1;  // -1 resolves to trunk length - 2 once the base model exists
  double g_th = 0.2;
  TrainConfig train;
  std::uint64_t seed = 0;  // graph/parameter init seed
  int threads = 1;         // concurrent candidate evaluations (heuristic search)
};

struct CandidateEval {
  int depth = 0;
  double gn = 0.0;
  double acc = 0.0;  // validation score (heuristic search only)
  bool chosen = false;
};

struct TaskTrace {
  TaskId task = 0;
  int chosen_depth = -1;
  double best_gn = 0.0;
  bool fallback = false;  // nothing beat the initial best; took the deepest candidate
  std::vector<CandidateEval> candidates;
};

struct HeuResult {
  ModelGraph model;
  std::vector<BranchRecord> dataset;
  std::vector<TaskTrace> trace;
  int trainer_calls = 0;
  int score_calls = 0;
};

// Exhaustive search: trains the base model on the first task, then for each
// later task trains and scores a branch candidate at every depth in
// [ll, ul], keeping the best goodness (strict improvement, first best wins)
// and harvesting one record per candidate.
HeuResult ilash_heu(const std::vector<LayerSpec>& base_template,
                    const MultiTaskDataset& data, const std::vector<TaskInfo>& tasks,
                    const SearchParams& params, Evaluator& evaluator);

struct PredResult {
  ModelGraph model;
  std::vector<TaskTrace> trace;
  int surrogate_calls = 0;
  int trainer_calls = 0;
};

// Surrogate-guided search: no candidate training. Each later task branches at
// the depth with the best predicted goodness; the assembled model is trained
// jointly on every task exactly once at the end.
PredResult ilash_pred(const std::vector<LayerSpec>& base_template,
                      const SurrogateModel& surrogate, const MultiTaskDataset& data,
                      const std::vector<TaskInfo>& tasks, const SearchParams& params,
                      Evaluator& trainer);

}  // namespace ilash
