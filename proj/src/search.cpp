#include "ilash/search.hpp"

#include <algorithm>
#include <set>
#include <thread>

#include "ilash/metrics.hpp"
#include "ilash/util.hpp"

namespace ilash {

namespace {

void validate_search_inputs(const MultiTaskDataset& data, const std::vector<TaskInfo>& tasks,
                            const SearchParams& params) {
  if (tasks.empty()) throw SearchError("search: no tasks given");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    validate_task(tasks[i]);
    if (i > 0 && tasks[i].task_id <= tasks[i - 1].task_id) {
      throw SearchError("search: task ids must be strictly increasing in search order");
    }
    if (!data.tasks.count(tasks[i].task_id)) {
      throw SearchError("search: dataset has no data for task " +
                        std::to_string(tasks[i].task_id));
    }
  }
  if (params.ll < 0) throw SearchError("search: ll must be >= 0");
  if (params.threads < 1) throw SearchError("search: threads must be >= 1");
}

int resolve_upper_limit(const SearchParams& params, const ModelGraph& base) {
  if (params.ul >= 0) return params.ul;
  return static_cast<int>(base.trunk_order().size()) - 2;
}

CandidateSet candidates_or_throw(const ModelGraph& model, int ll, int ul, TaskId task) {
  CandidateSet cands = model.candidate_layers(ll, ul);
  if (cands.ids.empty()) {
    throw SearchError("no branch candidates in [" + std::to_string(ll) + ", " +
                      std::to_string(ul) + "] for task " + std::to_string(task));
  }
  return cands;
}

// Alg-1-style selection: strict improvement over an initial best of 0, so
// equal scores never displace the incumbent. When nothing clears 0 the
// deepest candidate wins, flagged as a fallback.
std::size_t select_best(const std::vector<CandidateEval>& evals, bool* fallback) {
  double bgn = 0.0;
  std::ptrdiff_t best = -1;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    if (evals[i].gn > bgn) {
      bgn = evals[i].gn;
      best = static_cast<std::ptrdiff_t>(i);
    }
  }
  *fallback = best < 0;
  return best < 0 ? evals.size() - 1 : static_cast<std::size_t>(best);
}

}  // namespace

HeuResult ilash_heu(const std::vector<LayerSpec>& base_template,
                    const MultiTaskDataset& data, const std::vector<TaskInfo>& tasks,
                    const SearchParams& params, Evaluator& evaluator) {
  validate_search_inputs(data, tasks, params);

  HeuResult result;
  const ModelGraph base = ModelGraph::build_base(base_template, tasks.front(), params.seed);
  const int ul = resolve_upper_limit(params, base);

  result.model = evaluator.train(base, data.task_view(tasks.front().task_id), params.train);
  result.trainer_calls = 1;

  for (std::size_t k = 1; k < tasks.size(); ++k) {
    const TaskInfo& task = tasks[k];
    const ModelGraph snapshot = result.model;
    const CandidateSet cands = candidates_or_throw(snapshot, params.ll, ul, task.task_id);
    const MultiTaskDataset task_data = data.task_view(task.task_id);
    const int lr_total = snapshot.shareable_layer_count();

    struct CandidateOutcome {
      CandidateEval eval;
      ModelGraph trained;
      std::string error;
    };
    std::vector<CandidateOutcome> outcomes(cands.ids.size());

    auto evaluate_one = [&](std::size_t i) {
      CandidateOutcome& out = outcomes[i];
      const LayerId at = cands.ids[i];
      const int depth = snapshot.depth_of(at);
      out.eval.depth = depth;
      try {
        ModelGraph branched = snapshot.branch(at, task);
        std::set<LayerId> fresh;
        for (const auto& [id, spec] : branched.layers()) {
          if (!snapshot.has_layer(id)) fresh.insert(id);
        }
        TrainConfig cfg = params.train;
        cfg.seed = mix_seed(params.train.seed, static_cast<std::uint64_t>(task.task_id),
                            static_cast<std::uint64_t>(depth));
        out.trained = evaluator.train(branched, task_data, cfg,
                                      cfg.train_shared_layers ? nullptr : &fresh);
        out.eval.acc = evaluator.score(out.trained, task_data, Split::Val, task.task_id);
        GoodnessInput gin{out.eval.acc, snapshot.shareable_rank(depth), lr_total};
        out.eval.gn = std::clamp(goodness(gin, {params.g_th}), 0.0, 1.0);
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    };

    if (params.threads <= 1 || cands.ids.size() <= 1) {
      for (std::size_t i = 0; i < cands.ids.size(); ++i) evaluate_one(i);
    } else {
      const std::size_t workers =
          std::min<std::size_t>(static_cast<std::size_t>(params.threads), cands.ids.size());
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t i = w; i < cands.ids.size(); i += workers) evaluate_one(i);
        });
      }
      for (auto& t : pool) t.join();
    }

    std::vector<CandidateEval> evals;
    evals.reserve(outcomes.size());
    for (const CandidateOutcome& out : outcomes) {
      if (!out.error.empty()) {
        throw SearchError("evaluator failed for task " + std::to_string(task.task_id) +
                          " at depth " + std::to_string(out.eval.depth) + ": " + out.error);
      }
      evals.push_back(out.eval);
    }
    result.trainer_calls += static_cast<int>(evals.size());
    result.score_calls += static_cast<int>(evals.size());

    bool fallback = false;
    const std::size_t best = select_best(evals, &fallback);
    evals[best].chosen = true;
    result.model = outcomes[best].trained;

    TaskTrace trace;
    trace.task = task.task_id;
    trace.chosen_depth = evals[best].depth;
    trace.best_gn = evals[best].gn;
    trace.fallback = fallback;
    trace.candidates = evals;
    result.trace.push_back(std::move(trace));

    for (const CandidateEval& e : evals) {
      result.dataset.push_back(make_record(task, snapshot, e.depth, e.gn));
    }
  }
  return result;
}

PredResult ilash_pred(const std::vector<LayerSpec>& base_template,
                      const SurrogateModel& surrogate, const MultiTaskDataset& data,
                      const std::vector<TaskInfo>& tasks, const SearchParams& params,
                      Evaluator& trainer) {
  validate_search_inputs(data, tasks, params);

  PredResult result;
  result.model = ModelGraph::build_base(base_template, tasks.front(), params.seed);
  const int ul = resolve_upper_limit(params, result.model);

  for (std::size_t k = 1; k < tasks.size(); ++k) {
    const TaskInfo& task = tasks[k];
    const CandidateSet cands =
        candidates_or_throw(result.model, params.ll, ul, task.task_id);
    const TaskFeatureVector feats = task_features(task);

    std::vector<CandidateEval> evals;
    evals.reserve(cands.ids.size());
    for (LayerId at : cands.ids) {
      CandidateEval e;
      e.depth = result.model.depth_of(at);
      const EncodingVector enc = encode(result.model, e.depth);
      std::vector<double> x(feats.v.begin(), feats.v.end());
      x.insert(x.end(), enc.v.begin(), enc.v.end());
      try {
        e.gn = surrogate.predict(x);
      } catch (const std::exception& err) {
        throw SearchError("surrogate failed for task " + std::to_string(task.task_id) +
                          " at depth " + std::to_string(e.depth) + ": " + err.what());
      }
      ++result.surrogate_calls;
      evals.push_back(e);
    }

    bool fallback = false;
    const std::size_t best = select_best(evals, &fallback);
    evals[best].chosen = true;
    result.model = result.model.branch(cands.ids[best], task);

    TaskTrace trace;
    trace.task = task.task_id;
    trace.chosen_depth = evals[best].depth;
    trace.best_gn = evals[best].gn;
    trace.fallback = fallback;
    trace.candidates = std::move(evals);
    result.trace.push_back(std::move(trace));
  }

  // One joint training pass over the searched tasks, whole network trainable.
  MultiTaskDataset joint;
  joint.splits = data.splits;
  joint.samples = data.samples;
  joint.seed = data.seed;
  for (const TaskInfo& t : tasks) joint.tasks.emplace(t.task_id, data.tasks.at(t.task_id));
  result.model = trainer.train(result.model, joint, params.train);
  result.trainer_calls = 1;
  return result;
}

}  // namespace ilash
