#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "ilash/dataset.hpp"
#include "ilash/model_graph.hpp"
#include "ilash/tensor.hpp"

namespace ilash {

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 50;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::uint64_t seed = 0;
  // When false (default), heuristic-search candidate training freezes the
  // already-trained shared layers and only updates the replicated branch.
  bool train_shared_layers = false;
};

struct TrainResult {
  ModelGraph model;
  std::vector<double> loss_history;  // mean joint training loss per epoch
};

// Per-task minibatch: inputs [n,h,w,c], targets [n,t].
using TaskBatch = std::map<TaskId, std::pair<const Tensor*, const Tensor*>>;

// Head outputs for one task: [n, num_outputs], post-activation.
Tensor forward(const ModelGraph& model, TaskId task, const Tensor& inputs);

// Sum of per-task losses over the batch (cross-entropy or mse per task).
double compute_loss(const ModelGraph& model, const TaskBatch& batch);

// Analytic parameter gradients of compute_loss. When `trainable` is given,
// backpropagation stops below the shallowest trainable layer on each path.
std::map<LayerId, ParamBlock> compute_gradients(const ModelGraph& model,
                                                const TaskBatch& batch,
                                                const std::set<LayerId>* trainable = nullptr,
                                                double* loss_out = nullptr);

// Minibatch gradient descent on the summed loss of every task present in
// `data`. `trainable` restricts the updated layers (nullptr trains all).
// Deterministic under a fixed config seed; throws on non-finite loss.
TrainResult train(const ModelGraph& model, const MultiTaskDataset& data,
                  const TrainConfig& cfg, const std::set<LayerId>* trainable = nullptr);

// metrics::task_score of the model on one task over a split.
double score(const ModelGraph& model, const MultiTaskDataset& data, Split split,
             TaskId task);

// Training/evaluation backend used by the search algorithms. The public
// wrappers count calls so searches can report exact budgets.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  ModelGraph train(const ModelGraph& m, const MultiTaskDataset& d, const TrainConfig& c,
                   const std::set<LayerId>* trainable = nullptr) {
    ++train_calls_;
    return do_train(m, d, c, trainable);
  }
  double score(const ModelGraph& m, const MultiTaskDataset& d, Split s, TaskId t) {
    ++score_calls_;
    return do_score(m, d, s, t);
  }

  int train_calls() const { return train_calls_.load(); }
  int score_calls() const { return score_calls_.load(); }
  void reset_counters() {
    train_calls_ = 0;
    score_calls_ = 0;
  }

 private:
  virtual ModelGraph do_train(const ModelGraph&, const MultiTaskDataset&,
                              const TrainConfig&, const std::set<LayerId>*) = 0;
  virtual double do_score(const ModelGraph&, const MultiTaskDataset&, Split, TaskId) = 0;

  std::atomic<int> train_calls_{0};
  std::atomic<int> score_calls_{0};
};

// Real gradient-descent backend.
class TrainingEvaluator : public Evaluator {
 private:
  ModelGraph do_train(const ModelGraph& m, const MultiTaskDataset& d, const TrainConfig& c,
                      const std::set<LayerId>* trainable) override {
    return ilash::train(m, d, c, trainable).model;
  }
  double do_score(const ModelGraph& m, const MultiTaskDataset& d, Split s,
                  TaskId t) override {
    return ilash::score(m, d, s, t);
  }
};

// Deterministic test backend: training is a no-op and scores come from a
// (task, branch depth) table. The backbone task scores under depth -1.
class ReplayEvaluator : public Evaluator {
 public:
  using Table = std::map<std::pair<TaskId, int>, double>;
  explicit ReplayEvaluator(Table table) : table_(std::move(table)) {}

 private:
  ModelGraph do_train(const ModelGraph& m, const MultiTaskDataset&, const TrainConfig&,
                      const std::set<LayerId>*) override {
    return m;
  }
  double do_score(const ModelGraph& m, const MultiTaskDataset&, Split,
                  TaskId task) override;

  Table table_;
};

}  // namespace ilash
