#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace ilash {

using LayerId = int;
using TaskId = int;

enum class LayerKind { Conv2D, DepthwiseConv2D, Dense, Pool, Flatten, Activation, Output };
enum class Padding { Valid, Same };
enum class Activation { Relu, Softmax, Sigmoid, Linear };
enum class TaskKind { Classification, Regression };
enum class LossKind { CrossEntropy, Mse };
enum class MetricKind { Accuracy, NegMae };

const char* to_string(LayerKind k);
const char* to_string(Padding p);
const char* to_string(Activation a);
const char* to_string(TaskKind k);
const char* to_string(LossKind l);
const char* to_string(MetricKind m);

struct LayerSpec {
  LayerId id = -1;
  LayerKind kind = LayerKind::Dense;
  int kernel_size = 0;  // Conv2D / DepthwiseConv2D only
  int stride = 0;       // Conv2D / DepthwiseConv2D only
  Padding padding = Padding::Same;
  int units_or_channels = 0;
  Activation activation = Activation::Linear;

  bool is_conv() const {
    return kind == LayerKind::Conv2D || kind == LayerKind::DepthwiseConv2D;
  }
};

// Template helpers.
LayerSpec conv2d(int kernel, int stride, Padding pad, int channels,
                 Activation act = Activation::Relu);
LayerSpec depthwise_conv2d(int kernel, int stride, Padding pad,
                           Activation act = Activation::Relu);
LayerSpec dense(int units, Activation act = Activation::Relu);
LayerSpec max_pool();
LayerSpec flatten();
LayerSpec activation(Activation act);

struct TaskInfo {
  TaskId task_id = 0;
  TaskKind kind = TaskKind::Classification;
  int num_outputs = 1;
  int input_h = 0;
  int input_w = 0;
  int input_c = 0;
  LossKind loss = LossKind::CrossEntropy;
  MetricKind metric = MetricKind::Accuracy;
};

TaskInfo classification_task(TaskId id, int num_classes, int h, int w, int c);
TaskInfo regression_task(TaskId id, int num_outputs, int h, int w, int c);

// Throws std::invalid_argument when the task violates its invariants
// (classification pairs with cross-entropy, regression with mse).
void validate_task(const TaskInfo& task);

// Output shape of a layer: either a (h, w, c) volume or a flat width.
struct TensorDims {
  int h = 0, w = 0, c = 0;
  int units = 0;
  bool flat = false;

  std::int64_t count() const {
    return flat ? units : static_cast<std::int64_t>(h) * w * c;
  }
  bool operator==(const TensorDims&) const = default;
};

struct ParamBlock {
  std::vector<double> w;
  std::vector<double> b;
  bool empty() const { return w.empty() && b.empty(); }
};

struct GraphStats {
  std::int64_t param_count = 0;
  int layer_count = 0;
  std::map<TaskId, int> shared_layer_count;  // per task: layers on its path used by >1 task
  std::int64_t flops_estimate = 0;
};

struct CandidateSet {
  std::vector<LayerId> ids;          // ascending depth order
  bool inverted_bounds = false;      // ll > ul was passed
};

// Unbounded upper limit for candidate_layers.
inline constexpr int kNoUpperLimit = 1 << 30;

// Directed acyclic model of a layer-shared multi-task network. A shared layer
// appears once regardless of how many tasks consume it; immutable after
// construction (branch/training produce new graphs).
class ModelGraph {
 public:
  ModelGraph() = default;

  // Linear chain: template layers plus one output head for the first task.
  // The template must be non-empty and must not contain Output layers.
  static ModelGraph build_base(const std::vector<LayerSpec>& template_layers,
                               const TaskInfo& task, std::uint64_t seed = 0);

  // New graph sharing every layer up to `at_layer`; the owning task's layers
  // strictly after it (up to the second-to-last layer of its path) are
  // replicated with fresh parameters, then a new head for `task` is attached.
  ModelGraph branch(LayerId at_layer, const TaskInfo& task) const;

  // Shareable (non-Output) layers whose depth index lies in [ll, ul].
  CandidateSet candidate_layers(int ll, int ul) const;

  // Deterministic enumeration of all unique layers: first-task backbone
  // first, then branch segments in ascending task-id order.
  const std::vector<LayerId>& depth_order() const { return depth_order_; }
  int depth_of(LayerId id) const;
  LayerId layer_at_depth(int idx) const;
  int layer_count() const { return static_cast<int>(layers_.size()); }
  // Count of non-Output unique layers (the goodness denominator).
  int shareable_layer_count() const;
  // 1-based rank of the layer at depth `idx` among non-Output layers.
  int shareable_rank(int idx) const;

  bool has_layer(LayerId id) const { return layers_.count(id) != 0; }
  const LayerSpec& layer(LayerId id) const;
  const std::map<LayerId, LayerSpec>& layers() const { return layers_; }
  const std::map<LayerId, std::vector<LayerId>>& children() const { return children_; }
  // -1 for the root layer.
  LayerId parent_of(LayerId id) const;

  const std::map<TaskId, LayerId>& heads() const { return heads_; }
  const std::map<TaskId, LayerId>& branch_points() const { return branch_points_; }
  const std::vector<TaskInfo>& tasks() const { return tasks_; }
  const TaskInfo& task(TaskId id) const;
  bool has_task(TaskId id) const;
  const std::vector<LayerId>& trunk_order() const { return trunk_order_; }

  // Layers from the input layer to the task's head, inclusive.
  std::vector<LayerId> path_to_head(TaskId id) const;

  const TensorDims& input_dims() const { return input_dims_; }
  const TensorDims& output_dims(LayerId id) const;

  const ParamBlock& params(LayerId id) const;
  ParamBlock& params_mut(LayerId id);

  GraphStats stats() const;
  std::uint64_t seed() const { return seed_; }

  nlohmann::ordered_json to_json() const;
  static ModelGraph from_json(const nlohmann::json& j);

 private:
  LayerId add_layer(LayerSpec spec, LayerId parent);
  void init_params(LayerId id);
  void rebuild_depth_order();
  std::int64_t layer_param_count(LayerId id) const;
  std::int64_t layer_flops(LayerId id) const;

  std::map<LayerId, LayerSpec> layers_;
  std::map<LayerId, std::vector<LayerId>> children_;
  std::map<LayerId, LayerId> parent_;
  std::map<LayerId, ParamBlock> params_;
  std::map<LayerId, TensorDims> out_dims_;
  std::vector<LayerId> trunk_order_;
  std::vector<LayerId> depth_order_;
  std::map<TaskId, LayerId> heads_;
  std::map<TaskId, LayerId> branch_points_;
  std::vector<TaskInfo> tasks_;
  TensorDims input_dims_;
  LayerId root_ = -1;
  LayerId next_id_ = 0;
  std::uint64_t seed_ = 0;
};

// One independent chain per task.
std::vector<ModelGraph> build_no_sharing(const std::vector<LayerSpec>& template_layers,
                                         const std::vector<TaskInfo>& tasks,
                                         std::uint64_t seed = 0);

// Single trunk; every task past the first branches at the deepest shareable
// layer (head-only branches).
ModelGraph build_hard_sharing(const std::vector<LayerSpec>& template_layers,
                              const std::vector<TaskInfo>& tasks,
                              std::uint64_t seed = 0);

// Small convolutional backbone template (alternating pointwise/depthwise
// blocks with varied kernel sizes) suitable for h x w x c inputs. `depth`
// counts template layers before the head.
std::vector<LayerSpec> make_backbone_template(int h, int w, int c, int depth);

}  // namespace ilash
