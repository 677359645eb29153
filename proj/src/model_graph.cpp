#include "ilash/model_graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "ilash/util.hpp"

namespace ilash {

const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Conv2D: return "conv2d";
    case LayerKind::DepthwiseConv2D: return "depthwise_conv2d";
    case LayerKind::Dense: return "dense";
    case LayerKind::Pool: return "pool";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Activation: return "activation";
    case LayerKind::Output: return "output";
  }
  return "?";
}

const char* to_string(Padding p) {
  return p == Padding::Valid ? "valid" : "same";
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Softmax: return "softmax";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Linear: return "linear";
  }
  return "?";
}

const char* to_string(TaskKind k) {
  return k == TaskKind::Classification ? "classification" : "regression";
}

const char* to_string(LossKind l) {
  return l == LossKind::CrossEntropy ? "cross_entropy" : "mse";
}

const char* to_string(MetricKind m) {
  return m == MetricKind::Accuracy ? "accuracy" : "neg_mae";
}

namespace {

template <typename E>
E enum_from_string(const std::string& s, std::initializer_list<E> values,
                   const char* what) {
  for (E v : values) {
    if (s == to_string(v)) return v;
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": " + s);
}

LayerKind layer_kind_from_string(const std::string& s) {
  return enum_from_string(s,
                          {LayerKind::Conv2D, LayerKind::DepthwiseConv2D, LayerKind::Dense,
                           LayerKind::Pool, LayerKind::Flatten, LayerKind::Activation,
                           LayerKind::Output},
                          "layer kind");
}

Padding padding_from_string(const std::string& s) {
  return enum_from_string(s, {Padding::Valid, Padding::Same}, "padding");
}

Activation activation_from_string(const std::string& s) {
  return enum_from_string(
      s, {Activation::Relu, Activation::Softmax, Activation::Sigmoid, Activation::Linear},
      "activation");
}

TaskKind task_kind_from_string(const std::string& s) {
  return enum_from_string(s, {TaskKind::Classification, TaskKind::Regression}, "task kind");
}

LossKind loss_from_string(const std::string& s) {
  return enum_from_string(s, {LossKind::CrossEntropy, LossKind::Mse}, "loss");
}

MetricKind metric_from_string(const std::string& s) {
  return enum_from_string(s, {MetricKind::Accuracy, MetricKind::NegMae}, "metric");
}

void validate_layer_spec(const LayerSpec& s) {
  if (s.is_conv()) {
    if (s.kernel_size < 1 || s.stride < 1) {
      throw std::invalid_argument("conv layers need kernel_size >= 1 and stride >= 1");
    }
  } else {
    if (s.kernel_size != 0 || s.stride != 0) {
      throw std::invalid_argument("kernel_size/stride are conv-only fields");
    }
  }
  if ((s.kind == LayerKind::Conv2D || s.kind == LayerKind::Dense ||
       s.kind == LayerKind::Output) &&
      s.units_or_channels < 1) {
    throw std::invalid_argument("units_or_channels must be positive for " +
                                std::string(to_string(s.kind)));
  }
}

int conv_out_size(int in, int kernel, int stride, Padding pad) {
  if (pad == Padding::Same) {
    return (in + stride - 1) / stride;
  }
  if (in < kernel) {
    throw std::invalid_argument("valid-padding conv kernel larger than input");
  }
  return (in - kernel) / stride + 1;
}

TensorDims infer_dims(const LayerSpec& s, const TensorDims& in) {
  TensorDims out;
  switch (s.kind) {
    case LayerKind::Conv2D:
      if (in.flat) throw std::invalid_argument("conv2d on flat input");
      out.h = conv_out_size(in.h, s.kernel_size, s.stride, s.padding);
      out.w = conv_out_size(in.w, s.kernel_size, s.stride, s.padding);
      out.c = s.units_or_channels;
      return out;
    case LayerKind::DepthwiseConv2D:
      if (in.flat) throw std::invalid_argument("depthwise conv on flat input");
      out.h = conv_out_size(in.h, s.kernel_size, s.stride, s.padding);
      out.w = conv_out_size(in.w, s.kernel_size, s.stride, s.padding);
      out.c = in.c;
      return out;
    case LayerKind::Pool:
      if (in.flat) throw std::invalid_argument("pool on flat input");
      if (in.h < 2 || in.w < 2) throw std::invalid_argument("pool input smaller than 2x2");
      out.h = (in.h - 2) / 2 + 1;
      out.w = (in.w - 2) / 2 + 1;
      out.c = in.c;
      return out;
    case LayerKind::Flatten:
      if (in.flat) throw std::invalid_argument("flatten on flat input");
      out.flat = true;
      out.units = in.h * in.w * in.c;
      return out;
    case LayerKind::Dense:
      if (!in.flat) throw std::invalid_argument("dense needs a flat input (add flatten)");
      out.flat = true;
      out.units = s.units_or_channels;
      return out;
    case LayerKind::Activation:
      return in;
    case LayerKind::Output:
      // Output heads flatten implicitly.
      out.flat = true;
      out.units = s.units_or_channels;
      return out;
  }
  throw std::logic_error("unreachable layer kind");
}

Activation head_activation(const TaskInfo& task) {
  if (task.kind == TaskKind::Regression) return Activation::Linear;
  return task.num_outputs >= 2 ? Activation::Softmax : Activation::Sigmoid;
}

}  // namespace

LayerSpec conv2d(int kernel, int stride, Padding pad, int channels, Activation act) {
  LayerSpec s;
  s.kind = LayerKind::Conv2D;
  s.kernel_size = kernel;
  s.stride = stride;
  s.padding = pad;
  s.units_or_channels = channels;
  s.activation = act;
  return s;
}

LayerSpec depthwise_conv2d(int kernel, int stride, Padding pad, Activation act) {
  LayerSpec s;
  s.kind = LayerKind::DepthwiseConv2D;
  s.kernel_size = kernel;
  s.stride = stride;
  s.padding = pad;
  s.activation = act;
  return s;
}

LayerSpec dense(int units, Activation act) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.units_or_channels = units;
  s.activation = act;
  return s;
}

LayerSpec max_pool() {
  LayerSpec s;
  s.kind = LayerKind::Pool;
  return s;
}

LayerSpec flatten() {
  LayerSpec s;
  s.kind = LayerKind::Flatten;
  return s;
}

LayerSpec activation(Activation act) {
  LayerSpec s;
  s.kind = LayerKind::Activation;
  s.activation = act;
  return s;
}

TaskInfo classification_task(TaskId id, int num_classes, int h, int w, int c) {
  TaskInfo t;
  t.task_id = id;
  t.kind = TaskKind::Classification;
  t.num_outputs = num_classes;
  t.input_h = h;
  t.input_w = w;
  t.input_c = c;
  t.loss = LossKind::CrossEntropy;
  t.metric = MetricKind::Accuracy;
  return t;
}

TaskInfo regression_task(TaskId id, int num_outputs, int h, int w, int c) {
  TaskInfo t;
  t.task_id = id;
  t.kind = TaskKind::Regression;
  t.num_outputs = num_outputs;
  t.input_h = h;
  t.input_w = w;
  t.input_c = c;
  t.loss = LossKind::Mse;
  t.metric = MetricKind::NegMae;
  return t;
}

void validate_task(const TaskInfo& task) {
  if (task.num_outputs < 1) throw std::invalid_argument("task needs num_outputs >= 1");
  if (task.input_h < 1 || task.input_w < 1 || task.input_c < 1) {
    throw std::invalid_argument("task needs a positive input shape");
  }
  if (task.kind == TaskKind::Classification && task.loss != LossKind::CrossEntropy) {
    throw std::invalid_argument("classification tasks use cross_entropy loss");
  }
  if (task.kind == TaskKind::Regression && task.loss != LossKind::Mse) {
    throw std::invalid_argument("regression tasks use mse loss");
  }
}

LayerId ModelGraph::add_layer(LayerSpec spec, LayerId parent) {
  validate_layer_spec(spec);
  spec.id = next_id_++;
  const TensorDims& in = parent < 0 ? input_dims_ : out_dims_.at(parent);
  if (parent >= 0 && layers_.at(parent).kind == LayerKind::Output) {
    throw std::invalid_argument("output layers have no successors");
  }
  out_dims_[spec.id] = infer_dims(spec, in);
  layers_[spec.id] = spec;
  parent_[spec.id] = parent;
  if (parent >= 0) children_[parent].push_back(spec.id);
  if (parent < 0) root_ = spec.id;
  init_params(spec.id);
  return spec.id;
}

void ModelGraph::init_params(LayerId id) {
  const LayerSpec& s = layers_.at(id);
  LayerId p = parent_.at(id);
  const TensorDims& in = p < 0 ? input_dims_ : out_dims_.at(p);
  std::size_t nw = 0, nb = 0, fan_in = 0;
  switch (s.kind) {
    case LayerKind::Conv2D:
      fan_in = static_cast<std::size_t>(s.kernel_size) * s.kernel_size * in.c;
      nw = fan_in * s.units_or_channels;
      nb = s.units_or_channels;
      break;
    case LayerKind::DepthwiseConv2D:
      fan_in = static_cast<std::size_t>(s.kernel_size) * s.kernel_size;
      nw = fan_in * in.c;
      nb = in.c;
      break;
    case LayerKind::Dense:
      fan_in = static_cast<std::size_t>(in.units);
      nw = fan_in * s.units_or_channels;
      nb = s.units_or_channels;
      break;
    case LayerKind::Output:
      fan_in = static_cast<std::size_t>(in.count());
      nw = fan_in * s.units_or_channels;
      nb = s.units_or_channels;
      break;
    default:
      params_[id] = ParamBlock{};
      return;
  }
  ParamBlock block;
  block.w.resize(nw);
  block.b.assign(nb, 0.0);
  std::mt19937_64 rng(mix_seed(seed_, static_cast<std::uint64_t>(id), 0x1a5e));
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : block.w) v = dist(rng);
  params_[id] = std::move(block);
}

void ModelGraph::rebuild_depth_order() {
  depth_order_ = trunk_order_;
  std::set<LayerId> seen(trunk_order_.begin(), trunk_order_.end());
  for (const auto& [tid, head] : heads_) {
    if (!branch_points_.count(tid)) continue;  // backbone owner already enumerated
    for (LayerId id : path_to_head(tid)) {
      if (seen.insert(id).second) depth_order_.push_back(id);
    }
  }
}

ModelGraph ModelGraph::build_base(const std::vector<LayerSpec>& template_layers,
                                  const TaskInfo& task, std::uint64_t seed) {
  validate_task(task);
  if (template_layers.empty()) {
    throw std::invalid_argument("build_base: empty template");
  }
  for (const LayerSpec& s : template_layers) {
    if (s.kind == LayerKind::Output) {
      throw std::invalid_argument("build_base: template must not contain output layers");
    }
  }
  ModelGraph g;
  g.seed_ = seed;
  g.input_dims_.h = task.input_h;
  g.input_dims_.w = task.input_w;
  g.input_dims_.c = task.input_c;
  LayerId prev = -1;
  for (const LayerSpec& s : template_layers) {
    prev = g.add_layer(s, prev);
    g.trunk_order_.push_back(prev);
  }
  LayerSpec head;
  head.kind = LayerKind::Output;
  head.units_or_channels = task.num_outputs;
  head.activation = head_activation(task);
  LayerId head_id = g.add_layer(head, prev);
  g.trunk_order_.push_back(head_id);
  g.heads_[task.task_id] = head_id;
  g.tasks_.push_back(task);
  g.rebuild_depth_order();
  return g;
}

ModelGraph ModelGraph::branch(LayerId at_layer, const TaskInfo& task) const {
  validate_task(task);
  if (!has_layer(at_layer)) {
    throw std::out_of_range("branch: unknown layer id " + std::to_string(at_layer));
  }
  if (layer(at_layer).kind == LayerKind::Output) {
    throw std::invalid_argument("branch: output heads are not branch sources");
  }
  if (has_task(task.task_id)) {
    throw std::invalid_argument("branch: duplicate task id " + std::to_string(task.task_id));
  }
  TensorDims in;
  in.h = task.input_h;
  in.w = task.input_w;
  in.c = task.input_c;
  if (!(in == input_dims_)) {
    throw std::invalid_argument("branch: task input shape differs from the model input");
  }

  // The replicated suffix follows the path of the lowest-id task that owns
  // the branch layer.
  std::vector<LayerId> owner_path;
  for (const auto& [tid, head] : heads_) {
    std::vector<LayerId> path = path_to_head(tid);
    if (std::find(path.begin(), path.end(), at_layer) != path.end()) {
      owner_path = std::move(path);
      break;
    }
  }
  if (owner_path.empty()) {
    throw std::logic_error("branch: layer not on any task path");
  }

  ModelGraph g = *this;
  auto it = std::find(owner_path.begin(), owner_path.end(), at_layer);
  LayerId prev = at_layer;
  for (auto suffix = it + 1; suffix + 1 < owner_path.end(); ++suffix) {
    LayerSpec copy = layers_.at(*suffix);
    prev = g.add_layer(copy, prev);
  }
  LayerSpec head;
  head.kind = LayerKind::Output;
  head.units_or_channels = task.num_outputs;
  head.activation = head_activation(task);
  LayerId head_id = g.add_layer(head, prev);
  g.heads_[task.task_id] = head_id;
  g.branch_points_[task.task_id] = at_layer;
  g.tasks_.push_back(task);
  g.rebuild_depth_order();
  return g;
}

CandidateSet ModelGraph::candidate_layers(int ll, int ul) const {
  if (ll < 0) throw std::invalid_argument("candidate_layers: ll must be >= 0");
  CandidateSet out;
  if (ll > ul) {
    out.inverted_bounds = true;
    return out;
  }
  const int last = static_cast<int>(depth_order_.size()) - 1;
  for (int idx = ll; idx <= std::min(ul, last); ++idx) {
    LayerId id = depth_order_[static_cast<std::size_t>(idx)];
    if (layers_.at(id).kind != LayerKind::Output) out.ids.push_back(id);
  }
  return out;
}

int ModelGraph::depth_of(LayerId id) const {
  auto it = std::find(depth_order_.begin(), depth_order_.end(), id);
  if (it == depth_order_.end()) {
    throw std::out_of_range("depth_of: unknown layer id " + std::to_string(id));
  }
  return static_cast<int>(it - depth_order_.begin());
}

LayerId ModelGraph::layer_at_depth(int idx) const {
  if (idx < 0 || idx >= static_cast<int>(depth_order_.size())) {
    throw std::out_of_range("layer_at_depth: index " + std::to_string(idx) +
                            " outside [0, " + std::to_string(depth_order_.size()) + ")");
  }
  return depth_order_[static_cast<std::size_t>(idx)];
}

int ModelGraph::shareable_layer_count() const {
  int n = 0;
  for (const auto& [id, s] : layers_) {
    if (s.kind != LayerKind::Output) ++n;
  }
  return n;
}

int ModelGraph::shareable_rank(int idx) const {
  if (idx < 0 || idx >= static_cast<int>(depth_order_.size())) {
    throw std::out_of_range("shareable_rank: depth index out of range");
  }
  int rank = 0;
  for (int i = 0; i <= idx; ++i) {
    if (layers_.at(depth_order_[static_cast<std::size_t>(i)]).kind != LayerKind::Output) {
      ++rank;
    }
  }
  return rank;
}

const LayerSpec& ModelGraph::layer(LayerId id) const {
  auto it = layers_.find(id);
  if (it == layers_.end()) {
    throw std::out_of_range("layer: unknown id " + std::to_string(id));
  }
  return it->second;
}

LayerId ModelGraph::parent_of(LayerId id) const {
  auto it = parent_.find(id);
  if (it == parent_.end()) {
    throw std::out_of_range("parent_of: unknown id " + std::to_string(id));
  }
  return it->second;
}

const TaskInfo& ModelGraph::task(TaskId id) const {
  for (const TaskInfo& t : tasks_) {
    if (t.task_id == id) return t;
  }
  throw std::out_of_range("task: unknown task id " + std::to_string(id));
}

bool ModelGraph::has_task(TaskId id) const {
  return std::any_of(tasks_.begin(), tasks_.end(),
                     [id](const TaskInfo& t) { return t.task_id == id; });
}

std::vector<LayerId> ModelGraph::path_to_head(TaskId id) const {
  auto it = heads_.find(id);
  if (it == heads_.end()) {
    throw std::out_of_range("path_to_head: unknown task id " + std::to_string(id));
  }
  std::vector<LayerId> path;
  for (LayerId cur = it->second; cur >= 0; cur = parent_.at(cur)) {
    path.push_back(cur);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

const TensorDims& ModelGraph::output_dims(LayerId id) const {
  auto it = out_dims_.find(id);
  if (it == out_dims_.end()) {
    throw std::out_of_range("output_dims: unknown id " + std::to_string(id));
  }
  return it->second;
}

const ParamBlock& ModelGraph::params(LayerId id) const {
  auto it = params_.find(id);
  if (it == params_.end()) {
    throw std::out_of_range("params: unknown id " + std::to_string(id));
  }
  return it->second;
}

ParamBlock& ModelGraph::params_mut(LayerId id) {
  auto it = params_.find(id);
  if (it == params_.end()) {
    throw std::out_of_range("params: unknown id " + std::to_string(id));
  }
  return it->second;
}

std::int64_t ModelGraph::layer_param_count(LayerId id) const {
  const ParamBlock& p = params_.at(id);
  return static_cast<std::int64_t>(p.w.size() + p.b.size());
}

std::int64_t ModelGraph::layer_flops(LayerId id) const {
  const LayerSpec& s = layers_.at(id);
  const TensorDims& out = out_dims_.at(id);
  LayerId parent = parent_.at(id);
  const TensorDims& in = parent < 0 ? input_dims_ : out_dims_.at(parent);
  switch (s.kind) {
    case LayerKind::Conv2D:
      return static_cast<std::int64_t>(out.h) * out.w * s.kernel_size * s.kernel_size *
             in.c * out.c;
    case LayerKind::DepthwiseConv2D:
      return static_cast<std::int64_t>(out.h) * out.w * s.kernel_size * s.kernel_size * out.c;
    case LayerKind::Dense:
    case LayerKind::Output:
      return in.count() * out.units;
    case LayerKind::Pool:
      return out.count() * 4;
    case LayerKind::Flatten:
    case LayerKind::Activation:
      return out.count();
  }
  return 0;
}

GraphStats ModelGraph::stats() const {
  GraphStats st;
  st.layer_count = static_cast<int>(layers_.size());
  for (const auto& [id, spec] : layers_) {
    st.param_count += layer_param_count(id);
    st.flops_estimate += layer_flops(id);
  }
  std::map<LayerId, int> usage;
  std::map<TaskId, std::vector<LayerId>> paths;
  for (const auto& [tid, head] : heads_) {
    paths[tid] = path_to_head(tid);
    for (LayerId id : paths[tid]) ++usage[id];
  }
  for (const auto& [tid, path] : paths) {
    int shared = 0;
    for (LayerId id : path) {
      if (usage[id] >= 2) ++shared;
    }
    st.shared_layer_count[tid] = shared;
  }
  return st;
}

nlohmann::ordered_json ModelGraph::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["seed"] = seed_;
  j["next_id"] = next_id_;
  j["input"] = {{"h", input_dims_.h}, {"w", input_dims_.w}, {"c", input_dims_.c}};
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& [id, s] : layers_) {
    nlohmann::ordered_json l;
    l["id"] = id;
    l["kind"] = to_string(s.kind);
    if (s.is_conv()) {
      l["kernel_size"] = s.kernel_size;
      l["stride"] = s.stride;
      l["padding"] = to_string(s.padding);
    }
    l["units_or_channels"] = s.units_or_channels;
    l["activation"] = to_string(s.activation);
    layers.push_back(std::move(l));
  }
  j["layers"] = std::move(layers);
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& [parent, kids] : children_) {
    for (LayerId child : kids) edges.push_back({parent, child});
  }
  j["edges"] = std::move(edges);
  j["trunk_order"] = trunk_order_;
  nlohmann::ordered_json heads;
  for (const auto& [tid, head] : heads_) heads[std::to_string(tid)] = head;
  j["heads"] = std::move(heads);
  nlohmann::ordered_json bps;
  for (const auto& [tid, at] : branch_points_) bps[std::to_string(tid)] = at;
  j["branch_points"] = std::move(bps);
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  for (const TaskInfo& t : tasks_) {
    tasks.push_back({{"task_id", t.task_id},
                     {"kind", to_string(t.kind)},
                     {"num_outputs", t.num_outputs},
                     {"input_h", t.input_h},
                     {"input_w", t.input_w},
                     {"input_c", t.input_c},
                     {"loss", to_string(t.loss)},
                     {"metric", to_string(t.metric)}});
  }
  j["tasks"] = std::move(tasks);
  nlohmann::ordered_json params;
  for (const auto& [id, block] : params_) {
    if (block.empty()) continue;
    params[std::to_string(id)] = {{"w", block.w}, {"b", block.b}};
  }
  j["params"] = std::move(params);
  return j;
}

ModelGraph ModelGraph::from_json(const nlohmann::json& j) {
  ModelGraph g;
  g.seed_ = j.at("seed").get<std::uint64_t>();
  g.next_id_ = j.at("next_id").get<LayerId>();
  g.input_dims_.h = j.at("input").at("h").get<int>();
  g.input_dims_.w = j.at("input").at("w").get<int>();
  g.input_dims_.c = j.at("input").at("c").get<int>();
  for (const auto& l : j.at("layers")) {
    LayerSpec s;
    s.id = l.at("id").get<LayerId>();
    s.kind = layer_kind_from_string(l.at("kind").get<std::string>());
    if (l.contains("kernel_size")) {
      s.kernel_size = l.at("kernel_size").get<int>();
      s.stride = l.at("stride").get<int>();
      s.padding = padding_from_string(l.at("padding").get<std::string>());
    }
    s.units_or_channels = l.at("units_or_channels").get<int>();
    s.activation = activation_from_string(l.at("activation").get<std::string>());
    g.layers_[s.id] = s;
    g.parent_[s.id] = -1;
  }
  for (const auto& e : j.at("edges")) {
    LayerId parent = e.at(0).get<LayerId>();
    LayerId child = e.at(1).get<LayerId>();
    g.children_[parent].push_back(child);
    g.parent_[child] = parent;
  }
  for (const auto& [id, p] : g.parent_) {
    if (p < 0) g.root_ = id;
  }
  g.trunk_order_ = j.at("trunk_order").get<std::vector<LayerId>>();
  for (const auto& [key, val] : j.at("heads").items()) {
    g.heads_[std::stoi(key)] = val.get<LayerId>();
  }
  for (const auto& [key, val] : j.at("branch_points").items()) {
    g.branch_points_[std::stoi(key)] = val.get<LayerId>();
  }
  for (const auto& t : j.at("tasks")) {
    TaskInfo info;
    info.task_id = t.at("task_id").get<TaskId>();
    info.kind = task_kind_from_string(t.at("kind").get<std::string>());
    info.num_outputs = t.at("num_outputs").get<int>();
    info.input_h = t.at("input_h").get<int>();
    info.input_w = t.at("input_w").get<int>();
    info.input_c = t.at("input_c").get<int>();
    info.loss = loss_from_string(t.at("loss").get<std::string>());
    info.metric = metric_from_string(t.at("metric").get<std::string>());
    g.tasks_.push_back(info);
  }
  // Recompute output dims along parent chains.
  g.rebuild_depth_order();
  for (LayerId id : g.depth_order_) {
    LayerId p = g.parent_.at(id);
    const TensorDims& in = p < 0 ? g.input_dims_ : g.out_dims_.at(p);
    g.out_dims_[id] = infer_dims(g.layers_.at(id), in);
  }
  for (const auto& [id, spec] : g.layers_) {
    g.params_[id] = ParamBlock{};
  }
  if (j.contains("params")) {
    for (const auto& [key, val] : j.at("params").items()) {
      ParamBlock block;
      block.w = val.at("w").get<std::vector<double>>();
      block.b = val.at("b").get<std::vector<double>>();
      g.params_[std::stoi(key)] = std::move(block);
    }
  }
  return g;
}

std::vector<ModelGraph> build_no_sharing(const std::vector<LayerSpec>& template_layers,
                                         const std::vector<TaskInfo>& tasks,
                                         std::uint64_t seed) {
  if (tasks.empty()) throw std::invalid_argument("build_no_sharing: no tasks");
  std::vector<ModelGraph> graphs;
  graphs.reserve(tasks.size());
  for (const TaskInfo& t : tasks) {
    graphs.push_back(ModelGraph::build_base(
        template_layers, t, mix_seed(seed, static_cast<std::uint64_t>(t.task_id))));
  }
  return graphs;
}

ModelGraph build_hard_sharing(const std::vector<LayerSpec>& template_layers,
                              const std::vector<TaskInfo>& tasks, std::uint64_t seed) {
  if (tasks.empty()) throw std::invalid_argument("build_hard_sharing: no tasks");
  ModelGraph g = ModelGraph::build_base(template_layers, tasks.front(), seed);
  // Deepest shareable layer: the one right before the backbone head.
  const std::vector<LayerId>& trunk = g.trunk_order();
  LayerId deepest = trunk[trunk.size() - 2];
  for (std::size_t i = 1; i < tasks.size(); ++i) {
    g = g.branch(deepest, tasks[i]);
  }
  return g;
}

std::vector<LayerSpec> make_backbone_template(int h, int w, int c, int depth) {
  if (depth < 1) throw std::invalid_argument("make_backbone_template: depth must be >= 1");
  (void)h;
  (void)w;
  (void)c;
  std::vector<LayerSpec> layers;
  layers.push_back(conv2d(3, 1, Padding::Same, 8));
  int channels = 8;
  for (int i = 1; i < depth; ++i) {
    switch (i % 4) {
      case 1:
        layers.push_back(depthwise_conv2d(3, 1, Padding::Same));
        break;
      case 2:
        channels += 4;
        layers.push_back(conv2d(1, 1, Padding::Valid, channels));
        break;
      case 3:
        layers.push_back(depthwise_conv2d(5, 1, Padding::Same));
        break;
      default:
        layers.push_back(conv2d(1, 1, Padding::Same, channels));
        break;
    }
  }
  return layers;
}

}  // namespace ilash
