#include "ilash/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ilash/metrics.hpp"
#include "ilash/util.hpp"

namespace ilash {

namespace {

struct PadOffsets {
  int top = 0;
  int left = 0;
};

PadOffsets pad_offsets(const LayerSpec& s, int in_h, int in_w, int out_h, int out_w) {
  PadOffsets p;
  if (s.padding == Padding::Same) {
    const int pad_h = std::max((out_h - 1) * s.stride + s.kernel_size - in_h, 0);
    const int pad_w = std::max((out_w - 1) * s.stride + s.kernel_size - in_w, 0);
    p.top = pad_h / 2;
    p.left = pad_w / 2;
  }
  return p;
}

void apply_activation(Activation act, const Tensor& z, Tensor& out, int row_width) {
  out = z;
  switch (act) {
    case Activation::Linear:
      return;
    case Activation::Relu:
      for (double& v : out.data) v = v > 0.0 ? v : 0.0;
      return;
    case Activation::Sigmoid:
      for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
      return;
    case Activation::Softmax: {
      if (row_width <= 0) throw std::logic_error("softmax needs a row width");
      const std::size_t rows = out.data.size() / static_cast<std::size_t>(row_width);
      for (std::size_t r = 0; r < rows; ++r) {
        double* v = out.data.data() + r * static_cast<std::size_t>(row_width);
        const double mx = *std::max_element(v, v + row_width);
        double sum = 0.0;
        for (int i = 0; i < row_width; ++i) {
          v[i] = std::exp(v[i] - mx);
          sum += v[i];
        }
        for (int i = 0; i < row_width; ++i) v[i] /= sum;
      }
      return;
    }
  }
}

// Turns dL/da into dL/dz, in place.
void activation_backward(Activation act, const Tensor& z, const Tensor& a, Tensor& grad,
                         int row_width) {
  switch (act) {
    case Activation::Linear:
      return;
    case Activation::Relu:
      for (std::size_t i = 0; i < grad.data.size(); ++i) {
        if (z.data[i] <= 0.0) grad.data[i] = 0.0;
      }
      return;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < grad.data.size(); ++i) {
        grad.data[i] *= a.data[i] * (1.0 - a.data[i]);
      }
      return;
    case Activation::Softmax: {
      const std::size_t rows = grad.data.size() / static_cast<std::size_t>(row_width);
      for (std::size_t r = 0; r < rows; ++r) {
        double* g = grad.data.data() + r * static_cast<std::size_t>(row_width);
        const double* p = a.data.data() + r * static_cast<std::size_t>(row_width);
        double dot = 0.0;
        for (int i = 0; i < row_width; ++i) dot += g[i] * p[i];
        for (int i = 0; i < row_width; ++i) g[i] = p[i] * (g[i] - dot);
      }
      return;
    }
  }
}

std::vector<int> batch_shape(const TensorDims& d, int n) {
  if (d.flat) return {n, d.units};
  return {n, d.h, d.w, d.c};
}

struct LayerRun {
  Tensor z;                   // pre-activation cache
  Tensor out;                 // layer output
  std::vector<int> pool_src;  // winning source offset per pooled cell
};

struct PathRun {
  std::vector<LayerId> path;
  Tensor input;
  std::vector<LayerRun> runs;
};

void conv_forward(const LayerSpec& s, const ParamBlock& p, const Tensor& in,
                  const TensorDims& in_d, const TensorDims& out_d, Tensor& z) {
  const int n = in.shape[0];
  const bool depthwise = s.kind == LayerKind::DepthwiseConv2D;
  const int ic = in_d.c, oc = out_d.c, k = s.kernel_size;
  const PadOffsets pad = pad_offsets(s, in_d.h, in_d.w, out_d.h, out_d.w);
  z = Tensor(batch_shape(out_d, n));
  for (int b = 0; b < n; ++b) {
    const double* x = in.data.data() + static_cast<std::size_t>(b) * in_d.count();
    double* y = z.data.data() + static_cast<std::size_t>(b) * out_d.count();
    for (int oy = 0; oy < out_d.h; ++oy) {
      for (int ox = 0; ox < out_d.w; ++ox) {
        for (int co = 0; co < oc; ++co) {
          double acc = p.b[static_cast<std::size_t>(co)];
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s.stride + ky - pad.top;
            if (iy < 0 || iy >= in_d.h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s.stride + kx - pad.left;
              if (ix < 0 || ix >= in_d.w) continue;
              if (depthwise) {
                acc += x[(static_cast<std::size_t>(iy) * in_d.w + ix) * ic + co] *
                       p.w[(static_cast<std::size_t>(ky) * k + kx) * ic + co];
              } else {
                for (int ci = 0; ci < ic; ++ci) {
                  acc += x[(static_cast<std::size_t>(iy) * in_d.w + ix) * ic + ci] *
                         p.w[((static_cast<std::size_t>(ky) * k + kx) * ic + ci) * oc + co];
                }
              }
            }
          }
          y[(static_cast<std::size_t>(oy) * out_d.w + ox) * oc + co] = acc;
        }
      }
    }
  }
}

void conv_backward(const LayerSpec& s, const ParamBlock& p, const Tensor& in,
                   const TensorDims& in_d, const TensorDims& out_d, const Tensor& dz,
                   ParamBlock& grad, Tensor& din, bool want_din) {
  const int n = in.shape[0];
  const bool depthwise = s.kind == LayerKind::DepthwiseConv2D;
  const int ic = in_d.c, oc = out_d.c, k = s.kernel_size;
  const PadOffsets pad = pad_offsets(s, in_d.h, in_d.w, out_d.h, out_d.w);
  if (want_din) din = Tensor(batch_shape(in_d, n));
  for (int b = 0; b < n; ++b) {
    const double* x = in.data.data() + static_cast<std::size_t>(b) * in_d.count();
    const double* g = dz.data.data() + static_cast<std::size_t>(b) * out_d.count();
    double* dx =
        want_din ? din.data.data() + static_cast<std::size_t>(b) * in_d.count() : nullptr;
    for (int oy = 0; oy < out_d.h; ++oy) {
      for (int ox = 0; ox < out_d.w; ++ox) {
        for (int co = 0; co < oc; ++co) {
          const double gz = g[(static_cast<std::size_t>(oy) * out_d.w + ox) * oc + co];
          if (gz == 0.0) continue;
          grad.b[static_cast<std::size_t>(co)] += gz;
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s.stride + ky - pad.top;
            if (iy < 0 || iy >= in_d.h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s.stride + kx - pad.left;
              if (ix < 0 || ix >= in_d.w) continue;
              if (depthwise) {
                const std::size_t wi = (static_cast<std::size_t>(ky) * k + kx) * ic + co;
                const std::size_t xi = (static_cast<std::size_t>(iy) * in_d.w + ix) * ic + co;
                grad.w[wi] += x[xi] * gz;
                if (dx) dx[xi] += p.w[wi] * gz;
              } else {
                for (int ci = 0; ci < ic; ++ci) {
                  const std::size_t wi =
                      ((static_cast<std::size_t>(ky) * k + kx) * ic + ci) * oc + co;
                  const std::size_t xi =
                      (static_cast<std::size_t>(iy) * in_d.w + ix) * ic + ci;
                  grad.w[wi] += x[xi] * gz;
                  if (dx) dx[xi] += p.w[wi] * gz;
                }
              }
            }
          }
        }
      }
    }
  }
}

void dense_forward(const ParamBlock& p, const Tensor& in, int in_w, int out_w, Tensor& z,
                   int n) {
  z = Tensor({n, out_w});
  for (int b = 0; b < n; ++b) {
    const double* x = in.data.data() + static_cast<std::size_t>(b) * in_w;
    double* y = z.data.data() + static_cast<std::size_t>(b) * out_w;
    for (int o = 0; o < out_w; ++o) y[o] = p.b[static_cast<std::size_t>(o)];
    for (int i = 0; i < in_w; ++i) {
      const double xv = x[i];
      if (xv == 0.0) continue;
      const double* wr = p.w.data() + static_cast<std::size_t>(i) * out_w;
      for (int o = 0; o < out_w; ++o) y[o] += xv * wr[o];
    }
  }
}

void dense_backward(const ParamBlock& p, const Tensor& in, int in_w, int out_w,
                    const Tensor& dz, ParamBlock& grad, Tensor& din, bool want_din, int n,
                    const std::vector<int>& in_shape) {
  if (want_din) din = Tensor(in_shape);
  for (int b = 0; b < n; ++b) {
    const double* x = in.data.data() + static_cast<std::size_t>(b) * in_w;
    const double* g = dz.data.data() + static_cast<std::size_t>(b) * out_w;
    double* dx = want_din ? din.data.data() + static_cast<std::size_t>(b) * in_w : nullptr;
    for (int o = 0; o < out_w; ++o) grad.b[static_cast<std::size_t>(o)] += g[o];
    for (int i = 0; i < in_w; ++i) {
      double* wg = grad.w.data() + static_cast<std::size_t>(i) * out_w;
      const double* wr = p.w.data() + static_cast<std::size_t>(i) * out_w;
      const double xv = x[i];
      double acc = 0.0;
      for (int o = 0; o < out_w; ++o) {
        wg[o] += xv * g[o];
        acc += wr[o] * g[o];
      }
      if (dx) dx[i] = acc;
    }
  }
}

void pool_forward(const Tensor& in, const TensorDims& in_d, const TensorDims& out_d,
                  Tensor& out, std::vector<int>& src, int n) {
  out = Tensor(batch_shape(out_d, n));
  src.assign(out.data.size(), 0);
  for (int b = 0; b < n; ++b) {
    const std::size_t in_base = static_cast<std::size_t>(b) * in_d.count();
    const std::size_t out_base = static_cast<std::size_t>(b) * out_d.count();
    for (int oy = 0; oy < out_d.h; ++oy) {
      for (int ox = 0; ox < out_d.w; ++ox) {
        for (int c = 0; c < in_d.c; ++c) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t best_at = 0;
          for (int ky = 0; ky < 2; ++ky) {
            for (int kx = 0; kx < 2; ++kx) {
              const int iy = oy * 2 + ky, ix = ox * 2 + kx;
              if (iy >= in_d.h || ix >= in_d.w) continue;
              const std::size_t at =
                  in_base + (static_cast<std::size_t>(iy) * in_d.w + ix) * in_d.c + c;
              if (in.data[at] > best) {
                best = in.data[at];
                best_at = at;
              }
            }
          }
          const std::size_t out_at =
              out_base + (static_cast<std::size_t>(oy) * out_d.w + ox) * out_d.c + c;
          out.data[out_at] = best;
          src[out_at] = static_cast<int>(best_at);
        }
      }
    }
  }
}

struct HeadLoss {
  double loss = 0.0;
  Tensor dz;  // dL/d(pre-activation), fused with the head activation
};

HeadLoss head_loss(const TaskInfo& task, const Tensor& probs, const Tensor& targets) {
  const int n = probs.shape[0];
  const int width = probs.shape[1];
  if (targets.shape[0] != n) {
    throw std::invalid_argument("loss: target batch size mismatch");
  }
  HeadLoss hl;
  hl.dz = Tensor({n, width});
  const double dn = static_cast<double>(n);
  constexpr double eps = 1e-12;
  if (task.loss == LossKind::CrossEntropy) {
    if (task.num_outputs == 1) {
      for (int b = 0; b < n; ++b) {
        const double p = probs.data[static_cast<std::size_t>(b)];
        const double y = targets.data[static_cast<std::size_t>(b)];
        hl.loss += -(y * std::log(p + eps) + (1.0 - y) * std::log(1.0 - p + eps));
        hl.dz.data[static_cast<std::size_t>(b)] = (p - y) / dn;
      }
    } else {
      for (int b = 0; b < n; ++b) {
        const int cls =
            static_cast<int>(std::lround(targets.data[static_cast<std::size_t>(b)]));
        if (cls < 0 || cls >= width) {
          throw std::invalid_argument("loss: class index out of range");
        }
        for (int o = 0; o < width; ++o) {
          const double p = probs.data[static_cast<std::size_t>(b) * width + o];
          hl.dz.data[static_cast<std::size_t>(b) * width + o] =
              (p - (o == cls ? 1.0 : 0.0)) / dn;
        }
        hl.loss += -std::log(probs.data[static_cast<std::size_t>(b) * width + cls] + eps);
      }
    }
    hl.loss /= dn;
  } else {
    if (targets.shape[1] != width) {
      throw std::invalid_argument("loss: regression target width mismatch");
    }
    const double denom = dn * width;
    for (std::size_t i = 0; i < probs.data.size(); ++i) {
      const double d = probs.data[i] - targets.data[i];
      hl.loss += d * d;
      hl.dz.data[i] = 2.0 * d / denom;
    }
    hl.loss /= denom;
  }
  return hl;
}

PathRun run_forward(const ModelGraph& model, TaskId task, const Tensor& inputs) {
  if (inputs.shape.size() != 4) {
    throw std::invalid_argument("forward: inputs must be [n, h, w, c]");
  }
  const TensorDims& want = model.input_dims();
  if (inputs.shape[1] != want.h || inputs.shape[2] != want.w || inputs.shape[3] != want.c) {
    throw std::invalid_argument("forward: input shape does not match the model input");
  }
  PathRun run;
  run.path = model.path_to_head(task);
  run.input = inputs;
  run.runs.resize(run.path.size());
  const int n = inputs.shape[0];
  const Tensor* cur = &run.input;
  TensorDims cur_d = want;
  for (std::size_t i = 0; i < run.path.size(); ++i) {
    const LayerId id = run.path[i];
    const LayerSpec& s = model.layer(id);
    const TensorDims& out_d = model.output_dims(id);
    LayerRun& lr = run.runs[i];
    switch (s.kind) {
      case LayerKind::Conv2D:
      case LayerKind::DepthwiseConv2D:
        conv_forward(s, model.params(id), *cur, cur_d, out_d, lr.z);
        apply_activation(s.activation, lr.z, lr.out, out_d.c);
        break;
      case LayerKind::Dense:
        dense_forward(model.params(id), *cur, cur_d.units, out_d.units, lr.z, n);
        apply_activation(s.activation, lr.z, lr.out, out_d.units);
        break;
      case LayerKind::Output:
        dense_forward(model.params(id), *cur, static_cast<int>(cur_d.count()), out_d.units,
                      lr.z, n);
        apply_activation(s.activation, lr.z, lr.out, out_d.units);
        break;
      case LayerKind::Pool:
        pool_forward(*cur, cur_d, out_d, lr.out, lr.pool_src, n);
        break;
      case LayerKind::Flatten:
        lr.out = *cur;
        lr.out.shape = batch_shape(out_d, n);
        break;
      case LayerKind::Activation:
        lr.z = *cur;
        apply_activation(s.activation, lr.z, lr.out, out_d.flat ? out_d.units : out_d.c);
        break;
    }
    cur = &lr.out;
    cur_d = out_d;
  }
  return run;
}

ParamBlock& grad_slot(std::map<LayerId, ParamBlock>& grads, const ModelGraph& model,
                      LayerId id) {
  auto it = grads.find(id);
  if (it == grads.end()) {
    const ParamBlock& p = model.params(id);
    ParamBlock zero;
    zero.w.assign(p.w.size(), 0.0);
    zero.b.assign(p.b.size(), 0.0);
    it = grads.emplace(id, std::move(zero)).first;
  }
  return it->second;
}

// Accumulates parameter gradients along the path, from the head down to path
// position `stop_pos`. `dz_head` is dL/d(head pre-activation).
void backward_path(const ModelGraph& model, const PathRun& run, Tensor dz_head,
                   std::map<LayerId, ParamBlock>& grads, std::size_t stop_pos) {
  const int n = run.input.shape[0];
  Tensor grad = std::move(dz_head);
  for (std::size_t ri = run.path.size(); ri-- > stop_pos;) {
    const LayerId id = run.path[ri];
    const LayerSpec& s = model.layer(id);
    const TensorDims& out_d = model.output_dims(id);
    const Tensor& in = ri == 0 ? run.input : run.runs[ri - 1].out;
    const TensorDims in_d = ri == 0 ? model.input_dims() : model.output_dims(run.path[ri - 1]);
    const LayerRun& lr = run.runs[ri];
    const bool want_din = ri > stop_pos;
    Tensor din;
    switch (s.kind) {
      case LayerKind::Output:
        // grad already holds dL/dz (fused with the loss).
        dense_backward(model.params(id), in, static_cast<int>(in_d.count()), out_d.units,
                       grad, grad_slot(grads, model, id), din, want_din, n,
                       batch_shape(in_d, n));
        break;
      case LayerKind::Dense:
        activation_backward(s.activation, lr.z, lr.out, grad, out_d.units);
        dense_backward(model.params(id), in, in_d.units, out_d.units, grad,
                       grad_slot(grads, model, id), din, want_din, n, batch_shape(in_d, n));
        break;
      case LayerKind::Conv2D:
      case LayerKind::DepthwiseConv2D:
        activation_backward(s.activation, lr.z, lr.out, grad, out_d.c);
        conv_backward(s, model.params(id), in, in_d, out_d, grad,
                      grad_slot(grads, model, id), din, want_din);
        break;
      case LayerKind::Pool:
        if (want_din) {
          din = Tensor(batch_shape(in_d, n));
          for (std::size_t i = 0; i < grad.data.size(); ++i) {
            din.data[static_cast<std::size_t>(lr.pool_src[i])] += grad.data[i];
          }
        }
        break;
      case LayerKind::Flatten:
        if (want_din) {
          din = grad;
          din.shape = batch_shape(in_d, n);
        }
        break;
      case LayerKind::Activation:
        activation_backward(s.activation, lr.z, lr.out, grad,
                            out_d.flat ? out_d.units : out_d.c);
        if (want_din) din = std::move(grad);
        break;
    }
    if (!want_din) break;
    grad = std::move(din);
  }
}

void validate_batch(const ModelGraph& model, const TaskBatch& batch) {
  if (batch.empty()) throw std::invalid_argument("empty task batch");
  for (const auto& [task, xy] : batch) {
    if (!model.has_task(task)) {
      throw std::invalid_argument("batch references unknown task " + std::to_string(task));
    }
    if (xy.first == nullptr || xy.second == nullptr) {
      throw std::invalid_argument("batch holds null tensors");
    }
  }
}

}  // namespace

Tensor forward(const ModelGraph& model, TaskId task, const Tensor& inputs) {
  PathRun run = run_forward(model, task, inputs);
  return std::move(run.runs.back().out);
}

double compute_loss(const ModelGraph& model, const TaskBatch& batch) {
  validate_batch(model, batch);
  double total = 0.0;
  for (const auto& [task, xy] : batch) {
    PathRun run = run_forward(model, task, *xy.first);
    total += head_loss(model.task(task), run.runs.back().out, *xy.second).loss;
  }
  return total;
}

std::map<LayerId, ParamBlock> compute_gradients(const ModelGraph& model,
                                                const TaskBatch& batch,
                                                const std::set<LayerId>* trainable,
                                                double* loss_out) {
  validate_batch(model, batch);
  std::map<LayerId, ParamBlock> grads;
  double total = 0.0;
  for (const auto& [task, xy] : batch) {
    PathRun run = run_forward(model, task, *xy.first);
    HeadLoss hl = head_loss(model.task(task), run.runs.back().out, *xy.second);
    total += hl.loss;
    std::size_t stop_pos = 0;
    if (trainable) {
      stop_pos = run.path.size();
      for (std::size_t i = 0; i < run.path.size(); ++i) {
        if (trainable->count(run.path[i])) {
          stop_pos = i;
          break;
        }
      }
      if (stop_pos == run.path.size()) continue;  // nothing trainable on this path
    }
    backward_path(model, run, std::move(hl.dz), grads, stop_pos);
  }
  if (loss_out) *loss_out = total;
  return grads;
}

namespace {

struct MomentBlock {
  std::vector<double> mw, vw, mb, vb;
};

void apply_update(ParamBlock& p, const ParamBlock& g, MomentBlock& mom,
                  const TrainConfig& cfg, int t) {
  if (cfg.optimizer == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < p.w.size(); ++i) p.w[i] -= cfg.learning_rate * g.w[i];
    for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] -= cfg.learning_rate * g.b[i];
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (mom.mw.size() != p.w.size()) {
    mom.mw.assign(p.w.size(), 0.0);
    mom.vw.assign(p.w.size(), 0.0);
    mom.mb.assign(p.b.size(), 0.0);
    mom.vb.assign(p.b.size(), 0.0);
  }
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    mom.mw[i] = b1 * mom.mw[i] + (1.0 - b1) * g.w[i];
    mom.vw[i] = b2 * mom.vw[i] + (1.0 - b2) * g.w[i] * g.w[i];
    p.w[i] -= cfg.learning_rate * (mom.mw[i] / c1) / (std::sqrt(mom.vw[i] / c2) + eps);
  }
  for (std::size_t i = 0; i < p.b.size(); ++i) {
    mom.mb[i] = b1 * mom.mb[i] + (1.0 - b1) * g.b[i];
    mom.vb[i] = b2 * mom.vb[i] + (1.0 - b2) * g.b[i] * g.b[i];
    p.b[i] -= cfg.learning_rate * (mom.mb[i] / c1) / (std::sqrt(mom.vb[i] / c2) + eps);
  }
}

void validate_train_inputs(const ModelGraph& model, const MultiTaskDataset& data,
                           const TrainConfig& cfg) {
  if (cfg.learning_rate <= 0.0 || cfg.batch_size < 1 || cfg.epochs < 0) {
    throw std::invalid_argument("train: config values must be positive");
  }
  if (data.tasks.empty()) throw std::invalid_argument("train: dataset has no tasks");
  const TensorDims& want = model.input_dims();
  for (const auto& [id, td] : data.tasks) {
    if (!model.has_task(id)) {
      throw std::invalid_argument("train: model has no head for task " + std::to_string(id));
    }
    if (td.inputs.shape.size() != 4 || td.inputs.shape[1] != want.h ||
        td.inputs.shape[2] != want.w || td.inputs.shape[3] != want.c) {
      throw std::invalid_argument("train: task " + std::to_string(id) +
                                  " inputs do not match the model input shape");
    }
    if (td.targets.shape.size() != 2 || td.targets.shape[0] != td.inputs.shape[0]) {
      throw std::invalid_argument("train: task " + std::to_string(id) +
                                  " targets misaligned with inputs");
    }
  }
}

}  // namespace

TrainResult train(const ModelGraph& model, const MultiTaskDataset& data,
                  const TrainConfig& cfg, const std::set<LayerId>* trainable) {
  validate_train_inputs(model, data, cfg);
  TrainResult result{model, {}};
  if (cfg.epochs == 0) return result;
  const std::vector<int>& train_rows = data.splits.train;
  if (train_rows.empty()) throw std::invalid_argument("train: empty training split");

  std::map<LayerId, MomentBlock> moments;
  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order = train_rows;
    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch), 0xBA7C4));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::vector<int> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                  order.begin() + static_cast<std::ptrdiff_t>(stop));

      std::map<TaskId, std::pair<Tensor, Tensor>> gathered;
      TaskBatch batch;
      for (const auto& [id, td] : data.tasks) {
        auto& slot = gathered[id];
        slot.first = gather_rows(td.inputs, rows);
        slot.second = gather_rows(td.targets, rows);
        batch[id] = {&slot.first, &slot.second};
      }

      double loss = 0.0;
      auto grads = compute_gradients(result.model, batch, trainable, &loss);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch offset " + std::to_string(start));
      }
      epoch_loss += loss * static_cast<double>(rows.size());
      seen += rows.size();

      ++step;
      for (auto& [id, g] : grads) {
        if (trainable && !trainable->count(id)) continue;
        apply_update(result.model.params_mut(id), g, moments[id], cfg, step);
      }
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(seen));
  }
  return result;
}

double score(const ModelGraph& model, const MultiTaskDataset& data, Split split,
             TaskId task) {
  auto it = data.tasks.find(task);
  if (it == data.tasks.end()) {
    throw std::invalid_argument("score: dataset has no task " + std::to_string(task));
  }
  const std::vector<int>& rows = data.split_indices(split);
  if (rows.empty()) throw std::invalid_argument("score: empty split");
  const Tensor inputs = gather_rows(it->second.inputs, rows);
  const Tensor targets = gather_rows(it->second.targets, rows);
  const Tensor probs = forward(model, task, inputs);

  const int n = probs.shape[0];
  const int width = probs.shape[1];
  const int twidth = targets.shape[1];
  std::vector<std::vector<double>> preds(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> wants(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) {
    preds[static_cast<std::size_t>(b)].assign(
        probs.data.begin() + static_cast<std::size_t>(b) * width,
        probs.data.begin() + static_cast<std::size_t>(b + 1) * width);
    wants[static_cast<std::size_t>(b)].assign(
        targets.data.begin() + static_cast<std::size_t>(b) * twidth,
        targets.data.begin() + static_cast<std::size_t>(b + 1) * twidth);
  }
  return task_score(preds, wants, model.task(task));
}

double ReplayEvaluator::do_score(const ModelGraph& m, const MultiTaskDataset&, Split,
                                 TaskId task) {
  const auto& bps = m.branch_points();
  const int depth = bps.count(task) ? m.depth_of(bps.at(task)) : -1;
  auto it = table_.find({task, depth});
  if (it == table_.end()) {
    throw std::out_of_range("replay evaluator: no entry for task " + std::to_string(task) +
                            " at depth " + std::to_string(depth));
  }
  return it->second;
}

}  // namespace ilash
