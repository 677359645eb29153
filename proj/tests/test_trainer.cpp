#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "ilash/dataset.hpp"
#include "ilash/trainer.hpp"
#include "ilash/util.hpp"
#include "test_support.hpp"

using namespace ilash;

namespace {

Tensor random_inputs(std::mt19937_64& rng, int n, int h, int w, int c) {
  Tensor t({n, h, w, c});
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : t.data) v = dist(rng);
  return t;
}

Tensor random_targets(std::mt19937_64& rng, int n, int width) {
  Tensor t({n, width});
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : t.data) v = dist(rng);
  return t;
}

// Central finite differences against the analytic gradients, every
// parameter of every layer.
void check_gradients(const ModelGraph& model, const Tensor& inputs, const Tensor& targets) {
  TaskBatch batch{{1, {&inputs, &targets}}};
  const auto grads = compute_gradients(model, batch);
  const double h = 1e-6;
  for (const auto& [id, g] : grads) {
    for (int part = 0; part < 2; ++part) {
      const std::size_t count = part == 0 ? g.w.size() : g.b.size();
      for (std::size_t i = 0; i < count; ++i) {
        ModelGraph probe = model;
        auto& vec = part == 0 ? probe.params_mut(id).w : probe.params_mut(id).b;
        const double saved = vec[i];
        vec[i] = saved + h;
        const double up = compute_loss(probe, batch);
        vec[i] = saved - h;
        const double down = compute_loss(probe, batch);
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = part == 0 ? g.w[i] : g.b[i];
        const double denom = std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
        REQUIRE(std::abs(analytic - numeric) / denom <= 1e-4);
      }
    }
  }
}

}  // namespace

TEST_CASE("dense gradients match finite differences") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    const int units = 2 + static_cast<int>(rng() % 4);
    const std::vector<LayerSpec> tmpl{flatten(), dense(units, Activation::Sigmoid)};
    const TaskInfo task = regression_task(1, 2, 3, 3, 1);
    const ModelGraph m = ModelGraph::build_base(tmpl, task, rng());
    const Tensor x = random_inputs(rng, 2, 3, 3, 1);
    const Tensor y = random_targets(rng, 2, 2);
    check_gradients(m, x, y);
  }
}

TEST_CASE("conv2d gradients match finite differences") {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 10; ++rep) {
    const int k = 1 + static_cast<int>(rng() % 3);
    const int stride = 1 + static_cast<int>(rng() % 2);
    const Padding pad = rng() % 2 ? Padding::Same : Padding::Valid;
    const int oc = 1 + static_cast<int>(rng() % 3);
    const std::vector<LayerSpec> tmpl{conv2d(k, stride, pad, oc, Activation::Sigmoid)};
    const TaskInfo task = regression_task(1, 1, 5, 5, 2);
    const ModelGraph m = ModelGraph::build_base(tmpl, task, rng());
    const Tensor x = random_inputs(rng, 2, 5, 5, 2);
    const Tensor y = random_targets(rng, 2, 1);
    check_gradients(m, x, y);
  }
}

TEST_CASE("depthwise conv gradients match finite differences") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    const int k = 1 + static_cast<int>(rng() % 3);
    const int stride = 1 + static_cast<int>(rng() % 2);
    const Padding pad = rng() % 2 ? Padding::Same : Padding::Valid;
    const std::vector<LayerSpec> tmpl{depthwise_conv2d(k, stride, pad, Activation::Sigmoid)};
    const TaskInfo task = regression_task(1, 2, 5, 5, 3);
    const ModelGraph m = ModelGraph::build_base(tmpl, task, rng());
    const Tensor x = random_inputs(rng, 2, 5, 5, 3);
    const Tensor y = random_targets(rng, 2, 2);
    check_gradients(m, x, y);
  }
}

TEST_CASE("gradients flow through pool, flatten, and softmax heads") {
  std::mt19937_64 rng(24);
  const std::vector<LayerSpec> tmpl{conv2d(3, 1, Padding::Same, 3, Activation::Sigmoid),
                                    max_pool(), flatten(), dense(4, Activation::Sigmoid)};
  const TaskInfo task = regression_task(1, 2, 6, 6, 1);
  const ModelGraph m = ModelGraph::build_base(tmpl, task, 17);
  const Tensor x = random_inputs(rng, 3, 6, 6, 1);
  const Tensor y = random_targets(rng, 3, 2);
  check_gradients(m, x, y);
}

TEST_CASE("forward is deterministic and softmax rows sum to one") {
  const ModelGraph m = ModelGraph::build_base(ilash::testing::small_conv_template(),
                                              classification_task(1, 4, 12, 12, 1), 3);
  std::mt19937_64 rng(9);
  const Tensor x = random_inputs(rng, 5, 12, 12, 1);
  const Tensor a = forward(m, 1, x);
  const Tensor b = forward(m, 1, x);
  CHECK(a.data == b.data);
  for (int n = 0; n < 5; ++n) {
    double sum = 0.0;
    for (int o = 0; o < 4; ++o) sum += a.data[static_cast<std::size_t>(n * 4 + o)];
    CHECK(std::abs(sum - 1.0) <= 1e-6);
  }
}

TEST_CASE("zero epochs leaves parameters untouched") {
  SynthSpec spec;
  spec.tasks = 1;
  spec.samples = 30;
  spec.h = spec.w = 6;
  const MultiTaskDataset data = synth_dataset(spec);
  const ModelGraph m = ModelGraph::build_base(
      {flatten(), dense(4, Activation::Sigmoid)}, data.tasks.at(1).info, 2);
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult r = train(m, data, cfg);
  CHECK(r.loss_history.empty());
  for (LayerId id : m.depth_order()) {
    CHECK(r.model.params(id).w == m.params(id).w);
    CHECK(r.model.params(id).b == m.params(id).b);
  }
}

TEST_CASE("frozen layers keep bit-identical parameters") {
  SynthSpec spec;
  spec.tasks = 1;
  spec.samples = 40;
  spec.h = spec.w = 6;
  const MultiTaskDataset data = synth_dataset(spec);
  const ModelGraph m =
      ModelGraph::build_base({conv2d(3, 1, Padding::Same, 3), flatten(),
                              dense(6, Activation::Relu)},
                             data.tasks.at(1).info, 2);
  const LayerId head = m.heads().at(1);
  const std::set<LayerId> only_head{head};
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 5;
  const TrainResult r = train(m, data, cfg, &only_head);
  for (LayerId id : m.depth_order()) {
    if (id == head) continue;
    CHECK(r.model.params(id).w == m.params(id).w);
    CHECK(r.model.params(id).b == m.params(id).b);
  }
  CHECK(r.model.params(head).w != m.params(head).w);
}

TEST_CASE("training is deterministic under a fixed seed") {
  SynthSpec spec;
  spec.tasks = 2;
  spec.samples = 40;
  spec.h = spec.w = 6;
  const MultiTaskDataset data = synth_dataset(spec);
  const ModelGraph base = build_hard_sharing({conv2d(3, 1, Padding::Same, 3), flatten(),
                                              dense(6, Activation::Relu)},
                                             data.task_infos(), 11);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 31;
  const TrainResult a = train(base, data, cfg);
  const TrainResult b = train(base, data, cfg);
  CHECK(a.loss_history == b.loss_history);
  for (LayerId id : base.depth_order()) {
    CHECK(a.model.params(id).w == b.model.params(id).w);
  }
  CHECK(score(a.model, data, Split::Val, 1) == score(b.model, data, Split::Val, 1));
}

TEST_CASE("a two-layer dense net separates the brightness classes") {
  SynthSpec spec;
  spec.tasks = 1;
  spec.samples = 100;
  spec.h = spec.w = 8;
  spec.seed = 13;
  const MultiTaskDataset data = synth_dataset(spec);
  const ModelGraph m = ModelGraph::build_base(
      {flatten(), dense(8, Activation::Relu)}, data.tasks.at(1).info, 3);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1e-2;
  cfg.seed = 4;
  const TrainResult r = train(m, data, cfg);
  CHECK(score(r.model, data, Split::Train, 1) >= 0.95);
  CHECK(r.loss_history.back() < r.loss_history.front());
}

TEST_CASE("joint two-task training reduces the summed loss") {
  SynthSpec spec;
  spec.tasks = 3;
  spec.samples = 60;
  spec.h = spec.w = 6;
  spec.seed = 19;
  MultiTaskDataset data = synth_dataset(spec);
  data.tasks.erase(2);  // keep a classification and a regression task
  const ModelGraph m = build_hard_sharing({conv2d(3, 1, Padding::Same, 4), flatten(),
                                           dense(8, Activation::Relu)},
                                          data.task_infos(), 6);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 2;
  const TrainResult r = train(m, data, cfg);
  REQUIRE(r.loss_history.size() == 10);
  CHECK(r.loss_history.back() < r.loss_history.front());
}

TEST_CASE("untrained classifiers sit near chance level") {
  SynthSpec spec;
  spec.tasks = 2;
  spec.samples = 200;
  spec.h = spec.w = 8;
  spec.seed = 23;
  MultiTaskDataset data = synth_dataset(spec);
  // Task 2 is the 4-class quadrant task.
  double total = 0.0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    const ModelGraph m = ModelGraph::build_base(
        {conv2d(3, 1, Padding::Same, 4), flatten(), dense(8, Activation::Relu)},
        data.tasks.at(2).info, static_cast<std::uint64_t>(s) * 71 + 5);
    total += score(m, data.task_view(2), Split::Val, 2);
  }
  const double mean = total / seeds;
  CHECK(std::abs(mean - 0.25) <= 0.15);  // 1/k for the 4-class quadrant task
}

TEST_CASE("a hand-built exact model scores 1.0") {
  SynthSpec spec;
  spec.tasks = 1;
  spec.samples = 50;
  spec.h = spec.w = 6;
  spec.seed = 8;
  const MultiTaskDataset data = synth_dataset(spec);
  ModelGraph m = ModelGraph::build_base({flatten()}, data.tasks.at(1).info, 0);
  // Two-class head; the class-1 logit leads exactly when mean > 0.5.
  const LayerId head = m.heads().at(1);
  const double npix = 6.0 * 6.0;
  ParamBlock& p = m.params_mut(head);
  for (std::size_t i = 0; i < p.w.size(); i += 2) {
    p.w[i] = 0.0;
    p.w[i + 1] = 40.0 / npix;
  }
  p.b = {0.0, -20.0};
  CHECK(score(m, data, Split::Train, 1) == 1.0);
  CHECK(score(m, data, Split::Val, 1) == 1.0);
}

TEST_CASE("diverging training aborts with a diagnostic") {
  SynthSpec spec;
  spec.tasks = 3;
  spec.samples = 30;
  spec.h = spec.w = 6;
  const MultiTaskDataset data = synth_dataset(spec);
  const MultiTaskDataset reg = data.task_view(3);
  ModelGraph m = ModelGraph::build_base(
      {flatten(), dense(8, Activation::Linear)}, reg.tasks.at(3).info, 1);
  // Parameters this large overflow the squared loss immediately.
  for (double& w : m.params_mut(m.heads().at(3)).w) w = 1e200;
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(train(m, reg, cfg), std::runtime_error);
}

TEST_CASE("training rejects mismatched shapes") {
  SynthSpec spec;
  spec.tasks = 1;
  spec.samples = 20;
  spec.h = spec.w = 6;
  const MultiTaskDataset data = synth_dataset(spec);
  // Model expects 8x8 input; the data is 6x6.
  TaskInfo t = data.tasks.at(1).info;
  t.input_h = t.input_w = 8;
  const ModelGraph m = ModelGraph::build_base({flatten(), dense(4)}, t, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(train(m, data, cfg), std::invalid_argument);
  CHECK_THROWS_AS(score(m, data, Split::Val, 9), std::invalid_argument);
}

TEST_CASE("replay evaluator returns table entries exactly") {
  const auto tmpl = ilash::testing::odd_kernel_template(6);
  const TaskInfo t1 = classification_task(1, 2, 12, 12, 1);
  const TaskInfo t2 = classification_task(2, 4, 12, 12, 1);
  const ModelGraph base = ModelGraph::build_base(tmpl, t1, 1);
  const ModelGraph branched = base.branch(base.layer_at_depth(3), t2);

  ReplayEvaluator replay({{{2, 3}, 0.7}});
  MultiTaskDataset dummy;
  CHECK(replay.score(branched, dummy, Split::Val, 2) == 0.7);
  CHECK_THROWS_AS(replay.score(base, dummy, Split::Val, 1), std::out_of_range);

  // Training is a no-op that still counts calls.
  TrainConfig cfg;
  const ModelGraph same = replay.train(branched, dummy, cfg);
  CHECK(same.params(base.layer_at_depth(0)).w == branched.params(base.layer_at_depth(0)).w);
  CHECK(replay.train_calls() == 1);
  CHECK(replay.score_calls() == 2);
}

TEST_CASE("sgd optimizer also reduces the loss") {
  SynthSpec spec;
  spec.tasks = 1;
  spec.samples = 60;
  spec.h = spec.w = 6;
  spec.seed = 14;
  const MultiTaskDataset data = synth_dataset(spec);
  const ModelGraph m = ModelGraph::build_base(
      {flatten(), dense(8, Activation::Relu)}, data.tasks.at(1).info, 4);
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::Sgd;
  cfg.learning_rate = 0.5;
  cfg.epochs = 20;
  cfg.seed = 6;
  const TrainResult r = train(m, data, cfg);
  CHECK(r.loss_history.back() < r.loss_history.front());
}

TEST_CASE("scoring an empty split is an error") {
  SynthSpec spec;
  spec.tasks = 1;
  spec.samples = 5;  // 3/0/2 split: validation is empty
  spec.h = spec.w = 6;
  const MultiTaskDataset data = synth_dataset(spec);
  REQUIRE(data.splits.val.empty());
  const ModelGraph m =
      ModelGraph::build_base({flatten(), dense(4)}, data.tasks.at(1).info, 1);
  CHECK_THROWS_AS(score(m, data, Split::Val, 1), std::invalid_argument);
}
