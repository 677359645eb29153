#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ilash/metrics.hpp"
#include "ilash/surrogate.hpp"

using namespace ilash;

namespace {

// Feature rows with all-distinct values and a deterministic target.
std::vector<BranchRecord> distinct_records(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<BranchRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    BranchRecord r;
    r.task.v = {1, 0, static_cast<double>(2 + i % 5), 12, 12, 1};
    for (std::size_t k = 0; k < r.layer.v.size(); ++k) {
      r.layer.v[k] = std::floor(unit(rng) * 100.0) / 10.0 + i * 0.001;
    }
    r.gn = unit(rng);
    out.push_back(r);
  }
  return out;
}

double training_r2(const SurrogateModel& m, const std::vector<BranchRecord>& records) {
  std::vector<double> y, y_hat;
  for (const BranchRecord& r : records) {
    y.push_back(r.gn);
    y_hat.push_back(m.predict_record(r));
  }
  return r2(y, y_hat);
}

}  // namespace

TEST_CASE("unbounded decision tree memorizes distinct rows") {
  const auto records = distinct_records(60, 3);
  const auto tree = fit_decision_tree(records);
  for (const BranchRecord& r : records) {
    CHECK(tree->predict_record(r) == doctest::Approx(r.gn).epsilon(1e-12));
  }
  CHECK(training_r2(*tree, records) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant targets produce a single-leaf tree") {
  auto records = distinct_records(20, 4);
  for (BranchRecord& r : records) r.gn = 0.5;
  DecisionTreeRegressor tree;
  tree.fit(records);
  CHECK(tree.nodes().size() == 1);
  BranchRecord probe = records.front();
  probe.layer.v[0] = 99.0;
  CHECK(tree.predict_record(probe) == 0.5);
}

TEST_CASE("a single record becomes a single leaf") {
  const auto records = distinct_records(1, 5);
  const auto tree = fit_decision_tree(records);
  BranchRecord probe = records.front();
  probe.task.v[2] = 77.0;
  CHECK(tree->predict_record(probe) == records.front().gn);
}

TEST_CASE("tree prediction is piecewise constant between thresholds") {
  // Only feature 8 (k_0) varies: values 1, 2, 3 with distinct targets.
  std::vector<BranchRecord> records;
  for (int v = 1; v <= 3; ++v) {
    BranchRecord r;
    r.task.v = {1, 0, 2, 8, 8, 1};
    r.layer.v = {-1, -1, -1, 0, 0, 0, -1, -1, -1};
    r.layer.v[3] = static_cast<double>(v);
    r.gn = 0.2 * v;
    records.push_back(r);
  }
  DecisionTreeRegressor tree;
  tree.fit(records);
  BranchRecord probe = records.front();
  probe.layer.v[3] = 1.2;
  const double a = tree.predict_record(probe);
  probe.layer.v[3] = 1.4;  // still below the 1.5 midpoint
  CHECK(tree.predict_record(probe) == a);
  probe.layer.v[3] = 1.7;  // crossed it
  CHECK(tree.predict_record(probe) != a);
}

TEST_CASE("decision tree rejects empty input and bad widths") {
  CHECK_THROWS_AS(fit_decision_tree({}), std::invalid_argument);
  const auto tree = fit_decision_tree(distinct_records(5, 6));
  const std::vector<double> narrow{1.0, 2.0};
  CHECK_THROWS_AS(tree->predict(narrow), std::invalid_argument);
}

TEST_CASE("degenerate forest equals a single decision tree") {
  const auto records = distinct_records(40, 7);
  RandomForestParams p;
  p.n_estimators = 1;
  p.bootstrap = false;
  p.sqrt_features = false;
  const auto forest = fit_random_forest(records, p);
  const auto tree = fit_decision_tree(records);
  for (const BranchRecord& r : records) {
    CHECK(forest->predict_record(r) == tree->predict_record(r));
  }
}

TEST_CASE("forest predictions stay inside the target hull and are seeded") {
  const auto records = distinct_records(50, 8);
  double lo = 1.0, hi = 0.0;
  for (const BranchRecord& r : records) {
    lo = std::min(lo, r.gn);
    hi = std::max(hi, r.gn);
  }
  RandomForestParams p;
  p.n_estimators = 25;
  p.seed = 9;
  const auto a = fit_random_forest(records, p);
  const auto b = fit_random_forest(records, p);
  for (const BranchRecord& r : records) {
    const double v = a->predict_record(r);
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
    CHECK(v == b->predict_record(r));
  }
}

TEST_CASE("linear regressor recovers a planted affine map") {
  auto records = distinct_records(80, 10);
  for (BranchRecord& r : records) {
    const auto f = r.features();
    r.gn = 0.31 + 0.02 * f[2] - 0.015 * f[7] + 0.004 * f[12];
  }
  const auto linear = fit_linear(records);
  for (const BranchRecord& r : records) {
    CHECK(std::abs(linear->predict_record(r) - r.gn) <= 1e-6);
  }
}

TEST_CASE("linear regressor handles constant targets and duplicate columns") {
  auto records = distinct_records(30, 11);
  for (BranchRecord& r : records) r.gn = 0.4;
  LinearRegressor constant;
  constant.fit(records);
  CHECK(std::abs(constant.predict_record(records.front()) - 0.4) <= 1e-9);

  // Duplicate feature columns make the normal equations singular.
  auto dup = distinct_records(30, 12);
  for (BranchRecord& r : dup) {
    r.layer.v[1] = r.layer.v[0];
    r.layer.v[2] = r.layer.v[0];
    r.task.v[0] = 1;
    r.task.v[1] = 0;
    r.gn = 0.2 + 0.01 * r.layer.v[0];
  }
  const auto fallback = fit_linear(dup);
  for (const BranchRecord& r : dup) {
    CHECK(std::isfinite(fallback->predict_record(r)));
    CHECK(std::abs(fallback->predict_record(r) - r.gn) <= 1e-3);
  }
}

TEST_CASE("gradient boosting degenerates to the mean and improves stagewise") {
  const auto records = distinct_records(50, 13);
  double mean = 0.0;
  for (const BranchRecord& r : records) mean += r.gn;
  mean /= static_cast<double>(records.size());

  GradientBoostingParams none;
  none.n_estimators = 0;
  const auto base_only = fit_gradient_boosting(records, none);
  CHECK(base_only->predict_record(records.front()) == doctest::Approx(mean).epsilon(1e-12));

  GradientBoostingParams frozen;
  frozen.n_estimators = 10;
  frozen.learning_rate = 0.0;
  const auto lr0 = fit_gradient_boosting(records, frozen);
  CHECK(lr0->predict_record(records.back()) == doctest::Approx(mean).epsilon(1e-12));

  GradientBoostingParams p;
  p.n_estimators = 40;
  GradientBoostingRegressor gbm(p);
  gbm.fit(records);
  const auto& losses = gbm.stage_losses();
  REQUIRE(losses.size() == 40);
  for (std::size_t i = 1; i < losses.size(); ++i) {
    CHECK(losses[i] <= losses[i - 1] + 1e-12);
  }
  CHECK(losses.back() < losses.front());
}

TEST_CASE("replay surrogate is an exact table") {
  const auto records = distinct_records(10, 14);
  const auto replay = make_replay_surrogate(records);
  for (const BranchRecord& r : records) {
    CHECK(replay->predict_record(r) == r.gn);
  }
  BranchRecord unknown = records.front();
  unknown.layer.v[4] = 1234.0;
  CHECK_THROWS_AS(replay->predict_record(unknown), std::out_of_range);

  // Conflicting duplicates are ambiguous.
  auto conflict = records;
  conflict.push_back(records.front());
  conflict.back().gn = records.front().gn + 0.5;
  CHECK_THROWS_AS(make_replay_surrogate(conflict), std::invalid_argument);
}

TEST_CASE("surrogates round-trip through JSON") {
  const auto records = distinct_records(30, 15);
  RandomForestParams rf;
  rf.n_estimators = 5;
  rf.seed = 2;
  GradientBoostingParams gb;
  gb.n_estimators = 8;
  const std::unique_ptr<SurrogateModel> models[] = {
      fit_decision_tree(records), fit_random_forest(records, rf), fit_linear(records),
      fit_gradient_boosting(records, gb), make_replay_surrogate(records)};
  for (const auto& m : models) {
    const auto j = m->to_json();
    const auto back = SurrogateModel::from_json(j);
    CHECK(back->kind() == m->kind());
    for (const BranchRecord& r : records) {
      CHECK(back->predict_record(r) == m->predict_record(r));
    }
    CHECK(back->to_json() == j);
  }
}

TEST_CASE("leave-one-out merges everything except the held-out set") {
  std::map<std::string, std::vector<BranchRecord>> datasets;
  // Learnable structure: the target is a step function of k_0 and s_0.
  auto make_set = [](std::uint64_t seed, double offset) {
    std::mt19937_64 rng(seed);
    std::vector<BranchRecord> rows;
    for (int i = 0; i < 40; ++i) {
      BranchRecord r;
      r.task.v = {1, 0, static_cast<double>(2 + (i % 3)), 12, 12, 1};
      const double k0 = static_cast<double>(1 + 2 * (i % 4));
      const double s0 = static_cast<double>(1 + (i % 2));
      r.layer.v = {-1, -1, -1, k0, 0, s0, -1, -1, -1};
      r.layer.v[1] = static_cast<double>(rng() % 2);
      r.gn = 0.05 * k0 + 0.1 * s0 + offset;
      rows.push_back(r);
    }
    return rows;
  };
  datasets["alpha"] = make_set(1, 0.0);
  datasets["beta"] = make_set(2, 0.0);
  datasets["gamma"] = make_set(3, 0.0);

  const LooResult res = leave_one_out_fit(datasets, "alpha", SurrogateKind::DecisionTree, 5);
  CHECK(res.trained_on == std::vector<std::string>{"beta", "gamma"});
  for (const std::string& s : res.train_sources) CHECK(s != "alpha");
  for (const std::string& s : res.val_sources) CHECK(s != "alpha");
  CHECK(res.train_sources.size() + res.val_sources.size() == 80);
  // 7:3 split of the merged pool.
  CHECK(res.train_sources.size() == 56);
  CHECK(res.val_sources.size() == 24);

  CHECK(res.metrics.rmse * res.metrics.rmse ==
        doctest::Approx(res.metrics.mse).epsilon(1e-12));
  CHECK(res.metrics.mae <= res.metrics.rmse + 1e-15);
  CHECK(res.metrics.r2 > 0.0);

  CHECK_THROWS_AS(leave_one_out_fit(datasets, "nope", SurrogateKind::DecisionTree, 5),
                  std::invalid_argument);
  std::map<std::string, std::vector<BranchRecord>> one{{"only", datasets["alpha"]}};
  CHECK_THROWS_AS(leave_one_out_fit(one, "only", SurrogateKind::DecisionTree, 5),
                  std::invalid_argument);
}

TEST_CASE("surrogate kind strings round-trip and accept shorthand") {
  CHECK(surrogate_kind_from_string("decision_tree") == SurrogateKind::DecisionTree);
  CHECK(surrogate_kind_from_string("dt") == SurrogateKind::DecisionTree);
  CHECK(surrogate_kind_from_string("rf") == SurrogateKind::RandomForest);
  CHECK(surrogate_kind_from_string("gbm") == SurrogateKind::GradientBoosting);
  CHECK_THROWS_AS(surrogate_kind_from_string("svr"), std::invalid_argument);
}
