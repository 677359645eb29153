#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "ilash/metrics.hpp"
#include "test_support.hpp"

using namespace ilash;

TEST_CASE("goodness matches the blended form") {
  CHECK(goodness({0.9, 3, 10}, {0.0}) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(goodness({0.0, 10, 10}, {1.0}) == doctest::Approx(1.0).epsilon(1e-15));
  // 0.8 * 0.5 + (10/20) * 0.5 = 0.65, by hand.
  CHECK(goodness({0.8, 10, 20}, {0.5}) == doctest::Approx(0.65).epsilon(1e-15));
}

TEST_CASE("goodness endpoints reduce exactly") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> total_dist(1, 50);
  for (int i = 0; i < 1000; ++i) {
    GoodnessInput in;
    in.acc = unit(rng);
    in.lr_total = total_dist(rng);
    in.lr_index = std::uniform_int_distribution<int>(0, in.lr_total)(rng);
    CHECK(std::abs(goodness(in, {0.0}) - in.acc) <= 1e-12);
    const double pos = static_cast<double>(in.lr_index) / in.lr_total;
    CHECK(std::abs(goodness(in, {1.0}) - pos) <= 1e-12);
    const double gn = goodness(in, {0.3});
    CHECK(gn >= 0.0);
    CHECK(gn <= 1.0);
  }
}

TEST_CASE("goodness is monotone in acc and position") {
  const GoodnessParams p{0.4};
  double prev = -1.0;
  for (int idx = 0; idx <= 20; ++idx) {
    const double gn = goodness({0.5, idx, 20}, p);
    CHECK(gn >= prev);
    prev = gn;
  }
  prev = -1.0;
  for (int i = 0; i <= 10; ++i) {
    const double gn = goodness({i / 10.0, 4, 20}, p);
    CHECK(gn >= prev);
    prev = gn;
  }
}

TEST_CASE("goodness ranks by the free coordinate when the other is tied") {
  const GoodnessParams p{0.25};
  // Same acc: deeper layer wins.
  CHECK(goodness({0.7, 9, 12}, p) > goodness({0.7, 4, 12}, p));
  // Same position: higher acc wins.
  CHECK(goodness({0.8, 6, 12}, p) > goodness({0.6, 6, 12}, p));
}

TEST_CASE("goodness rejects invalid inputs") {
  CHECK_THROWS_AS(goodness({0.5, 0, 0}, {0.2}), std::invalid_argument);
  CHECK_THROWS_AS(goodness({1.2, 0, 5}, {0.2}), std::invalid_argument);
  CHECK_THROWS_AS(goodness({-0.1, 0, 5}, {0.2}), std::invalid_argument);
  CHECK_THROWS_AS(goodness({0.5, 6, 5}, {0.2}), std::invalid_argument);
  CHECK_THROWS_AS(goodness({0.5, 2, 5}, {1.5}), std::invalid_argument);
}

TEST_CASE("error metrics on known vectors") {
  const std::vector<double> y{1, 2, 3};
  CHECK(mae(y, y) == 0.0);
  CHECK(mse(y, y) == 0.0);
  CHECK(rmse(y, y) == 0.0);
  CHECK(r2(y, y) == 1.0);

  const std::vector<double> mean_pred{2, 2, 2};
  CHECK(r2(y, mean_pred) == doctest::Approx(0.0).epsilon(1e-15));

  // y=[0,2], y_hat=[1,1]: both absolute errors are 1.
  const std::vector<double> y2{0, 2}, p2{1, 1};
  CHECK(mae(y2, p2) == doctest::Approx(1.0));
  CHECK(mse(y2, p2) == doctest::Approx(1.0));
  CHECK(rmse(y2, p2) == doctest::Approx(1.0));
}

TEST_CASE("metric identities hold on random vectors") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng() % 30);
    auto y = ilash::testing::random_unit_vector(rng, n);
    auto p = ilash::testing::random_unit_vector(rng, n);
    const double m = mse(y, p);
    const double r = rmse(y, p);
    CHECK(std::abs(r * r - m) <= 1e-12 * std::max(1.0, m));
    CHECK(mae(y, p) <= r + 1e-15);

    std::vector<std::size_t> perm(n);
    for (std::size_t k = 0; k < n; ++k) perm[k] = k;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> ys(n), ps(n);
    for (std::size_t k = 0; k < n; ++k) {
      ys[k] = y[perm[k]];
      ps[k] = p[perm[k]];
    }
    CHECK(mae(ys, ps) == doctest::Approx(mae(y, p)).epsilon(1e-12));
    CHECK(mse(ys, ps) == doctest::Approx(mse(y, p)).epsilon(1e-12));
  }
}

TEST_CASE("metric error paths") {
  const std::vector<double> y{1, 2}, p{1};
  CHECK_THROWS_AS(mae(y, p), std::invalid_argument);
  CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
  // Constant targets: perfect fit is defined, residuals are not.
  const std::vector<double> c{2, 2, 2};
  CHECK(r2(c, c) == 1.0);
  CHECK_THROWS_AS(r2(c, std::vector<double>{1, 2, 3}), std::domain_error);
}

TEST_CASE("task_score for classification") {
  TaskInfo task = classification_task(1, 3, 8, 8, 1);
  const std::vector<std::vector<double>> preds{{0.7, 0.2, 0.1}, {0.1, 0.8, 0.1}, {0.2, 0.2, 0.6}};
  const std::vector<std::vector<double>> targets{{0}, {1}, {2}};
  CHECK(task_score(preds, targets, task) == 1.0);

  const std::vector<std::vector<double>> targets_off{{1}, {1}, {2}};
  CHECK(task_score(preds, targets_off, task) == doctest::Approx(2.0 / 3.0));

  TaskInfo binary = classification_task(2, 1, 8, 8, 1);
  const std::vector<std::vector<double>> bp{{0.9}, {0.2}, {0.4}};
  const std::vector<std::vector<double>> bt{{1}, {0}, {1}};
  CHECK(task_score(bp, bt, binary) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("task_score for regression") {
  TaskInfo task = regression_task(1, 1, 8, 8, 1);
  const std::vector<std::vector<double>> t{{0.0}, {0.5}, {1.0}};
  CHECK(task_score(t, t, task) == 1.0);

  // mae equal to the target range clamps to zero.
  const std::vector<std::vector<double>> targets{{0.0}, {1.0}};
  const std::vector<std::vector<double>> preds{{1.0}, {2.0}};
  CHECK(task_score(preds, targets, task) == 0.0);

  bool warned = false;
  const std::vector<std::vector<double>> consts{{0.5}, {0.5}};
  CHECK(task_score(consts, consts, task, &warned) == 0.0);
  CHECK(warned);

  CHECK_THROWS_AS(task_score({}, {}, task), std::invalid_argument);
}
