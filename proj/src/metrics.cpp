#include "ilash/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ilash {

double goodness(const GoodnessInput& in, const GoodnessParams& p) {
  if (p.g_th < 0.0 || p.g_th > 1.0) {
    throw std::invalid_argument("goodness: g_th must lie in [0, 1]");
  }
  if (in.acc < 0.0 || in.acc > 1.0) {
    throw std::invalid_argument("goodness: acc must lie in [0, 1]");
  }
  if (in.lr_total <= 0) {
    throw std::invalid_argument("goodness: lr_total must be positive");
  }
  if (in.lr_index < 0 || in.lr_index > in.lr_total) {
    throw std::invalid_argument("goodness: lr_index must lie in [0, lr_total]");
  }
  const double position = static_cast<double>(in.lr_index) / in.lr_total;
  return in.acc * (1.0 - p.g_th) + position * p.g_th;
}

namespace {

void check_pair(std::span<const double> y, std::span<const double> y_hat, const char* what) {
  if (y.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
  if (y.size() != y_hat.size()) {
    throw std::invalid_argument(std::string(what) + ": length mismatch");
  }
}

}  // namespace

double mae(std::span<const double> y, std::span<const double> y_hat) {
  check_pair(y, y_hat, "mae");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(y[i] - y_hat[i]);
  return sum / static_cast<double>(y.size());
}

double mse(std::span<const double> y, std::span<const double> y_hat) {
  check_pair(y, y_hat, "mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - y_hat[i];
    sum += d * d;
  }
  return sum / static_cast<double>(y.size());
}

double rmse(std::span<const double> y, std::span<const double> y_hat) {
  return std::sqrt(mse(y, y_hat));
}

double r2(std::span<const double> y, std::span<const double> y_hat) {
  check_pair(y, y_hat, "r2");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - y_hat[i];
    const double t = y[i] - mean;
    ss_res += r * r;
    ss_tot += t * t;
  }
  if (ss_tot == 0.0) {
    if (ss_res == 0.0) return 1.0;
    throw std::domain_error("r2: undefined for constant targets with nonzero residuals");
  }
  return 1.0 - ss_res / ss_tot;
}

double task_score(const std::vector<std::vector<double>>& predictions,
                  const std::vector<std::vector<double>>& targets,
                  const TaskInfo& task, bool* warned) {
  if (warned) *warned = false;
  if (predictions.empty()) throw std::invalid_argument("task_score: empty validation set");
  if (predictions.size() != targets.size()) {
    throw std::invalid_argument("task_score: prediction/target count mismatch");
  }

  if (task.kind == TaskKind::Classification) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const auto& p = predictions[i];
      const auto& t = targets[i];
      if (task.num_outputs == 1) {
        const bool predicted = p.at(0) >= 0.5;
        const bool actual = t.at(0) >= 0.5;
        if (predicted == actual) ++correct;
      } else {
        const std::size_t arg =
            static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        if (static_cast<int>(arg) == static_cast<int>(std::lround(t.at(0)))) ++correct;
      }
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
  }

  // Regression: range-normalized MAE, clamped to [0, 1].
  std::vector<double> flat_t, flat_p;
  flat_t.reserve(targets.size() * targets.front().size());
  flat_p.reserve(flat_t.capacity());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (std::size_t k = 0; k < targets[i].size(); ++k) {
      flat_t.push_back(targets[i][k]);
      flat_p.push_back(predictions[i].at(k));
    }
  }
  const auto [lo, hi] = std::minmax_element(flat_t.begin(), flat_t.end());
  const double range = *hi - *lo;
  if (range == 0.0) {
    if (warned) *warned = true;
    return 0.0;
  }
  const double err = mae(flat_t, flat_p);
  return std::clamp(1.0 - err / range, 0.0, 1.0);
}

}  // namespace ilash
