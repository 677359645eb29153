#pragma once

#include <span>
#include <vector>

#include "ilash/model_graph.hpp"

namespace ilash {

struct GoodnessParams {
  double g_th = 0.2;  // green threshold: 0 = pure accuracy, 1 = pure sharing depth
};

struct GoodnessInput {
  double acc = 0.0;  // validation score in [0, 1]
  int lr_index = 0;  // 1-based rank of the branch layer among shareable layers
  int lr_total = 1;  // shareable layer count at decision time
};

// acc * (1 - g_th) + (lr_index / lr_total) * g_th
double goodness(const GoodnessInput& in, const GoodnessParams& p);

double mae(std::span<const double> y, std::span<const double> y_hat);
double mse(std::span<const double> y, std::span<const double> y_hat);
double rmse(std::span<const double> y, std::span<const double> y_hat);
// 1 - SSres/SStot. Constant y with nonzero residuals is undefined and throws;
// constant y with a perfect fit returns 1.
double r2(std::span<const double> y, std::span<const double> y_hat);

// Normalized validation score in [0, 1]. Classification: fraction correct
// (argmax for multi-class, 0.5 threshold for a single sigmoid output).
// Regression: max(0, 1 - mae / target_range). Constant regression targets
// score 0 and set *warned.
double task_score(const std::vector<std::vector<double>>& predictions,
                  const std::vector<std::vector<double>>& targets,
                  const TaskInfo& task, bool* warned = nullptr);

}  // namespace ilash
