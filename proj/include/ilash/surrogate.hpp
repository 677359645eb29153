#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ilash/encoding.hpp"
#include "json.hpp"

namespace ilash {

enum class SurrogateKind { DecisionTree, RandomForest, Linear, GradientBoosting, Replay };

const char* to_string(SurrogateKind k);
SurrogateKind surrogate_kind_from_string(const std::string& s);

// Regressor mapping (task features + layer encoding) to a goodness estimate.
class SurrogateModel {
 public:
  virtual ~SurrogateModel() = default;
  virtual void fit(const std::vector<BranchRecord>& records) = 0;
  virtual double predict(std::span<const double> features) const = 0;
  virtual SurrogateKind kind() const = 0;
  virtual nlohmann::ordered_json to_json() const = 0;

  double predict_record(const BranchRecord& r) const {
    const auto f = r.features();
    return predict(f);
  }

  static std::unique_ptr<SurrogateModel> from_json(const nlohmann::json& j);
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf mean
};

struct DecisionTreeParams {
  int min_samples_split = 2;
  int max_depth = -1;  // unbounded
};

// CART with the squared-error criterion and exhaustive best splits.
// Thresholds are midpoints of consecutive distinct sorted feature values;
// ties resolve to the lowest feature index, then the lowest threshold.
class DecisionTreeRegressor : public SurrogateModel {
 public:
  explicit DecisionTreeRegressor(DecisionTreeParams params = {}) : params_(params) {}

  void fit(const std::vector<BranchRecord>& records) override;
  // `max_features` > 0 samples that many candidate features per split.
  void fit_matrix(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                  int max_features = 0, std::mt19937_64* rng = nullptr);
  double predict(std::span<const double> features) const override;
  SurrogateKind kind() const override { return SurrogateKind::DecisionTree; }
  nlohmann::ordered_json to_json() const override;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t feature_width() const { return width_; }

  static DecisionTreeRegressor tree_from_json(const nlohmann::json& j);

 private:
  int build(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
            std::vector<int>& idx, int begin, int end, int depth, int max_features,
            std::mt19937_64* rng);

  DecisionTreeParams params_;
  std::vector<TreeNode> nodes_;
  std::size_t width_ = 0;
};

struct RandomForestParams {
  int n_estimators = 100;
  bool bootstrap = true;
  bool sqrt_features = true;  // feature subsample of ceil(sqrt(width)) per split
  int min_samples_split = 2;
  std::uint64_t seed = 0;
};

class RandomForestRegressor : public SurrogateModel {
 public:
  explicit RandomForestRegressor(RandomForestParams params = {}) : params_(params) {}

  void fit(const std::vector<BranchRecord>& records) override;
  double predict(std::span<const double> features) const override;
  SurrogateKind kind() const override { return SurrogateKind::RandomForest; }
  nlohmann::ordered_json to_json() const override;

  const std::vector<DecisionTreeRegressor>& trees() const { return trees_; }

  static RandomForestRegressor forest_from_json(const nlohmann::json& j);

 private:
  RandomForestParams params_;
  std::vector<DecisionTreeRegressor> trees_;
};

// Ordinary least squares with intercept via normal equations; falls back to
// a small ridge term when the system is singular.
class LinearRegressor : public SurrogateModel {
 public:
  void fit(const std::vector<BranchRecord>& records) override;
  void fit_matrix(const std::vector<std::vector<double>>& x, const std::vector<double>& y);
  double predict(std::span<const double> features) const override;
  SurrogateKind kind() const override { return SurrogateKind::Linear; }
  nlohmann::ordered_json to_json() const override;

  const std::vector<double>& coefficients() const { return coef_; }
  double intercept() const { return intercept_; }

  static LinearRegressor linear_from_json(const nlohmann::json& j);

 private:
  std::vector<double> coef_;
  double intercept_ = 0.0;
};

struct GradientBoostingParams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
};

// Stagewise residual fitting with shallow CART trees on squared error.
class GradientBoostingRegressor : public SurrogateModel {
 public:
  explicit GradientBoostingRegressor(GradientBoostingParams params = {}) : params_(params) {}

  void fit(const std::vector<BranchRecord>& records) override;
  void fit_matrix(const std::vector<std::vector<double>>& x, const std::vector<double>& y);
  double predict(std::span<const double> features) const override;
  SurrogateKind kind() const override { return SurrogateKind::GradientBoosting; }
  nlohmann::ordered_json to_json() const override;

  // Training MSE after each stage.
  const std::vector<double>& stage_losses() const { return stage_losses_; }

  static GradientBoostingRegressor gbm_from_json(const nlohmann::json& j);

 private:
  GradientBoostingParams params_;
  double base_ = 0.0;
  std::vector<DecisionTreeRegressor> trees_;
  std::vector<double> stage_losses_;
};

// Exact lookup table over feature vectors; the oracle stand-in used to
// replay a heuristic run through the predictive search.
class ReplaySurrogate : public SurrogateModel {
 public:
  void fit(const std::vector<BranchRecord>& records) override;
  double predict(std::span<const double> features) const override;
  SurrogateKind kind() const override { return SurrogateKind::Replay; }
  nlohmann::ordered_json to_json() const override;

  static ReplaySurrogate replay_from_json(const nlohmann::json& j);

 private:
  std::map<std::vector<double>, double> table_;
};

std::unique_ptr<SurrogateModel> fit_decision_tree(const std::vector<BranchRecord>& records,
                                                  DecisionTreeParams params = {});
std::unique_ptr<SurrogateModel> fit_random_forest(const std::vector<BranchRecord>& records,
                                                  RandomForestParams params = {});
std::unique_ptr<SurrogateModel> fit_linear(const std::vector<BranchRecord>& records);
std::unique_ptr<SurrogateModel> fit_gradient_boosting(
    const std::vector<BranchRecord>& records, GradientBoostingParams params = {});
std::unique_ptr<SurrogateModel> make_replay_surrogate(
    const std::vector<BranchRecord>& records);

// Unfitted model of the given kind with its stock parameters.
std::unique_ptr<SurrogateModel> make_surrogate(SurrogateKind kind, std::uint64_t seed = 0);

struct EvalReport {
  double mae = 0.0, mse = 0.0, rmse = 0.0, r2 = 0.0;
};

nlohmann::ordered_json to_json(const EvalReport& r);

struct LooResult {
  std::unique_ptr<SurrogateModel> model;
  EvalReport metrics;
  std::vector<std::string> trained_on;     // merged dataset names, held-out excluded
  std::vector<std::string> train_sources;  // provenance per training row
  std::vector<std::string> val_sources;    // provenance per validation row
};

// Merges every dataset except `held_out`, splits 7:3 (seeded shuffle), fits
// on the large part and reports the evaluation metrics on the rest.
LooResult leave_one_out_fit(const std::map<std::string, std::vector<BranchRecord>>& datasets,
                            const std::string& held_out, SurrogateKind kind,
                            std::uint64_t seed = 0);

}  // namespace ilash
