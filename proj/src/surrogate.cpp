#include "ilash/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ilash/metrics.hpp"
#include "ilash/util.hpp"

namespace ilash {

const char* to_string(SurrogateKind k) {
  switch (k) {
    case SurrogateKind::DecisionTree: return "decision_tree";
    case SurrogateKind::RandomForest: return "random_forest";
    case SurrogateKind::Linear: return "linear";
    case SurrogateKind::GradientBoosting: return "gradient_boosting";
    case SurrogateKind::Replay: return "replay";
  }
  return "?";
}

SurrogateKind surrogate_kind_from_string(const std::string& s) {
  for (SurrogateKind k : {SurrogateKind::DecisionTree, SurrogateKind::RandomForest,
                          SurrogateKind::Linear, SurrogateKind::GradientBoosting,
                          SurrogateKind::Replay}) {
    if (s == to_string(k)) return k;
  }
  // CLI shorthand.
  if (s == "dt") return SurrogateKind::DecisionTree;
  if (s == "rf") return SurrogateKind::RandomForest;
  if (s == "gbm") return SurrogateKind::GradientBoosting;
  throw std::invalid_argument("unknown surrogate kind: " + s);
}

namespace {

void records_to_matrix(const std::vector<BranchRecord>& records,
                       std::vector<std::vector<double>>& x, std::vector<double>& y) {
  x.clear();
  y.clear();
  x.reserve(records.size());
  y.reserve(records.size());
  for (const BranchRecord& r : records) {
    const auto f = r.features();
    x.emplace_back(f.begin(), f.end());
    y.push_back(r.gn);
  }
}

void require_nonempty(const std::vector<BranchRecord>& records, const char* what) {
  if (records.empty()) {
    throw std::invalid_argument(std::string(what) + ": empty training set");
  }
}

void check_width(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": feature width " +
                                std::to_string(got) + ", expected " + std::to_string(want));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Decision tree

void DecisionTreeRegressor::fit(const std::vector<BranchRecord>& records) {
  require_nonempty(records, "decision tree");
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  records_to_matrix(records, x, y);
  fit_matrix(x, y);
}

void DecisionTreeRegressor::fit_matrix(const std::vector<std::vector<double>>& x,
                                       const std::vector<double>& y, int max_features,
                                       std::mt19937_64* rng) {
  if (x.empty() || x.size() != y.size()) {
    throw std::invalid_argument("decision tree: bad training matrix");
  }
  nodes_.clear();
  width_ = x.front().size();
  std::vector<int> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  build(x, y, idx, 0, static_cast<int>(idx.size()), 0, max_features, rng);
}

int DecisionTreeRegressor::build(const std::vector<std::vector<double>>& x,
                                 const std::vector<double>& y, std::vector<int>& idx,
                                 int begin, int end, int depth, int max_features,
                                 std::mt19937_64* rng) {
  const int n = end - begin;
  double sum = 0.0, sumsq = 0.0;
  for (int i = begin; i < end; ++i) {
    const double v = y[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    sum += v;
    sumsq += v * v;
  }
  const double node_sse = std::max(sumsq - sum * sum / n, 0.0);

  const int node_id = static_cast<int>(nodes_.size());
  TreeNode node;
  node.value = sum / n;
  nodes_.push_back(node);

  const bool depth_capped = params_.max_depth >= 0 && depth >= params_.max_depth;
  if (n < params_.min_samples_split || node_sse <= 1e-24 || depth_capped) {
    return node_id;
  }

  std::vector<int> feats;
  if (max_features > 0 && max_features < static_cast<int>(width_)) {
    std::vector<int> all(width_);
    std::iota(all.begin(), all.end(), 0);
    std::sample(all.begin(), all.end(), std::back_inserter(feats),
                static_cast<std::size_t>(max_features), *rng);
  } else {
    feats.resize(width_);
    std::iota(feats.begin(), feats.end(), 0);
  }

  // Best split by squared error; scanning features ascending with strict
  // improvement keeps the lowest feature / lowest threshold on ties.
  int best_feature = -1;
  double best_threshold = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> rows(static_cast<std::size_t>(n));
  for (int f : feats) {
    for (int i = 0; i < n; ++i) {
      const int r = idx[static_cast<std::size_t>(begin + i)];
      rows[static_cast<std::size_t>(i)] = {
          x[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)],
          y[static_cast<std::size_t>(r)]};
    }
    std::sort(rows.begin(), rows.end());
    double lsum = 0.0, lsumsq = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      const double yv = rows[static_cast<std::size_t>(i)].second;
      lsum += yv;
      lsumsq += yv * yv;
      if (rows[static_cast<std::size_t>(i)].first ==
          rows[static_cast<std::size_t>(i + 1)].first) {
        continue;
      }
      const int ln = i + 1, rn = n - ln;
      const double rsum = sum - lsum, rsumsq = sumsq - lsumsq;
      const double cost = std::max(lsumsq - lsum * lsum / ln, 0.0) +
                          std::max(rsumsq - rsum * rsum / rn, 0.0);
      if (cost < best_cost) {
        best_cost = cost;
        best_feature = f;
        best_threshold = (rows[static_cast<std::size_t>(i)].first +
                          rows[static_cast<std::size_t>(i + 1)].first) /
                         2.0;
      }
    }
  }
  if (best_feature < 0) return node_id;  // nothing separable in the feature pool

  const auto mid =
      std::stable_partition(idx.begin() + begin, idx.begin() + end, [&](int r) {
        return x[static_cast<std::size_t>(r)][static_cast<std::size_t>(best_feature)] <=
               best_threshold;
      });
  const int split_at = static_cast<int>(mid - idx.begin());
  nodes_[static_cast<std::size_t>(node_id)].feature = best_feature;
  nodes_[static_cast<std::size_t>(node_id)].threshold = best_threshold;
  const int left = build(x, y, idx, begin, split_at, depth + 1, max_features, rng);
  nodes_[static_cast<std::size_t>(node_id)].left = left;
  const int right = build(x, y, idx, split_at, end, depth + 1, max_features, rng);
  nodes_[static_cast<std::size_t>(node_id)].right = right;
  return node_id;
}

double DecisionTreeRegressor::predict(std::span<const double> features) const {
  if (nodes_.empty()) throw std::logic_error("decision tree: predict before fit");
  check_width(features.size(), width_, "decision tree");
  int at = 0;
  while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
    const TreeNode& nd = nodes_[static_cast<std::size_t>(at)];
    at = features[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes_[static_cast<std::size_t>(at)].value;
}

nlohmann::ordered_json DecisionTreeRegressor::to_json() const {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const TreeNode& n : nodes_) {
    nodes.push_back({{"f", n.feature},
                     {"t", n.threshold},
                     {"l", n.left},
                     {"r", n.right},
                     {"v", n.value}});
  }
  return {{"schema_version", 1},
          {"kind", to_string(kind())},
          {"feature_width", width_},
          {"min_samples_split", params_.min_samples_split},
          {"max_depth", params_.max_depth},
          {"nodes", std::move(nodes)}};
}

DecisionTreeRegressor DecisionTreeRegressor::tree_from_json(const nlohmann::json& j) {
  DecisionTreeParams params;
  params.min_samples_split = j.at("min_samples_split").get<int>();
  params.max_depth = j.at("max_depth").get<int>();
  DecisionTreeRegressor t(params);
  t.width_ = j.at("feature_width").get<std::size_t>();
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at("f").get<int>();
    node.threshold = n.at("t").get<double>();
    node.left = n.at("l").get<int>();
    node.right = n.at("r").get<int>();
    node.value = n.at("v").get<double>();
    t.nodes_.push_back(node);
  }
  if (t.nodes_.empty()) throw std::invalid_argument("decision tree json: no nodes");
  return t;
}

// ---------------------------------------------------------------------------
// Random forest

void RandomForestRegressor::fit(const std::vector<BranchRecord>& records) {
  require_nonempty(records, "random forest");
  if (params_.n_estimators < 1) {
    throw std::invalid_argument("random forest: n_estimators must be >= 1");
  }
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  records_to_matrix(records, x, y);
  const std::size_t width = x.front().size();
  const int max_features =
      params_.sqrt_features
          ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(width))))
          : 0;

  trees_.clear();
  trees_.reserve(static_cast<std::size_t>(params_.n_estimators));
  for (int t = 0; t < params_.n_estimators; ++t) {
    std::mt19937_64 rng(mix_seed(params_.seed, static_cast<std::uint64_t>(t), 0xF07E57));
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    if (params_.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
      xs.reserve(x.size());
      ys.reserve(y.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t r = pick(rng);
        xs.push_back(x[r]);
        ys.push_back(y[r]);
      }
    } else {
      xs = x;
      ys = y;
    }
    DecisionTreeRegressor tree(DecisionTreeParams{params_.min_samples_split, -1});
    tree.fit_matrix(xs, ys, max_features, &rng);
    trees_.push_back(std::move(tree));
  }
}

double RandomForestRegressor::predict(std::span<const double> features) const {
  if (trees_.empty()) throw std::logic_error("random forest: predict before fit");
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(features);
  return sum / static_cast<double>(trees_.size());
}

nlohmann::ordered_json RandomForestRegressor::to_json() const {
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"schema_version", 1},
          {"kind", to_string(kind())},
          {"n_estimators", params_.n_estimators},
          {"bootstrap", params_.bootstrap},
          {"sqrt_features", params_.sqrt_features},
          {"min_samples_split", params_.min_samples_split},
          {"seed", params_.seed},
          {"trees", std::move(trees)}};
}

RandomForestRegressor RandomForestRegressor::forest_from_json(const nlohmann::json& j) {
  RandomForestParams params;
  params.n_estimators = j.at("n_estimators").get<int>();
  params.bootstrap = j.at("bootstrap").get<bool>();
  params.sqrt_features = j.at("sqrt_features").get<bool>();
  params.min_samples_split = j.at("min_samples_split").get<int>();
  params.seed = j.at("seed").get<std::uint64_t>();
  RandomForestRegressor f(params);
  for (const auto& t : j.at("trees")) {
    f.trees_.push_back(DecisionTreeRegressor::tree_from_json(t));
  }
  if (f.trees_.empty()) throw std::invalid_argument("random forest json: no trees");
  return f;
}

// ---------------------------------------------------------------------------
// Linear least squares

namespace {

// Gaussian elimination with partial pivoting; false when singular.
bool solve_linear_system(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& out) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double m = a[r][col] / a[col][col];
      if (m == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= m * a[col][c];
      b[r] -= m * b[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * out[c];
    out[r] = acc / a[r][r];
  }
  return true;
}

}  // namespace

void LinearRegressor::fit(const std::vector<BranchRecord>& records) {
  require_nonempty(records, "linear regressor");
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  records_to_matrix(records, x, y);
  fit_matrix(x, y);
}

void LinearRegressor::fit_matrix(const std::vector<std::vector<double>>& x,
                                 const std::vector<double>& y) {
  if (x.empty() || x.size() != y.size()) {
    throw std::invalid_argument("linear regressor: bad training matrix");
  }
  const std::size_t d = x.front().size();
  const std::size_t m = d + 1;  // + intercept
  std::vector<std::vector<double>> ata(m, std::vector<double>(m, 0.0));
  std::vector<double> atb(m, 0.0);
  for (std::size_t r = 0; r < x.size(); ++r) {
    for (std::size_t i = 0; i <= d; ++i) {
      const double xi = i < d ? x[r][i] : 1.0;
      atb[i] += xi * y[r];
      for (std::size_t j = i; j <= d; ++j) {
        const double xj = j < d ? x[r][j] : 1.0;
        ata[i][j] += xi * xj;
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < i; ++j) ata[i][j] = ata[j][i];
  }

  std::vector<double> beta;
  if (!solve_linear_system(ata, atb, beta)) {
    // Ridge fallback on rank deficiency.
    for (std::size_t i = 0; i < m; ++i) ata[i][i] += 1e-8;
    if (!solve_linear_system(ata, atb, beta)) {
      throw std::runtime_error("linear regressor: singular system despite ridge fallback");
    }
  }
  coef_.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(d));
  intercept_ = beta[d];
}

double LinearRegressor::predict(std::span<const double> features) const {
  if (coef_.empty()) throw std::logic_error("linear regressor: predict before fit");
  check_width(features.size(), coef_.size(), "linear regressor");
  double acc = intercept_;
  for (std::size_t i = 0; i < coef_.size(); ++i) acc += coef_[i] * features[i];
  return acc;
}

nlohmann::ordered_json LinearRegressor::to_json() const {
  return {{"schema_version", 1},
          {"kind", to_string(kind())},
          {"coef", coef_},
          {"intercept", intercept_}};
}

LinearRegressor LinearRegressor::linear_from_json(const nlohmann::json& j) {
  LinearRegressor l;
  l.coef_ = j.at("coef").get<std::vector<double>>();
  l.intercept_ = j.at("intercept").get<double>();
  return l;
}

// ---------------------------------------------------------------------------
// Gradient boosting

void GradientBoostingRegressor::fit(const std::vector<BranchRecord>& records) {
  require_nonempty(records, "gradient boosting");
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  records_to_matrix(records, x, y);
  fit_matrix(x, y);
}

void GradientBoostingRegressor::fit_matrix(const std::vector<std::vector<double>>& x,
                                           const std::vector<double>& y) {
  if (x.empty() || x.size() != y.size()) {
    throw std::invalid_argument("gradient boosting: bad training matrix");
  }
  if (params_.n_estimators < 0 || params_.learning_rate < 0.0) {
    throw std::invalid_argument("gradient boosting: bad parameters");
  }
  trees_.clear();
  stage_losses_.clear();
  base_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  std::vector<double> residual(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - base_;

  auto current_mse = [&] {
    double s = 0.0;
    for (double r : residual) s += r * r;
    return s / static_cast<double>(residual.size());
  };

  for (int stage = 0; stage < params_.n_estimators; ++stage) {
    DecisionTreeRegressor tree(DecisionTreeParams{2, params_.max_depth});
    tree.fit_matrix(x, residual);
    for (std::size_t i = 0; i < residual.size(); ++i) {
      residual[i] -= params_.learning_rate * tree.predict(x[i]);
    }
    trees_.push_back(std::move(tree));
    stage_losses_.push_back(current_mse());
  }
}

double GradientBoostingRegressor::predict(std::span<const double> features) const {
  double acc = base_;
  for (const auto& t : trees_) acc += params_.learning_rate * t.predict(features);
  return acc;
}

nlohmann::ordered_json GradientBoostingRegressor::to_json() const {
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"schema_version", 1},
          {"kind", to_string(kind())},
          {"base", base_},
          {"n_estimators", params_.n_estimators},
          {"learning_rate", params_.learning_rate},
          {"max_depth", params_.max_depth},
          {"stage_losses", stage_losses_},
          {"trees", std::move(trees)}};
}

GradientBoostingRegressor GradientBoostingRegressor::gbm_from_json(const nlohmann::json& j) {
  GradientBoostingParams params;
  params.n_estimators = j.at("n_estimators").get<int>();
  params.learning_rate = j.at("learning_rate").get<double>();
  params.max_depth = j.at("max_depth").get<int>();
  GradientBoostingRegressor g(params);
  g.base_ = j.at("base").get<double>();
  g.stage_losses_ = j.at("stage_losses").get<std::vector<double>>();
  for (const auto& t : j.at("trees")) {
    g.trees_.push_back(DecisionTreeRegressor::tree_from_json(t));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Replay table

void ReplaySurrogate::fit(const std::vector<BranchRecord>& records) {
  require_nonempty(records, "replay surrogate");
  table_.clear();
  for (const BranchRecord& r : records) {
    const auto f = r.features();
    std::vector<double> key(f.begin(), f.end());
    auto [it, inserted] = table_.emplace(std::move(key), r.gn);
    if (!inserted && std::abs(it->second - r.gn) > 1e-12) {
      throw std::invalid_argument(
          "replay surrogate: conflicting goodness for an identical feature row");
    }
  }
}

double ReplaySurrogate::predict(std::span<const double> features) const {
  const std::vector<double> key(features.begin(), features.end());
  auto it = table_.find(key);
  if (it == table_.end()) {
    throw std::out_of_range("replay surrogate: feature row not in the table");
  }
  return it->second;
}

nlohmann::ordered_json ReplaySurrogate::to_json() const {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& [key, gn] : table_) {
    nlohmann::ordered_json row = key;
    row.push_back(gn);
    rows.push_back(std::move(row));
  }
  return {{"schema_version", 1}, {"kind", to_string(kind())}, {"rows", std::move(rows)}};
}

ReplaySurrogate ReplaySurrogate::replay_from_json(const nlohmann::json& j) {
  ReplaySurrogate r;
  for (const auto& row : j.at("rows")) {
    std::vector<double> key = row.get<std::vector<double>>();
    const double gn = key.back();
    key.pop_back();
    r.table_[std::move(key)] = gn;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Factories and the evaluation harness

std::unique_ptr<SurrogateModel> SurrogateModel::from_json(const nlohmann::json& j) {
  switch (surrogate_kind_from_string(j.at("kind").get<std::string>())) {
    case SurrogateKind::DecisionTree:
      return std::make_unique<DecisionTreeRegressor>(
          DecisionTreeRegressor::tree_from_json(j));
    case SurrogateKind::RandomForest:
      return std::make_unique<RandomForestRegressor>(
          RandomForestRegressor::forest_from_json(j));
    case SurrogateKind::Linear:
      return std::make_unique<LinearRegressor>(LinearRegressor::linear_from_json(j));
    case SurrogateKind::GradientBoosting:
      return std::make_unique<GradientBoostingRegressor>(
          GradientBoostingRegressor::gbm_from_json(j));
    case SurrogateKind::Replay:
      return std::make_unique<ReplaySurrogate>(ReplaySurrogate::replay_from_json(j));
  }
  throw std::logic_error("unreachable surrogate kind");
}

std::unique_ptr<SurrogateModel> fit_decision_tree(const std::vector<BranchRecord>& records,
                                                  DecisionTreeParams params) {
  auto m = std::make_unique<DecisionTreeRegressor>(params);
  m->fit(records);
  return m;
}

std::unique_ptr<SurrogateModel> fit_random_forest(const std::vector<BranchRecord>& records,
                                                  RandomForestParams params) {
  auto m = std::make_unique<RandomForestRegressor>(params);
  m->fit(records);
  return m;
}

std::unique_ptr<SurrogateModel> fit_linear(const std::vector<BranchRecord>& records) {
  auto m = std::make_unique<LinearRegressor>();
  m->fit(records);
  return m;
}

std::unique_ptr<SurrogateModel> fit_gradient_boosting(
    const std::vector<BranchRecord>& records, GradientBoostingParams params) {
  auto m = std::make_unique<GradientBoostingRegressor>(params);
  m->fit(records);
  return m;
}

std::unique_ptr<SurrogateModel> make_replay_surrogate(
    const std::vector<BranchRecord>& records) {
  auto m = std::make_unique<ReplaySurrogate>();
  m->fit(records);
  return m;
}

std::unique_ptr<SurrogateModel> make_surrogate(SurrogateKind kind, std::uint64_t seed) {
  switch (kind) {
    case SurrogateKind::DecisionTree:
      return std::make_unique<DecisionTreeRegressor>();
    case SurrogateKind::RandomForest: {
      RandomForestParams p;
      p.seed = seed;
      return std::make_unique<RandomForestRegressor>(p);
    }
    case SurrogateKind::Linear:
      return std::make_unique<LinearRegressor>();
    case SurrogateKind::GradientBoosting:
      return std::make_unique<GradientBoostingRegressor>();
    case SurrogateKind::Replay:
      return std::make_unique<ReplaySurrogate>();
  }
  throw std::logic_error("unreachable surrogate kind");
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  return {{"mae", r.mae}, {"mse", r.mse}, {"rmse", r.rmse}, {"r2", r.r2}};
}

LooResult leave_one_out_fit(const std::map<std::string, std::vector<BranchRecord>>& datasets,
                            const std::string& held_out, SurrogateKind kind,
                            std::uint64_t seed) {
  if (datasets.size() < 2) {
    throw std::invalid_argument("leave_one_out_fit: need at least two named datasets");
  }
  if (!datasets.count(held_out)) {
    throw std::invalid_argument("leave_one_out_fit: unknown held-out dataset " + held_out);
  }

  LooResult result;
  std::vector<BranchRecord> merged;
  std::vector<std::string> sources;
  for (const auto& [name, records] : datasets) {
    if (name == held_out) continue;
    result.trained_on.push_back(name);
    for (const BranchRecord& r : records) {
      merged.push_back(r);
      sources.push_back(name);
    }
  }
  if (merged.size() < 2) {
    throw std::invalid_argument("leave_one_out_fit: not enough merged records to split");
  }

  std::vector<std::size_t> order(merged.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(mix_seed(seed, 0x700));
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_train = static_cast<std::size_t>(0.7 * static_cast<double>(merged.size()));
  n_train = std::clamp<std::size_t>(n_train, 1, merged.size() - 1);

  std::vector<BranchRecord> train_rows, val_rows;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t r = order[i];
    if (i < n_train) {
      train_rows.push_back(merged[r]);
      result.train_sources.push_back(sources[r]);
    } else {
      val_rows.push_back(merged[r]);
      result.val_sources.push_back(sources[r]);
    }
  }

  result.model = make_surrogate(kind, seed);
  result.model->fit(train_rows);

  std::vector<double> y, y_hat;
  y.reserve(val_rows.size());
  y_hat.reserve(val_rows.size());
  for (const BranchRecord& r : val_rows) {
    y.push_back(r.gn);
    y_hat.push_back(result.model->predict_record(r));
  }
  result.metrics.mae = mae(y, y_hat);
  result.metrics.mse = mse(y, y_hat);
  result.metrics.rmse = rmse(y, y_hat);
  result.metrics.r2 = r2(y, y_hat);
  return result;
}

}  // namespace ilash
