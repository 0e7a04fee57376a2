#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "motionskill/preprocessing.hpp"

namespace motionskill {

/// Binary targets: 1 = Expert (the positive class), 0 = Novice.
using Labels = std::vector<int>;

struct ClassWeights {
  double negative = 1.0;
  double positive = 1.0;

  double operator()(int label) const noexcept { return label == 1 ? positive : negative; }

  static ClassWeights uniform() { return {}; }
  /// n_total / (2 * n_class) for each class.
  static ClassWeights balanced(std::span<const int> labels);
};

// ---- metrics ---------------------------------------------------------------

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
};

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  double ppv = 0.0;
  double npv = 0.0;
  double recall = 0.0;
  // Set when the ratio had a zero denominator and was reported as 0.
  bool ppv_undefined = false;
  bool npv_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

Metrics metrics_from(const ConfusionMatrix& cm);

struct Evaluation {
  ConfusionMatrix confusion;
  Metrics metrics;
};

Evaluation evaluate(std::span<const int> predictions, std::span<const int> labels);

// ---- fold planning -------------------------------------------------------

enum class Grouping { None, BySubject };

struct CvPlan {
  int k = 10;
  std::vector<int> fold_of;  // sample index -> fold
  bool stratified = true;
  Grouping grouping = Grouping::None;

  std::vector<std::size_t> train_indices(int fold) const;
  std::vector<std::size_t> test_indices(int fold) const;
};

/// Seeded stratified k-fold assignment. With BySubject grouping every sample
/// of a group lands in one fold, and groups are dealt greedily to keep class
/// counts balanced.
CvPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed, Grouping grouping = Grouping::None,
                        std::span<const std::string> groups = {});

// ---- models ------------------------------------------------------------------

class Model {
 public:
  virtual ~Model() = default;
  /// Probability of the positive class for each row.
  virtual Vector predict_proba(const Matrix& X) const = 0;
  virtual std::string name() const = 0;

  /// Threshold 0.5, ties to Expert.
  Labels predict(const Matrix& X) const;
};

struct LinearParams {
  Vector w;
  double b = 0.0;
};

/// Class-weighted mean cross-entropy plus (l2 / 2) ||w||^2. Fills grad when non-null.
double logistic_loss(const LinearParams& p, const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                     double l2, LinearParams* grad = nullptr);

/// Class-weighted mean hinge loss plus ||w||^2 / (2 c). Fills a subgradient when non-null.
double hinge_loss(const LinearParams& p, const Matrix& X, std::span<const int> y, const ClassWeights& cw, double c,
                  LinearParams* grad = nullptr);

class LinearModel final : public Model {
 public:
  enum class Link { Logistic, Margin };

  LinearModel(LinearParams params, Link link, std::vector<double> loss_history)
      : params_(std::move(params)), link_(link), loss_history_(std::move(loss_history)) {}

  Vector predict_proba(const Matrix& X) const override;
  Vector decision_function(const Matrix& X) const;
  std::string name() const override { return link_ == Link::Logistic ? "Logistic Regression" : "SVC"; }

  const LinearParams& params() const noexcept { return params_; }
  const std::vector<double>& loss_history() const noexcept { return loss_history_; }

 private:
  LinearParams params_;
  Link link_;
  std::vector<double> loss_history_;
};

struct LogisticOptions {
  double l2 = 1e-4;
  int epochs = 500;
  double lr = 0.1;
  std::uint64_t seed = 0;
};

struct SvmOptions {
  double c = 100.0;
  int epochs = 500;
  double lr = 0.1;
  std::uint64_t seed = 0;
};

LinearModel train_logistic(const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                           const LogisticOptions& opts = {});
LinearModel train_linear_svm(const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                             const SvmOptions& opts = {});

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  int depth() const;
};

/// Weighted Gini impurity 1 - p^2 - (1-p)^2 of a node holding the given class weight totals.
double gini(double weight_negative, double weight_positive);

struct ForestOptions {
  int n_trees = 100;
  int mtry = 0;        // 0 -> ceil(sqrt(d))
  int max_depth = -1;  // -1 -> unlimited
  int min_leaf = 1;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

class RandomForest final : public Model {
 public:
  explicit RandomForest(std::vector<DecisionTree> trees) : trees_(std::move(trees)) {}
  Vector predict_proba(const Matrix& X) const override;
  std::string name() const override { return "Random Forest"; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
};

RandomForest train_random_forest(const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                                 const ForestOptions& opts = {});

struct BoostOptions {
  int n_rounds = 100;
  int depth = 3;
  double lr = 0.1;
  double lambda_reg = 1.0;
  std::uint64_t seed = 0;
};

class GradientBoostedTrees final : public Model {
 public:
  GradientBoostedTrees(double base_score, std::vector<DecisionTree> trees, std::vector<double> shrinkage,
                       std::vector<double> loss_history)
      : base_score_(base_score), trees_(std::move(trees)), shrinkage_(std::move(shrinkage)),
        loss_history_(std::move(loss_history)) {}

  Vector predict_proba(const Matrix& X) const override;
  Vector margin(const Matrix& X) const;
  std::string name() const override { return "XGBoost"; }

  double base_score() const noexcept { return base_score_; }
  /// Training loss before round 1 and after every round.
  const std::vector<double>& loss_history() const noexcept { return loss_history_; }
  /// Effective step applied to each tree (lr, halved while a round would raise the loss).
  const std::vector<double>& shrinkage() const noexcept { return shrinkage_; }

 private:
  double base_score_;
  std::vector<DecisionTree> trees_;
  std::vector<double> shrinkage_;
  std::vector<double> loss_history_;
};

GradientBoostedTrees train_gbdt(const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                                const BoostOptions& opts = {});

// ---- pipeline ----------------------------------------------------------------

enum class ModelKind { RandomForest, Gbdt, LinearSvm, Logistic, LatentCnn };

ModelKind parse_model_kind(std::string_view text);
std::string_view to_string(ModelKind kind) noexcept;
std::string_view display_name(ModelKind kind) noexcept;

struct LatentCnnOptions {
  int epochs = 150;
  double lr = 0.05;
  double momentum = 0.9;
  int batch_size = 8;
  double l2 = 0.0;  // weight decay added to every parameter's gradient
  bool zero_init = false;
  std::uint64_t seed = 0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::RandomForest;
  ForestOptions forest;
  BoostOptions boost;
  SvmOptions svm;
  LogisticOptions logistic;
  LatentCnnOptions cnn;
  bool class_weighted = true;
};

std::unique_ptr<Model> train_model(const ModelSpec& spec, const Matrix& X, std::span<const int> y,
                                   std::uint64_t seed, std::size_t jobs = 1);

struct PipelineSpec {
  ScalerKind scaler = ScalerKind::Robust;
  bool pca = true;
  int pca_components = 3;
  ModelSpec model;
  bool global_fit = false;  // fit scaler and PCA on all rows instead of per fold
};

nlohmann::json to_json(const PipelineSpec& spec);

struct FoldResult {
  int fold = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  Evaluation eval;
  std::vector<double> explained_variance_ratio;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over folds
};

struct MetricsReport {
  std::string model_name;
  std::string scaler_name;
  bool pca = false;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  MetricSummary accuracy, f1, ppv, npv;
  CvPlan plan;
  nlohmann::json spec;  // pipeline spec and hyperparameters
  nlohmann::json extra;  // pipeline-specific additions
};

MetricSummary summarize(std::span<const double> values);
void finalize_summary(MetricsReport& report);

/// Per fold: fit scaler (and PCA) on training rows only, train, evaluate on held-out rows.
MetricsReport cross_validate(const Matrix& X, std::span<const int> y, const PipelineSpec& spec, const CvPlan& plan,
                             std::uint64_t seed, std::size_t jobs = 1);

nlohmann::json to_json(const MetricsReport& report);

}  // namespace motionskill
