#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "motionskill/classifiers.hpp"
#include "motionskill/random.hpp"
#include "test_util.hpp"

using namespace motionskill;

namespace {

struct Blobs {
  Matrix X;
  Labels y;
};

// Two Gaussian blobs whose means differ by `gap` along every axis.
Blobs blobs(std::uint64_t seed, int n_pos, int n_neg, int d, double gap) {
  Rng rng(seed);
  Blobs b{Matrix(n_pos + n_neg, d), {}};
  for (int i = 0; i < n_pos + n_neg; ++i) {
    const int label = i < n_pos ? 1 : 0;
    for (int j = 0; j < d; ++j) b.X(i, j) = rng.normal() + (label ? gap : 0.0);
    b.y.push_back(label);
  }
  return b;
}

double accuracy(const Model& m, const Matrix& X, const Labels& y) {
  const Labels p = m.predict(X);
  int hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += p[i] == y[i];
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

double relative_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-12});
}

template <typename Loss>
Vector numeric_gradient(LinearParams p, Loss loss) {
  const double eps = 1e-5;
  Vector g(p.w.size() + 1);
  for (Eigen::Index j = 0; j <= p.w.size(); ++j) {
    double& slot = j < p.w.size() ? p.w[j] : p.b;
    const double keep = slot;
    slot = keep + eps;
    const double up = loss(p);
    slot = keep - eps;
    const double down = loss(p);
    slot = keep;
    g[j] = (up - down) / (2 * eps);
  }
  return g;
}

Vector flatten(const LinearParams& p) {
  Vector v(p.w.size() + 1);
  v << p.w, p.b;
  return v;
}

}  // namespace

TEST(Metrics, HandComputedConfusion) {
  const auto m = metrics_from({7, 1, 2, 4});
  EXPECT_NEAR(m.accuracy, 11.0 / 14.0, 1e-12);
  EXPECT_NEAR(m.accuracy, 0.7857, 1e-4);
  EXPECT_NEAR(m.ppv, 0.8750, 1e-4);
  EXPECT_NEAR(m.npv, 0.6667, 1e-4);
  EXPECT_NEAR(m.f1, 0.8235, 1e-4);
  EXPECT_NEAR(m.f1, 2 * m.ppv * m.recall / (m.ppv + m.recall), 1e-12);
}

TEST(Metrics, EvaluateCountsAndConventions) {
  const std::vector<int> labels = {1, 1, 0, 0, 1};
  auto perfect = evaluate(labels, labels);
  EXPECT_EQ(perfect.metrics.accuracy, 1.0);
  EXPECT_EQ(perfect.metrics.f1, 1.0);
  EXPECT_EQ(perfect.metrics.ppv, 1.0);
  EXPECT_EQ(perfect.metrics.npv, 1.0);

  const std::vector<int> none = {0, 0, 0, 0, 0};
  auto neg = evaluate(none, labels);
  EXPECT_EQ(neg.metrics.ppv, 0.0);
  EXPECT_TRUE(neg.metrics.ppv_undefined);
  EXPECT_NEAR(neg.metrics.npv, 2.0 / 5.0, 1e-12);
  EXPECT_FALSE(neg.metrics.npv_undefined);
  EXPECT_EQ(neg.confusion.total(), 5u);

  const std::vector<int> pred = {1, 0, 1, 0, 1};
  auto e = evaluate(pred, labels);
  EXPECT_EQ(e.confusion.tp, 2u);
  EXPECT_EQ(e.confusion.fp, 1u);
  EXPECT_EQ(e.confusion.fn, 1u);
  EXPECT_EQ(e.confusion.tn, 1u);

  const std::vector<int> short_pred = {1, 0};
  EXPECT_ERROR_KIND(evaluate(short_pred, labels), ErrorKind::LengthMismatch);
}

TEST(ClassWeightsTest, Balanced) {
  const std::vector<int> y = {1, 0, 0, 0};
  const auto w = ClassWeights::balanced(y);
  EXPECT_NEAR(w.positive, 4.0 / 2.0, 1e-12);
  EXPECT_NEAR(w.negative, 4.0 / 6.0, 1e-12);
}

TEST(Folds, TwentyEightyExact) {
  Labels y(100, 0);
  std::fill(y.begin(), y.begin() + 20, 1);
  const auto plan = stratified_kfold(y, 10, 42);
  ASSERT_EQ(plan.fold_of.size(), 100u);
  std::set<std::size_t> seen;
  for (int f = 0; f < 10; ++f) {
    const auto test = plan.test_indices(f);
    const auto train = plan.train_indices(f);
    EXPECT_EQ(test.size() + train.size(), 100u);
    int pos = 0;
    for (auto i : test) {
      pos += y[i];
      EXPECT_TRUE(seen.insert(i).second);
    }
    EXPECT_EQ(pos, 2);
    EXPECT_EQ(static_cast<int>(test.size()) - pos, 8);
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(stratified_kfold(y, 10, 42).fold_of, plan.fold_of);
  EXPECT_NE(stratified_kfold(y, 10, 43).fold_of, plan.fold_of);
}

TEST(Folds, UnevenCountsWithinOne) {
  Labels y(37, 0);
  std::fill(y.begin(), y.begin() + 13, 1);
  const auto plan = stratified_kfold(y, 5, 1);
  for (int f = 0; f < 5; ++f) {
    int pos = 0, neg = 0;
    for (auto i : plan.test_indices(f)) (y[i] ? pos : neg)++;
    EXPECT_NEAR(pos, 13.0 / 5, 1.0);
    EXPECT_NEAR(neg, 24.0 / 5, 1.0);
  }
}

TEST(Folds, Errors) {
  Labels y(20, 0);
  std::fill(y.begin(), y.begin() + 10, 1);
  EXPECT_ERROR_KIND(stratified_kfold(y, 1, 0), ErrorKind::TooFewSamplesPerClass);
  EXPECT_ERROR_KIND(stratified_kfold(y, 11, 0), ErrorKind::TooFewSamplesPerClass);
}

TEST(Folds, BySubjectKeepsGroupsTogether) {
  Labels y;
  std::vector<std::string> groups;
  for (int s = 0; s < 20; ++s) {
    for (int r = 0; r < 3; ++r) {
      y.push_back(s < 10 ? 1 : 0);
      groups.push_back("S" + std::to_string(s));
    }
  }
  const auto plan = stratified_kfold(y, 5, 7, Grouping::BySubject, groups);
  std::map<std::string, int> fold_of_group;
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto [it, fresh] = fold_of_group.emplace(groups[i], plan.fold_of[i]);
    if (!fresh) EXPECT_EQ(it->second, plan.fold_of[i]) << groups[i];
  }
  for (int f = 0; f < 5; ++f) {
    int pos = 0;
    for (auto i : plan.test_indices(f)) pos += y[i];
    EXPECT_EQ(pos, 6);
    EXPECT_EQ(plan.test_indices(f).size(), 12u);
  }
}

TEST(Logistic, ZeroModelIsHalf) {
  LinearParams p{Vector::Zero(3), 0.0};
  LinearModel m(p, LinearModel::Link::Logistic, {});
  const Vector proba = m.predict_proba(Matrix::Random(5, 3) * 10);
  for (double v : proba) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  const auto b = blobs(5, 15, 25, 4, 1.0);
  const auto cw = ClassWeights::balanced(b.y);
  Rng rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    LinearParams p{Vector(4), rng.normal()};
    for (int j = 0; j < 4; ++j) p.w[j] = trial == 0 ? 0.0 : rng.normal();
    if (trial == 0) p.b = 0.0;
    LinearParams grad;
    logistic_loss(p, b.X, b.y, cw, 1e-2, &grad);
    const Vector fd = numeric_gradient(p, [&](const LinearParams& q) { return logistic_loss(q, b.X, b.y, cw, 1e-2); });
    EXPECT_LT(relative_error(flatten(grad), fd), 1e-6);
  }
}

TEST(Logistic, SeparableOneDimensional) {
  Matrix X(20, 1);
  Labels y;
  for (int i = 0; i < 20; ++i) {
    X(i, 0) = i < 10 ? -1.0 - 0.1 * i : 1.0 + 0.1 * i;
    y.push_back(i < 10 ? 0 : 1);
  }
  const auto m = train_logistic(X, y, ClassWeights::uniform());
  EXPECT_EQ(accuracy(m, X, y), 1.0);
  ASSERT_GE(m.loss_history().size(), 2u);
  EXPECT_LE(m.loss_history().back(), m.loss_history().front());
}

TEST(Logistic, Errors) {
  const Matrix X = Matrix::Random(4, 2);
  const Labels y = {1, 1, 1, 1};
  EXPECT_ERROR_KIND(train_logistic(X, y, ClassWeights::uniform()), ErrorKind::SingleClassInput);
  EXPECT_ERROR_KIND(train_linear_svm(X, y, ClassWeights::uniform()), ErrorKind::SingleClassInput);
  EXPECT_ERROR_KIND(train_random_forest(X, y, ClassWeights::uniform()), ErrorKind::SingleClassInput);
  EXPECT_ERROR_KIND(train_gbdt(X, y, ClassWeights::uniform()), ErrorKind::SingleClassInput);
  Matrix bad = X;
  bad(0, 0) = INFINITY;
  const Labels mixed = {1, 0, 1, 0};
  EXPECT_ERROR_KIND(train_logistic(bad, mixed, ClassWeights::uniform()), ErrorKind::NonFiniteLoss);
}

TEST(Svm, SubgradientMatchesFiniteDifferencesAwayFromHinge) {
  const auto b = blobs(6, 15, 25, 3, 1.5);
  const auto cw = ClassWeights::balanced(b.y);
  Rng rng(23);
  int checked = 0;
  while (checked < 3) {
    LinearParams p{Vector(3), rng.normal(0, 0.5)};
    for (int j = 0; j < 3; ++j) p.w[j] = rng.normal(0, 0.5);
    const Vector score = b.X * p.w;
    bool near_kink = false;
    for (Eigen::Index i = 0; i < score.size(); ++i) {
      const double s = (b.y[i] ? 1.0 : -1.0) * (score[i] + p.b);
      near_kink |= std::abs(1.0 - s) < 1e-3;
    }
    if (near_kink) continue;
    LinearParams grad;
    hinge_loss(p, b.X, b.y, cw, 10.0, &grad);
    const Vector fd = numeric_gradient(p, [&](const LinearParams& q) { return hinge_loss(q, b.X, b.y, cw, 10.0); });
    EXPECT_LT(relative_error(flatten(grad), fd), 1e-6);
    ++checked;
  }
}

TEST(Svm, SeparableWithMargin) {
  const auto b = blobs(8, 20, 20, 2, 8.0);
  const auto m = train_linear_svm(b.X, b.y, ClassWeights::uniform());
  const Vector score = m.decision_function(b.X);
  for (std::size_t i = 0; i < b.y.size(); ++i) EXPECT_EQ(score[i] >= 0.0, b.y[i] == 1) << i;
}

TEST(Svm, DuplicatingSamplesKeepsDecision) {
  const auto b = blobs(9, 15, 15, 3, 1.0);
  Matrix X2(60, 3);
  X2 << b.X, b.X;
  Labels y2 = b.y;
  y2.insert(y2.end(), b.y.begin(), b.y.end());
  const auto once = train_linear_svm(b.X, b.y, ClassWeights::uniform());
  const auto twice = train_linear_svm(X2, y2, ClassWeights::uniform());
  EXPECT_LT((once.decision_function(b.X) - twice.decision_function(b.X)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Svm, ClassWeightsHelpMinorityRecall) {
  const auto b = blobs(10, 12, 88, 2, 1.2);
  auto recall = [&](const Model& m) {
    const auto p = m.predict(b.X);
    int hit = 0;
    for (int i = 0; i < 12; ++i) hit += p[i];
    return hit / 12.0;
  };
  const auto plain = train_linear_svm(b.X, b.y, ClassWeights::uniform());
  ClassWeights doubled;
  doubled.positive = 2.0;
  const auto weighted = train_linear_svm(b.X, b.y, doubled);
  EXPECT_GE(recall(weighted), recall(plain));
}

TEST(Forest, GiniAndStump) {
  EXPECT_EQ(gini(0.0, 5.0), 0.0);
  EXPECT_EQ(gini(3.0, 0.0), 0.0);
  EXPECT_NEAR(gini(1.0, 1.0), 0.5, 1e-12);

  Matrix X(10, 1);
  Labels y;
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = i;
    y.push_back(i >= 5);
  }
  ForestOptions opts;
  opts.n_trees = 1;
  opts.max_depth = 1;
  opts.bootstrap = false;
  const auto rf = train_random_forest(X, y, ClassWeights::uniform(), opts);
  EXPECT_EQ(rf.trees().front().depth(), 1);
  EXPECT_EQ(accuracy(rf, X, y), 1.0);
}

TEST(Forest, DeterministicAndScaleInvariant) {
  const auto b = blobs(12, 30, 30, 4, 1.0);
  ForestOptions opts;
  opts.seed = 5;
  opts.n_trees = 25;
  const auto a = train_random_forest(b.X, b.y, ClassWeights::uniform(), opts);
  const auto c = train_random_forest(b.X, b.y, ClassWeights::uniform(), opts);
  EXPECT_EQ(a.predict_proba(b.X), c.predict_proba(b.X));
  const Vector proba = a.predict_proba(b.X);
  for (double v : proba) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_NEAR(v * 25, std::round(v * 25), 1e-9);
  }
  const auto scaled = train_random_forest(b.X * 1000.0, b.y, ClassWeights::uniform(), opts);
  EXPECT_EQ(scaled.predict(b.X * 1000.0), a.predict(b.X));
  opts.jobs = 4;
  const auto parallel = train_random_forest(b.X, b.y, ClassWeights::uniform(), opts);
  EXPECT_EQ(parallel.predict_proba(b.X), proba);
}

TEST(Boosting, ZeroRoundsIsWeightedPrior) {
  const auto b = blobs(13, 10, 30, 2, 1.0);
  BoostOptions opts;
  opts.n_rounds = 0;
  const auto uniform = train_gbdt(b.X, b.y, ClassWeights::uniform(), opts);
  EXPECT_NEAR(uniform.base_score(), std::log(10.0 / 30.0), 1e-9);
  const Vector p = uniform.predict_proba(b.X);
  EXPECT_NEAR(p.minCoeff(), 0.25, 1e-9);
  EXPECT_NEAR(p.maxCoeff(), 0.25, 1e-9);
  const auto balanced = train_gbdt(b.X, b.y, ClassWeights::balanced(b.y), opts);
  EXPECT_NEAR(balanced.base_score(), 0.0, 1e-9);
}

TEST(Boosting, LossNeverIncreases) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto b = blobs(seed, 20, 35, 3, 0.5);
    BoostOptions opts;
    opts.n_rounds = 40;
    opts.lr = 0.8;
    const auto m = train_gbdt(b.X, b.y, ClassWeights::balanced(b.y), opts);
    ASSERT_EQ(m.loss_history().size(), 41u);
    for (std::size_t r = 1; r < m.loss_history().size(); ++r) EXPECT_LE(m.loss_history()[r], m.loss_history()[r - 1] + 1e-12);
  }
}

TEST(Boosting, StepFunctionWithinTwentyRounds) {
  Matrix X(30, 1);
  Labels y;
  for (int i = 0; i < 30; ++i) {
    X(i, 0) = i * 0.37;
    y.push_back(i % 10 >= 5);
  }
  BoostOptions opts;
  opts.n_rounds = 20;
  const auto m = train_gbdt(X, y, ClassWeights::uniform(), opts);
  EXPECT_EQ(accuracy(m, X, y), 1.0);
}

TEST(CrossValidate, SeparableBlobs) {
  const auto b = blobs(42, 100, 100, 8, 1.2);
  PipelineSpec spec;
  spec.model.forest.n_trees = 50;
  const auto plan = stratified_kfold(b.y, 10, 42);
  const auto report = cross_validate(b.X, b.y, spec, plan, 42);
  EXPECT_GE(report.accuracy.mean, 0.90);
  EXPECT_EQ(report.folds.size(), 10u);
  EXPECT_EQ(report.model_name, "Random Forest");
  EXPECT_EQ(report.scaler_name, "Robust Scaler");
  EXPECT_TRUE(report.pca);
  for (const auto& f : report.folds) {
    const auto& cm = f.eval.confusion;
    EXPECT_EQ(cm.total(), f.n_test);
    EXPECT_NEAR(f.eval.metrics.accuracy, static_cast<double>(cm.tp + cm.tn) / cm.total(), 1e-12);
    for (double v : {f.eval.metrics.accuracy, f.eval.metrics.f1, f.eval.metrics.ppv, f.eval.metrics.npv}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_GE(report.accuracy.std, 0.0);
  EXPECT_EQ(to_json(report).dump(), to_json(cross_validate(b.X, b.y, spec, plan, 42, 4)).dump());
}

TEST(CrossValidate, ShuffledLabelsAtChance) {
  auto b = blobs(42, 100, 100, 8, 1.2);
  Rng rng(13);
  rng.shuffle(std::span<int>(b.y));
  PipelineSpec spec;
  spec.model.forest.n_trees = 50;
  const auto report = cross_validate(b.X, b.y, spec, stratified_kfold(b.y, 10, 13), 13);
  EXPECT_GE(report.accuracy.mean, 0.35);
  EXPECT_LE(report.accuracy.mean, 0.65);
}

TEST(CrossValidate, HeldOutRowsDoNotLeakIntoPreprocessing) {
  const auto b = blobs(3, 20, 20, 5, 1.0);
  PipelineSpec spec;
  spec.scaler = ScalerKind::Standard;
  spec.model.kind = ModelKind::Logistic;
  const auto plan = stratified_kfold(b.y, 4, 3);
  const auto base = cross_validate(b.X, b.y, spec, plan, 3);
  Matrix perturbed = b.X;
  const auto held = plan.test_indices(2).front();
  perturbed.row(held) *= 50.0;
  const auto moved = cross_validate(perturbed, b.y, spec, plan, 3);
  EXPECT_EQ(moved.folds[2].explained_variance_ratio, base.folds[2].explained_variance_ratio);
  EXPECT_NE(moved.folds[0].explained_variance_ratio, base.folds[0].explained_variance_ratio);
}

TEST(CrossValidate, EveryModelAndScalerRuns) {
  const auto b = blobs(4, 30, 30, 8, 1.5);
  const auto plan = stratified_kfold(b.y, 5, 4);
  for (auto kind : {ModelKind::RandomForest, ModelKind::Gbdt, ModelKind::LinearSvm, ModelKind::Logistic}) {
    for (auto scaler : {ScalerKind::Standard, ScalerKind::MinMax, ScalerKind::Robust, ScalerKind::PowerYeoJohnson}) {
      PipelineSpec spec;
      spec.model.kind = kind;
      spec.scaler = scaler;
      spec.pca = scaler != ScalerKind::MinMax;
      spec.model.forest.n_trees = 20;
      spec.model.boost.n_rounds = 20;
      const auto report = cross_validate(b.X, b.y, spec, plan, 4);
      EXPECT_GE(report.accuracy.mean, 0.8) << to_string(kind) << " " << to_string(scaler);
    }
  }
  EXPECT_EQ(parse_model_kind("logreg"), ModelKind::Logistic);
  EXPECT_EQ(display_name(ModelKind::Gbdt), "XGBoost");
  EXPECT_ERROR_KIND(parse_model_kind("knn"), ErrorKind::InvalidConfig);
}

TEST(Summary, PopulationStd) {
  const std::vector<double> v = {0.5, 0.7, 0.9};
  const auto s = summarize(v);
  EXPECT_NEAR(s.mean, 0.7, 1e-12);
  EXPECT_NEAR(s.std, std::sqrt(0.08 / 3), 1e-12);
}
