#include "motionskill/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "motionskill/dae.hpp"
#include "motionskill/error.hpp"
#include "motionskill/parallel.hpp"
#include "motionskill/random.hpp"

namespace motionskill {

ClassWeights ClassWeights::balanced(std::span<const int> labels) {
  const auto n = static_cast<double>(labels.size());
  const auto pos = static_cast<double>(std::ranges::count(labels, 1));
  const double neg = n - pos;
  if (pos == 0.0 || neg == 0.0) throw Error(ErrorKind::SingleClassInput, "class weights need both classes");
  return {n / (2.0 * neg), n / (2.0 * pos)};
}

// ---- metrics -------------------------------------------------------------------

Metrics metrics_from(const ConfusionMatrix& cm) {
  Metrics m;
  const auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  bool unused = false;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total(), unused);
  m.ppv = ratio(cm.tp, cm.tp + cm.fp, m.ppv_undefined);
  m.npv = ratio(cm.tn, cm.tn + cm.fn, m.npv_undefined);
  m.recall = ratio(cm.tp, cm.tp + cm.fn, m.recall_undefined);
  m.f1_undefined = m.ppv + m.recall == 0.0;
  m.f1 = m.f1_undefined ? 0.0 : 2.0 * m.ppv * m.recall / (m.ppv + m.recall);
  return m;
}

Evaluation evaluate(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                               std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = predictions[i] == 1;
    const bool truth = labels[i] == 1;
    if (pred && truth) ++cm.tp;
    else if (pred) ++cm.fp;
    else if (truth) ++cm.fn;
    else ++cm.tn;
  }
  return {cm, metrics_from(cm)};
}

// ---- folds ---------------------------------------------------------------------

std::vector<std::size_t> CvPlan::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> CvPlan::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

CvPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed, Grouping grouping,
                        std::span<const std::string> groups) {
  if (k < 2) throw Error(ErrorKind::TooFewSamplesPerClass, "k must be at least 2");
  CvPlan plan;
  plan.k = k;
  plan.grouping = grouping;
  plan.fold_of.assign(labels.size(), -1);
  Rng rng(seed);

  if (grouping == Grouping::None) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] == 1 ? 1 : 0].push_back(i);
    for (const auto& members : by_class) {
      if (members.size() < static_cast<std::size_t>(k)) {
        throw Error(ErrorKind::TooFewSamplesPerClass, "each class needs at least k=" + std::to_string(k) +
                                                          " samples, got " + std::to_string(members.size()));
      }
    }
    // Deal each shuffled class round-robin, continuing where the previous
    // class stopped so fold sizes stay within one of each other.
    std::size_t cursor = 0;
    for (auto& members : by_class) {
      rng.shuffle(std::span(members));
      for (auto i : members) plan.fold_of[i] = static_cast<int>(cursor++ % static_cast<std::size_t>(k));
    }
    return plan;
  }

  if (groups.size() != labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "subject grouping needs one group key per sample");
  }
  std::map<std::string, std::vector<std::size_t>> members;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = members.try_emplace(groups[i]);
    if (inserted) order.push_back(groups[i]);
    it->second.push_back(i);
  }
  if (order.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::TooFewSamplesPerClass, "subject grouping needs at least k=" + std::to_string(k) +
                                                      " subjects, got " + std::to_string(order.size()));
  }
  rng.shuffle(std::span(order));
  // Largest groups first so the greedy balance has room to correct.
  std::ranges::stable_sort(order, std::greater{}, [&](const std::string& g) { return members[g].size(); });

  std::vector<std::array<std::size_t, 2>> class_count(static_cast<std::size_t>(k), {0, 0});
  std::vector<std::size_t> total(static_cast<std::size_t>(k), 0);
  for (const auto& g : order) {
    const auto& idx = members[g];
    const auto pos = static_cast<std::size_t>(std::ranges::count_if(idx, [&](std::size_t i) { return labels[i] == 1; }));
    const int cls = 2 * pos >= idx.size() ? 1 : 0;
    std::size_t best = 0;
    for (std::size_t f = 1; f < static_cast<std::size_t>(k); ++f) {
      const auto key = std::pair(class_count[f][cls], total[f]);
      if (key < std::pair(class_count[best][cls], total[best])) best = f;
    }
    for (auto i : idx) {
      plan.fold_of[i] = static_cast<int>(best);
      ++class_count[best][labels[i] == 1 ? 1 : 0];
    }
    total[best] += idx.size();
  }
  return plan;
}

// ---- models --------------------------------------------------------------------

Labels Model::predict(const Matrix& X) const {
  const Vector p = predict_proba(X);
  Labels out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = p[i] >= 0.5 ? 1 : 0;
  return out;
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "rf") return ModelKind::RandomForest;
  if (text == "gbdt") return ModelKind::Gbdt;
  if (text == "svm") return ModelKind::LinearSvm;
  if (text == "logreg") return ModelKind::Logistic;
  if (text == "cnn") return ModelKind::LatentCnn;
  throw Error(ErrorKind::InvalidConfig, "model must be one of rf|gbdt|svm|logreg|cnn");
}

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::RandomForest: return "rf";
    case ModelKind::Gbdt: return "gbdt";
    case ModelKind::LinearSvm: return "svm";
    case ModelKind::Logistic: return "logreg";
    case ModelKind::LatentCnn: return "cnn";
  }
  return "?";
}

std::string_view display_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::RandomForest: return "Random Forest";
    case ModelKind::Gbdt: return "XGBoost";
    case ModelKind::LinearSvm: return "SVC";
    case ModelKind::Logistic: return "Logistic Regression";
    case ModelKind::LatentCnn: return "1-D CNN";
  }
  return "?";
}

std::unique_ptr<Model> train_model(const ModelSpec& spec, const Matrix& X, std::span<const int> y,
                                   std::uint64_t seed, std::size_t jobs) {
  const ClassWeights cw = spec.class_weighted ? ClassWeights::balanced(y) : ClassWeights::uniform();
  switch (spec.kind) {
    case ModelKind::RandomForest: {
      auto opts = spec.forest;
      opts.seed = seed;
      opts.jobs = jobs;
      return std::make_unique<RandomForest>(train_random_forest(X, y, cw, opts));
    }
    case ModelKind::Gbdt: {
      auto opts = spec.boost;
      opts.seed = seed;
      return std::make_unique<GradientBoostedTrees>(train_gbdt(X, y, cw, opts));
    }
    case ModelKind::LinearSvm: {
      auto opts = spec.svm;
      opts.seed = seed;
      return std::make_unique<LinearModel>(train_linear_svm(X, y, cw, opts));
    }
    case ModelKind::Logistic: {
      auto opts = spec.logistic;
      opts.seed = seed;
      return std::make_unique<LinearModel>(train_logistic(X, y, cw, opts));
    }
    case ModelKind::LatentCnn: {
      auto opts = spec.cnn;
      opts.seed = seed;
      return std::make_unique<LatentCnn>(train_latent_cnn(X, y, cw, opts));
    }
  }
  throw Error(ErrorKind::InvalidConfig, "unknown model kind");
}

nlohmann::json to_json(const PipelineSpec& spec) {
  const auto& m = spec.model;
  nlohmann::json hp;
  switch (m.kind) {
    case ModelKind::RandomForest:
      hp = {{"n_trees", m.forest.n_trees}, {"mtry", m.forest.mtry}, {"max_depth", m.forest.max_depth},
            {"min_leaf", m.forest.min_leaf}, {"bootstrap", m.forest.bootstrap}};
      break;
    case ModelKind::Gbdt:
      hp = {{"n_rounds", m.boost.n_rounds}, {"depth", m.boost.depth}, {"lr", m.boost.lr},
            {"lambda_reg", m.boost.lambda_reg}};
      break;
    case ModelKind::LinearSvm:
      hp = {{"c", m.svm.c}, {"epochs", m.svm.epochs}, {"lr", m.svm.lr}};
      break;
    case ModelKind::Logistic:
      hp = {{"l2", m.logistic.l2}, {"epochs", m.logistic.epochs}, {"lr", m.logistic.lr}};
      break;
    case ModelKind::LatentCnn:
      hp = {{"epochs", m.cnn.epochs}, {"lr", m.cnn.lr}, {"momentum", m.cnn.momentum},
            {"batch_size", m.cnn.batch_size}, {"l2", m.cnn.l2}};
      break;
  }
  return {{"scaler", to_string(spec.scaler)},
          {"pca", spec.pca},
          {"pca_components", spec.pca ? spec.pca_components : 0},
          {"model", to_string(m.kind)},
          {"hyperparameters", hp},
          {"class_weighted", m.class_weighted},
          {"positive_class", "expert"},
          {"threshold", 0.5},
          {"global_fit", spec.global_fit}};
}

// ---- cross validation -------------------------------------------------------

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  const auto n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / n);
  return s;
}

void finalize_summary(MetricsReport& report) {
  std::vector<double> acc, f1, ppv, npv;
  for (const auto& f : report.folds) {
    acc.push_back(f.eval.metrics.accuracy);
    f1.push_back(f.eval.metrics.f1);
    ppv.push_back(f.eval.metrics.ppv);
    npv.push_back(f.eval.metrics.npv);
  }
  report.accuracy = summarize(acc);
  report.f1 = summarize(f1);
  report.ppv = summarize(ppv);
  report.npv = summarize(npv);
}

namespace {

Matrix take_rows(const Matrix& X, const std::vector<std::size_t>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(idx[r]));
  return out;
}

Labels take(std::span<const int> y, const std::vector<std::size_t>& idx) {
  Labels out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(y[i]);
  return out;
}

struct FittedPreprocessing {
  ScalerModel scaler;
  std::optional<PcaModel> pca;

  Matrix apply(const Matrix& X) const {
    Matrix Z = transform(scaler, X);
    return pca ? pca_transform(*pca, Z) : Z;
  }
};

FittedPreprocessing fit_preprocessing(const PipelineSpec& spec, const Matrix& X) {
  FittedPreprocessing p{fit_scaler(spec.scaler, X), std::nullopt};
  if (spec.pca) p.pca = fit_pca(transform(p.scaler, X), spec.pca_components);
  return p;
}

}  // namespace

MetricsReport cross_validate(const Matrix& X, std::span<const int> y, const PipelineSpec& spec, const CvPlan& plan,
                             std::uint64_t seed, std::size_t jobs) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows() || plan.fold_of.size() != y.size()) {
    throw Error(ErrorKind::LengthMismatch, "features, labels and fold plan must have the same length");
  }
  std::optional<FittedPreprocessing> global;
  if (spec.global_fit) global = fit_preprocessing(spec, X);

  MetricsReport report;
  report.model_name = display_name(spec.model.kind);
  report.scaler_name = display_name(spec.scaler);
  report.pca = spec.pca;
  report.seed = seed;
  report.plan = plan;
  report.spec = to_json(spec);
  report.folds.resize(static_cast<std::size_t>(plan.k));

  parallel_for(static_cast<std::size_t>(plan.k), jobs, [&](std::size_t f) {
    const int fold = static_cast<int>(f);
    const auto train = plan.train_indices(fold);
    const auto test = plan.test_indices(fold);
    const Matrix X_train = take_rows(X, train);
    const Labels y_train = take(y, train);
    const auto prep = global ? *global : fit_preprocessing(spec, X_train);

    const auto model = train_model(spec.model, prep.apply(X_train), y_train, seed + f, 1);
    const Labels predicted = model->predict(prep.apply(take_rows(X, test)));

    FoldResult& out = report.folds[f];
    out.fold = fold;
    out.n_train = train.size();
    out.n_test = test.size();
    out.eval = evaluate(predicted, take(y, test));
    if (prep.pca) {
      const auto& r = prep.pca->explained_variance_ratio;
      out.explained_variance_ratio.assign(r.data(), r.data() + r.size());
    }
  });
  finalize_summary(report);
  return report;
}

nlohmann::json to_json(const MetricsReport& report) {
  using nlohmann::json;
  json folds = json::array();
  for (const auto& f : report.folds) {
    const auto& m = f.eval.metrics;
    const auto& c = f.eval.confusion;
    json jf{{"fold", f.fold},
            {"n_train", f.n_train},
            {"n_test", f.n_test},
            {"tp", c.tp},
            {"fp", c.fp},
            {"fn", c.fn},
            {"tn", c.tn},
            {"accuracy", m.accuracy},
            {"f1", m.f1},
            {"ppv", m.ppv},
            {"npv", m.npv},
            {"recall", m.recall}};
    json undefined = json::array();
    if (m.ppv_undefined) undefined.push_back("ppv");
    if (m.npv_undefined) undefined.push_back("npv");
    if (m.recall_undefined) undefined.push_back("recall");
    if (m.f1_undefined) undefined.push_back("f1");
    jf["undefined"] = undefined;
    if (!f.explained_variance_ratio.empty()) jf["explained_variance_ratio"] = f.explained_variance_ratio;
    folds.push_back(jf);
  }
  const auto summary = [](const MetricSummary& s) { return json{{"mean", s.mean}, {"std", s.std}}; };
  json out{{"model", report.model_name},
           {"scaler", report.scaler_name},
           {"pca", report.pca},
           {"seed", report.seed},
           {"pipeline", report.spec},
           {"plan",
            {{"k", report.plan.k},
             {"stratified", report.plan.stratified},
             {"grouping", report.plan.grouping == Grouping::BySubject ? "by-subject" : "none"},
             {"fold_assignments", report.plan.fold_of}}},
           {"folds", folds},
           {"summary",
            {{"accuracy", summary(report.accuracy)},
             {"f1", summary(report.f1)},
             {"ppv", summary(report.ppv)},
             {"npv", summary(report.npv)}}}};
  if (!report.extra.is_null()) out["extra"] = report.extra;
  return out;
}

}  // namespace motionskill
