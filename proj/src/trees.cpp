#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "motionskill/classifiers.hpp"
#include "motionskill/error.hpp"
#include "motionskill/parallel.hpp"
#include "motionskill/random.hpp"

namespace motionskill {

double gini(double weight_negative, double weight_positive) {
  const double total = weight_negative + weight_positive;
  if (total <= 0.0) return 0.0;
  const double p = weight_positive / total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

double DecisionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int node = 0;
  while (nodes[node].feature >= 0) {
    node = row[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left : nodes[node].right;
  }
  return nodes[node].value;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].feature < 0) continue;
    d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

namespace {

void require_two_classes(std::span<const int> y, Eigen::Index rows) {
  if (static_cast<Eigen::Index>(y.size()) != rows) {
    throw Error(ErrorKind::LengthMismatch, "label count does not match row count");
  }
  bool pos = false, neg = false;
  for (int v : y) (v == 1 ? pos : neg) = true;
  if (!pos || !neg) throw Error(ErrorKind::SingleClassInput, "training data must contain both classes");
}

// Indices sorted by feature value, ties by index so the order is deterministic.
void sort_by_feature(std::vector<std::size_t>& idx, const Matrix& X, int f) {
  std::ranges::sort(idx, [&](std::size_t a, std::size_t b) {
    const double va = X(static_cast<Eigen::Index>(a), f), vb = X(static_cast<Eigen::Index>(b), f);
    return va < vb || (va == vb && a < b);
  });
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

// ---- classification trees (forest) ----------------------------------------

class GiniTreeBuilder {
 public:
  GiniTreeBuilder(const Matrix& X, std::span<const int> y, const ClassWeights& cw, const ForestOptions& opts,
                  int mtry, Rng& rng)
      : X_(X), y_(y), cw_(cw), opts_(opts), mtry_(mtry), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> idx) {
    tree_.nodes.clear();
    grow(std::move(idx), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> idx, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double wn = 0.0, wp = 0.0;
    for (auto i : idx) (y_[i] == 1 ? wp : wn) += cw_(y_[i]);
    tree_.nodes[id].value = wp / (wn + wp);

    const bool depth_ok = opts_.max_depth < 0 || depth < opts_.max_depth;
    if (wn == 0.0 || wp == 0.0 || !depth_ok || idx.size() < 2 * static_cast<std::size_t>(opts_.min_leaf)) {
      return id;
    }
    const Split split = best_split(idx, wn, wp);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) {
      (X_(static_cast<Eigen::Index>(i), split.feature) <= split.threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    tree_.nodes[id].feature = split.feature;
    tree_.nodes[id].threshold = split.threshold;
    const int l = grow(std::move(left), depth + 1);
    tree_.nodes[id].left = l;
    const int r = grow(std::move(right), depth + 1);
    tree_.nodes[id].right = r;
    return id;
  }

  Split best_split(std::vector<std::size_t>& idx, double wn, double wp) {
    std::vector<int> features(static_cast<std::size_t>(X_.cols()));
    std::iota(features.begin(), features.end(), 0);
    rng_.shuffle(std::span(features));
    features.resize(static_cast<std::size_t>(mtry_));

    const double total = wn + wp;
    const double parent = total * gini(wn, wp);
    Split best;
    const auto min_leaf = static_cast<std::size_t>(opts_.min_leaf);
    for (int f : features) {
      sort_by_feature(idx, X_, f);
      double ln = 0.0, lp = 0.0;
      for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        (y_[idx[k]] == 1 ? lp : ln) += cw_(y_[idx[k]]);
        const double v = X_(static_cast<Eigen::Index>(idx[k]), f);
        const double next = X_(static_cast<Eigen::Index>(idx[k + 1]), f);
        if (v == next || k + 1 < min_leaf || idx.size() - (k + 1) < min_leaf) continue;
        const double rn = wn - ln, rp = wp - lp;
        const double gain = parent - (ln + lp) * gini(ln, lp) - (rn + rp) * gini(rn, rp);
        if (gain > best.score + 1e-12 * total) {
          best = {f, 0.5 * (v + next), gain};
        }
      }
    }
    return best;
  }

  const Matrix& X_;
  std::span<const int> y_;
  const ClassWeights& cw_;
  const ForestOptions& opts_;
  int mtry_;
  Rng& rng_;
  DecisionTree tree_;
};

// ---- regression trees on gradient statistics (boosting) -----------------

class NewtonTreeBuilder {
 public:
  NewtonTreeBuilder(const Matrix& X, const Vector& g, const Vector& h, int max_depth, double lambda)
      : X_(X), g_(g), h_(h), max_depth_(max_depth), lambda_(lambda) {}

  DecisionTree build(std::vector<std::size_t> idx) {
    tree_.nodes.clear();
    grow(std::move(idx), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> idx, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double G = 0.0, H = 0.0;
    for (auto i : idx) {
      G += g_[static_cast<Eigen::Index>(i)];
      H += h_[static_cast<Eigen::Index>(i)];
    }
    tree_.nodes[id].value = -G / (H + lambda_);
    if (depth >= max_depth_ || idx.size() < 2) return id;

    Split best;
    const double parent = G * G / (H + lambda_);
    for (int f = 0; f < X_.cols(); ++f) {
      sort_by_feature(idx, X_, f);
      double gl = 0.0, hl = 0.0;
      for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        gl += g_[static_cast<Eigen::Index>(idx[k])];
        hl += h_[static_cast<Eigen::Index>(idx[k])];
        const double v = X_(static_cast<Eigen::Index>(idx[k]), f);
        const double next = X_(static_cast<Eigen::Index>(idx[k + 1]), f);
        if (v == next) continue;
        const double gr = G - gl, hr = H - hl;
        const double gain = 0.5 * (gl * gl / (hl + lambda_) + gr * gr / (hr + lambda_) - parent);
        if (gain > best.score + 1e-12) best = {f, 0.5 * (v + next), gain};
      }
    }
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (X_(static_cast<Eigen::Index>(i), best.feature) <= best.threshold ? left : right).push_back(i);
    tree_.nodes[id].feature = best.feature;
    tree_.nodes[id].threshold = best.threshold;
    const int l = grow(std::move(left), depth + 1);
    tree_.nodes[id].left = l;
    const int r = grow(std::move(right), depth + 1);
    tree_.nodes[id].right = r;
    return id;
  }

  const Matrix& X_;
  const Vector& g_;
  const Vector& h_;
  int max_depth_;
  double lambda_;
  DecisionTree tree_;
};

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double weighted_log_loss(const Vector& margin, std::span<const int> y, const ClassWeights& cw) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < margin.size(); ++i) loss += cw(y[i]) * (softplus(margin[i]) - y[i] * margin[i]);
  return loss / static_cast<double>(margin.size());
}

}  // namespace

Vector RandomForest::predict_proba(const Matrix& X) const {
  Vector p = Vector::Zero(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    int votes = 0;
    for (const auto& t : trees_) votes += t.predict(X.row(i)) >= 0.5 ? 1 : 0;
    p[i] = static_cast<double>(votes) / static_cast<double>(trees_.size());
  }
  return p;
}

RandomForest train_random_forest(const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                                 const ForestOptions& opts) {
  require_two_classes(y, X.rows());
  if (opts.n_trees < 1 || opts.min_leaf < 1) throw Error(ErrorKind::InvalidConfig, "forest needs n_trees, min_leaf >= 1");
  const int d = static_cast<int>(X.cols());
  const int mtry = std::clamp(opts.mtry > 0 ? opts.mtry : static_cast<int>(std::ceil(std::sqrt(d))), 1, d);
  const auto n = static_cast<std::size_t>(X.rows());

  std::vector<DecisionTree> trees(static_cast<std::size_t>(opts.n_trees));
  parallel_for(trees.size(), opts.jobs, [&](std::size_t t) {
    Rng rng(opts.seed + t);
    std::vector<std::size_t> idx(n);
    if (opts.bootstrap) {
      for (auto& i : idx) i = rng.index(n);
    } else {
      std::iota(idx.begin(), idx.end(), std::size_t{0});
    }
    GiniTreeBuilder builder(X, y, cw, opts, mtry, rng);
    trees[t] = builder.build(std::move(idx));
  });
  return RandomForest(std::move(trees));
}

Vector GradientBoostedTrees::margin(const Matrix& X) const {
  Vector m = Vector::Constant(X.rows(), base_score_);
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    if (shrinkage_[t] == 0.0) continue;
    for (Eigen::Index i = 0; i < X.rows(); ++i) m[i] += shrinkage_[t] * trees_[t].predict(X.row(i));
  }
  return m;
}

Vector GradientBoostedTrees::predict_proba(const Matrix& X) const {
  Vector m = margin(X);
  for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = sigmoid(m[i]);
  return m;
}

GradientBoostedTrees train_gbdt(const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                                const BoostOptions& opts) {
  require_two_classes(y, X.rows());
  if (opts.n_rounds < 0 || opts.depth < 1 || !(opts.lr > 0.0) || opts.lambda_reg < 0.0) {
    throw Error(ErrorKind::InvalidConfig, "invalid boosting options");
  }
  double wp = 0.0, wn = 0.0;
  for (int v : y) (v == 1 ? wp : wn) += cw(v);
  const double base = std::log(wp / wn);

  const auto n = X.rows();
  Vector margin = Vector::Constant(n, base);
  std::vector<DecisionTree> trees;
  std::vector<double> shrinkage;
  std::vector<double> history{weighted_log_loss(margin, y, cw)};
  std::vector<std::size_t> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), std::size_t{0});

  Vector g(n), h(n), step(n);
  for (int round = 0; round < opts.n_rounds; ++round) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      g[i] = cw(y[i]) * (p - y[i]);
      h[i] = cw(y[i]) * p * (1.0 - p);
    }
    NewtonTreeBuilder builder(X, g, h, opts.depth, opts.lambda_reg);
    DecisionTree tree = builder.build(all);
    for (Eigen::Index i = 0; i < n; ++i) step[i] = tree.predict(X.row(i));

    // Backtrack the shrinkage until the round does not raise the training loss.
    double eta = opts.lr;
    double loss = 0.0;
    for (int attempt = 0;; ++attempt) {
      loss = weighted_log_loss(margin + eta * step, y, cw);
      if (!std::isfinite(loss)) throw Error(ErrorKind::NonFiniteLoss, "boosting loss diverged");
      if (loss <= history.back()) break;
      if (attempt == 30) {
        eta = 0.0;
        loss = history.back();
        break;
      }
      eta *= 0.5;
    }
    margin += eta * step;
    trees.push_back(std::move(tree));
    shrinkage.push_back(eta);
    history.push_back(loss);
  }
  return GradientBoostedTrees(base, std::move(trees), std::move(shrinkage), std::move(history));
}

}  // namespace motionskill
