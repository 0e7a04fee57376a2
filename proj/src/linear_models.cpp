#include <cmath>
#include <string>

#include "motionskill/classifiers.hpp"
#include "motionskill/error.hpp"

namespace motionskill {

namespace {

void require_two_classes(std::span<const int> y, Eigen::Index rows) {
  if (static_cast<Eigen::Index>(y.size()) != rows) {
    throw Error(ErrorKind::LengthMismatch, "label count does not match row count");
  }
  bool pos = false, neg = false;
  for (int v : y) (v == 1 ? pos : neg) = true;
  if (!pos || !neg) throw Error(ErrorKind::SingleClassInput, "training data must contain both classes");
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double logistic_loss(const LinearParams& p, const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                     double l2, LinearParams* grad) {
  const auto n = static_cast<double>(X.rows());
  const Vector z = (X * p.w).array() + p.b;
  double loss = 0.0;
  Vector coef(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double c = cw(y[i]);
    loss += c * (softplus(z[i]) - y[i] * z[i]);
    coef[i] = c * (sigmoid(z[i]) - y[i]) / n;
  }
  loss = loss / n + 0.5 * l2 * p.w.squaredNorm();
  if (grad) {
    grad->w = X.transpose() * coef + l2 * p.w;
    grad->b = coef.sum();
  }
  return loss;
}

double hinge_loss(const LinearParams& p, const Matrix& X, std::span<const int> y, const ClassWeights& cw, double c,
                  LinearParams* grad) {
  const auto n = static_cast<double>(X.rows());
  const Vector score = (X * p.w).array() + p.b;
  double loss = 0.0;
  Vector coef = Vector::Zero(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double t = y[i] == 1 ? 1.0 : -1.0;
    const double slack = 1.0 - t * score[i];
    if (slack > 0.0) {
      loss += cw(y[i]) * slack;
      coef[i] = -cw(y[i]) * t / n;
    }
  }
  loss = loss / n + p.w.squaredNorm() / (2.0 * c);
  if (grad) {
    grad->w = X.transpose() * coef + p.w / c;
    grad->b = coef.sum();
  }
  return loss;
}

Vector LinearModel::decision_function(const Matrix& X) const { return (X * params_.w).array() + params_.b; }

Vector LinearModel::predict_proba(const Matrix& X) const {
  Vector z = decision_function(X);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = sigmoid(z[i]);
  return z;
}

LinearModel train_logistic(const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                           const LogisticOptions& opts) {
  require_two_classes(y, X.rows());
  LinearParams p{Vector::Zero(X.cols()), 0.0};
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(opts.epochs) + 1);
  LinearParams g;
  for (int epoch = 0; epoch <= opts.epochs; ++epoch) {
    const double loss = logistic_loss(p, X, y, cw, opts.l2, &g);
    if (!std::isfinite(loss)) throw Error(ErrorKind::NonFiniteLoss, "logistic loss diverged");
    history.push_back(loss);
    if (epoch == opts.epochs) break;
    p.w -= opts.lr * g.w;
    p.b -= opts.lr * g.b;
  }
  return LinearModel(std::move(p), LinearModel::Link::Logistic, std::move(history));
}

LinearModel train_linear_svm(const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                             const SvmOptions& opts) {
  require_two_classes(y, X.rows());
  if (!(opts.c > 0.0)) throw Error(ErrorKind::InvalidConfig, "SVM c must be positive");
  // Subgradient steps on uncentred columns barely move the bias; train on
  // centred columns and fold the shift back into b. The loss is unchanged.
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Matrix Xc = X.rowwise() - mean;
  LinearParams p{Vector::Zero(X.cols()), 0.0};
  LinearParams best = p;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  LinearParams g;
  for (int epoch = 0; epoch <= opts.epochs; ++epoch) {
    const double loss = hinge_loss(p, Xc, y, cw, opts.c, &g);
    if (!std::isfinite(loss)) throw Error(ErrorKind::NonFiniteLoss, "hinge loss diverged");
    history.push_back(loss);
    // Subgradient steps are not monotone; keep the best iterate.
    if (loss < best_loss) {
      best_loss = loss;
      best = p;
    }
    if (epoch == opts.epochs) break;
    const double step = opts.lr / std::sqrt(1.0 + epoch);
    p.w -= step * g.w;
    p.b -= step * g.b;
  }
  best.b -= mean.dot(best.w);
  return LinearModel(std::move(best), LinearModel::Link::Margin, std::move(history));
}

}  // namespace motionskill
