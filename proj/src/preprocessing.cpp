#include "motionskill/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <nlohmann/json.hpp>

#include "motionskill/error.hpp"

namespace motionskill {

ScalerKind parse_scaler_kind(std::string_view text) {
  if (text == "standard") return ScalerKind::Standard;
  if (text == "minmax") return ScalerKind::MinMax;
  if (text == "robust") return ScalerKind::Robust;
  if (text == "power") return ScalerKind::PowerYeoJohnson;
  throw Error(ErrorKind::InvalidConfig, "scaler must be one of standard|minmax|robust|power");
}

std::string_view to_string(ScalerKind kind) noexcept {
  switch (kind) {
    case ScalerKind::Standard: return "standard";
    case ScalerKind::MinMax: return "minmax";
    case ScalerKind::Robust: return "robust";
    case ScalerKind::PowerYeoJohnson: return "power";
  }
  return "?";
}

std::string_view display_name(ScalerKind kind) noexcept {
  switch (kind) {
    case ScalerKind::Standard: return "Standard Scaler";
    case ScalerKind::MinMax: return "Minmax Scaler";
    case ScalerKind::Robust: return "Robust Scaler";
    case ScalerKind::PowerYeoJohnson: return "Power Transformer";
  }
  return "?";
}

double yeo_johnson(double x, double lambda) {
  if (x >= 0.0) {
    if (std::abs(lambda) < 1e-12) return std::log1p(x);
    return std::expm1(lambda * std::log1p(x)) / lambda;
  }
  const double l2 = 2.0 - lambda;
  if (std::abs(l2) < 1e-12) return -std::log1p(-x);
  return -std::expm1(l2 * std::log1p(-x)) / l2;
}

double yeo_johnson_inverse(double y, double lambda) {
  if (y >= 0.0) {
    if (std::abs(lambda) < 1e-12) return std::expm1(y);
    return std::expm1(std::log1p(lambda * y) / lambda);
  }
  const double l2 = 2.0 - lambda;
  if (std::abs(l2) < 1e-12) return -std::expm1(-y);
  return -std::expm1(std::log1p(-l2 * y) / l2);
}

double yeo_johnson_log_likelihood(const Vector& column, double lambda) {
  const auto n = static_cast<double>(column.size());
  Vector t(column.size());
  double log_jacobian = 0.0;
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    t[i] = yeo_johnson(column[i], lambda);
    log_jacobian += std::copysign(std::log1p(std::abs(column[i])), column[i]);
  }
  const double var = (t.array() - t.mean()).square().mean();
  return -0.5 * n * std::log(var) + (lambda - 1.0) * log_jacobian;
}

double fit_yeo_johnson_lambda(const Vector& column) {
  if ((column.array() == column[0]).all()) return 1.0;
  auto negative_ll = [&column](double lambda) { return -yeo_johnson_log_likelihood(column, lambda); };
  // 21 bits of precision puts the bracket below 1e-6 on [-5, 5].
  const auto [lambda, value] = boost::math::tools::brent_find_minima(negative_ll, -5.0, 5.0, 21);
  (void)value;
  return lambda;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::EmptySeries, "quantile of an empty column");
  std::ranges::sort(values);
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

void check_finite(const Matrix& X) {
  if (X.rows() == 0 || X.cols() == 0) throw Error(ErrorKind::EmptyMatrix, "cannot fit on an empty matrix");
  if (!X.allFinite()) throw Error(ErrorKind::NonFiniteInput, "matrix contains NaN or Inf");
}

void check_dims(const ScalerModel& s, const Matrix& X) {
  if (X.cols() != s.features()) {
    throw Error(ErrorKind::DimensionMismatch, "scaler fitted on " + std::to_string(s.features()) +
                                                  " columns, got " + std::to_string(X.cols()));
  }
}

double safe_scale(double v) { return v > 0.0 && std::isfinite(v) ? v : 1.0; }

double population_std(const Vector& c) { return std::sqrt((c.array() - c.mean()).square().mean()); }

}  // namespace

ScalerModel fit_scaler(ScalerKind kind, const Matrix& X) {
  check_finite(X);
  const Eigen::Index d = X.cols();
  ScalerModel s{kind, Vector(d), Vector(d), Vector()};
  if (kind == ScalerKind::PowerYeoJohnson) s.lambda.resize(d);

  for (Eigen::Index j = 0; j < d; ++j) {
    const Vector col = X.col(j);
    switch (kind) {
      case ScalerKind::Standard:
        s.offset[j] = col.mean();
        s.scale[j] = safe_scale(population_std(col));
        break;
      case ScalerKind::MinMax:
        s.offset[j] = col.minCoeff();
        s.scale[j] = safe_scale(col.maxCoeff() - col.minCoeff());
        break;
      case ScalerKind::Robust: {
        const std::vector<double> v(col.data(), col.data() + col.size());
        s.offset[j] = quantile(v, 0.5);
        s.scale[j] = safe_scale(quantile(v, 0.75) - quantile(v, 0.25));
        break;
      }
      case ScalerKind::PowerYeoJohnson: {
        s.lambda[j] = fit_yeo_johnson_lambda(col);
        Vector t(col.size());
        for (Eigen::Index i = 0; i < col.size(); ++i) t[i] = yeo_johnson(col[i], s.lambda[j]);
        s.offset[j] = t.mean();
        s.scale[j] = safe_scale(population_std(t));
        break;
      }
    }
  }
  return s;
}

Matrix transform(const ScalerModel& s, const Matrix& X) {
  check_dims(s, X);
  Matrix Z(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double t = s.kind == ScalerKind::PowerYeoJohnson ? yeo_johnson(X(i, j), s.lambda[j]) : X(i, j);
      Z(i, j) = (t - s.offset[j]) / s.scale[j];
    }
  }
  return Z;
}

Matrix inverse_transform(const ScalerModel& s, const Matrix& Z) {
  check_dims(s, Z);
  Matrix X(Z.rows(), Z.cols());
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
      const double t = Z(i, j) * s.scale[j] + s.offset[j];
      X(i, j) = s.kind == ScalerKind::PowerYeoJohnson ? yeo_johnson_inverse(t, s.lambda[j]) : t;
    }
  }
  return X;
}

PcaModel fit_pca(const Matrix& X, Eigen::Index n_components) {
  check_finite(X);
  const Eigen::Index limit = std::min(X.rows() - 1, X.cols());
  if (n_components < 1 || n_components > limit) {
    throw Error(ErrorKind::RankDeficientRequest, "n_components must be in 1.." + std::to_string(limit) + ", got " +
                                                     std::to_string(n_components));
  }
  PcaModel m;
  m.mean = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - m.mean.transpose();
  Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  const double total = sv.squaredNorm();

  m.components = svd.matrixV().leftCols(n_components).transpose();
  m.explained_variance_ratio.resize(n_components);
  for (Eigen::Index k = 0; k < n_components; ++k) {
    m.explained_variance_ratio[k] = total > 0.0 ? sv[k] * sv[k] / total : 0.0;
    Eigen::Index arg = 0;
    m.components.row(k).cwiseAbs().maxCoeff(&arg);
    if (m.components(k, arg) < 0.0) m.components.row(k) *= -1.0;
  }
  return m;
}

Matrix pca_transform(const PcaModel& m, const Matrix& X) {
  if (X.cols() != m.mean.size()) {
    throw Error(ErrorKind::DimensionMismatch, "PCA fitted on " + std::to_string(m.mean.size()) + " columns, got " +
                                                  std::to_string(X.cols()));
  }
  return (X.rowwise() - m.mean.transpose()) * m.components.transpose();
}

Matrix pca_inverse_transform(const PcaModel& m, const Matrix& Y) {
  if (Y.cols() != m.n_components()) throw Error(ErrorKind::DimensionMismatch, "projection width mismatch");
  return (Y * m.components).rowwise() + m.mean.transpose();
}

namespace {

std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const ScalerModel& s) {
  nlohmann::json j{{"kind", to_string(s.kind)}, {"offset", to_vec(s.offset)}, {"scale", to_vec(s.scale)}};
  if (s.kind == ScalerKind::PowerYeoJohnson) j["lambda"] = to_vec(s.lambda);
  return j;
}

nlohmann::json to_json(const PcaModel& m) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index k = 0; k < m.components.rows(); ++k) rows.push_back(to_vec(m.components.row(k).transpose()));
  return {{"mean", to_vec(m.mean)},
          {"components", rows},
          {"explained_variance_ratio", to_vec(m.explained_variance_ratio)}};
}

ScalerModel scaler_from_json(const nlohmann::json& j) {
  ScalerModel s;
  s.kind = parse_scaler_kind(j.at("kind").get<std::string>());
  s.offset = from_vec(j.at("offset").get<std::vector<double>>());
  s.scale = from_vec(j.at("scale").get<std::vector<double>>());
  if (j.contains("lambda")) s.lambda = from_vec(j.at("lambda").get<std::vector<double>>());
  return s;
}

PcaModel pca_from_json(const nlohmann::json& j) {
  PcaModel m;
  m.mean = from_vec(j.at("mean").get<std::vector<double>>());
  const auto rows = j.at("components").get<std::vector<std::vector<double>>>();
  m.components.resize(static_cast<Eigen::Index>(rows.size()), m.mean.size());
  for (std::size_t k = 0; k < rows.size(); ++k) m.components.row(static_cast<Eigen::Index>(k)) = from_vec(rows[k]);
  m.explained_variance_ratio = from_vec(j.at("explained_variance_ratio").get<std::vector<double>>());
  return m;
}

}  // namespace motionskill
