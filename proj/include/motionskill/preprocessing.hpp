#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace motionskill {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ScalerKind { Standard, MinMax, Robust, PowerYeoJohnson };

ScalerKind parse_scaler_kind(std::string_view text);
std::string_view to_string(ScalerKind kind) noexcept;
/// Display name used in rendered tables ("Robust Scaler", ...).
std::string_view display_name(ScalerKind kind) noexcept;

/// Per-column affine map z = (t(x) - offset) / scale, where t is the identity
/// except for Yeo-Johnson, whose t is the power transform with exponent lambda.
struct ScalerModel {
  ScalerKind kind = ScalerKind::Standard;
  Vector offset;
  Vector scale;   // > 0
  Vector lambda;  // Yeo-Johnson only, empty otherwise

  Eigen::Index features() const noexcept { return offset.size(); }
};

ScalerModel fit_scaler(ScalerKind kind, const Matrix& X);
Matrix transform(const ScalerModel& s, const Matrix& X);
Matrix inverse_transform(const ScalerModel& s, const Matrix& Z);

double yeo_johnson(double x, double lambda);
double yeo_johnson_inverse(double y, double lambda);

/// Yeo-Johnson profile log-likelihood of one column at exponent lambda.
double yeo_johnson_log_likelihood(const Vector& column, double lambda);

/// Maximizer of the profile log-likelihood over [-5, 5].
double fit_yeo_johnson_lambda(const Vector& column);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double q);

struct PcaModel {
  Vector mean;
  Matrix components;  // n_components x d, orthonormal rows
  Vector explained_variance_ratio;

  Eigen::Index n_components() const noexcept { return components.rows(); }
};

PcaModel fit_pca(const Matrix& X, Eigen::Index n_components);
Matrix pca_transform(const PcaModel& m, const Matrix& X);
Matrix pca_inverse_transform(const PcaModel& m, const Matrix& Y);

nlohmann::json to_json(const ScalerModel& s);
nlohmann::json to_json(const PcaModel& m);
ScalerModel scaler_from_json(const nlohmann::json& j);
PcaModel pca_from_json(const nlohmann::json& j);

}  // namespace motionskill
