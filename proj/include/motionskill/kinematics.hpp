#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motionskill/motion_data.hpp"

namespace motionskill {

/// Column order of the kinematic feature vector.
enum class Feature : std::size_t {
  RmsVelocityLeft,
  RmsVelocityRight,
  RmsAccelerationLeft,
  RmsAccelerationRight,
  RmsJerkLeft,
  RmsJerkRight,
  TotalPathLength,
  BimanualDexterity,
};

inline constexpr std::size_t kFeatureCount = 8;

/// CSV column names, in Feature order.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "rms_vel_l", "rms_vel_r", "rms_acc_l", "rms_acc_r", "rms_jerk_l", "rms_jerk_r", "path_total",
    "bimanual_dexterity"};

struct FeatureVector {
  std::string sample_id;
  std::string subject_id;  // grouping key for subject-wise folds
  Label label = Label::Novice;
  std::array<double, kFeatureCount> values{};

  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
};

enum class Granularity { PerSegment, PerTrial };

Granularity parse_granularity(std::string_view text);
std::string_view to_string(Granularity g) noexcept;

/// Central differences (s[i+1] - s[i-1]) * fps / 2; output is two shorter.
std::vector<double> derivative(std::span<const double> series, double fps);

double rms(std::span<const double> series);

/// RMS of the speed magnitude of the `order`-th derivative (1 velocity,
/// 2 acceleration, 3 jerk). Needs at least 2 * order + 1 samples.
double rms_kinematic(const ToolTrack& track, int order);

double path_length(const ToolTrack& track);

/// Zero-lag Pearson correlation of the left and right speed profiles,
/// truncated to the shorter track. Zero-variance profiles give 0.
double bimanual_dexterity(const ToolTrack& left, const ToolTrack& right);

FeatureVector features_for(const ToolTrack& left, const ToolTrack& right);

struct ExtractOptions {
  Granularity granularity = Granularity::PerSegment;
  bool include_excluded = false;  // re-include S4
};

std::vector<FeatureVector> extract_features(const SutureTrial& trial, const ExtractOptions& opts = {});

struct FeatureMatrix {
  std::vector<FeatureVector> rows;
  std::vector<Feature> dropped_columns;

  std::vector<Feature> active_columns() const;
};

/// Removes both acceleration columns. Throws AlreadyDropped on a second call.
FeatureMatrix drop_acceleration(FeatureMatrix m);

/// Features CSV: header `sample_id,label,<kFeatureNames...>`. An optional
/// trailing `subject` column carries the grouping key.
void write_features_csv(std::ostream& out, const std::vector<FeatureVector>& rows);
std::vector<FeatureVector> read_features_csv(std::istream& in);

}  // namespace motionskill
