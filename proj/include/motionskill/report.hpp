#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "motionskill/kinematics.hpp"

namespace motionskill {

/// Parses a metrics report and checks that it carries a summary. Throws MalformedReport.
nlohmann::json read_report(const std::filesystem::path& path);
void check_report(const nlohmann::json& report);

/// One row per report: model, scaler, Accuracy, F1 score, PPV, NPV as
/// "mean ± std". A leading PCA column appears when any row comes from the
/// feature pipeline.
std::string render_table(std::span<const nlohmann::json> reports, int precision = 3);

/// Class-mean radar chart of the active feature columns, each min-max
/// normalized over all rows.
std::string radar_svg(const FeatureMatrix& m);

/// Raw and filtered coordinate series against frame index.
std::string overlay_svg(std::span<const double> raw, std::span<const double> filtered, std::string_view title);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace motionskill
