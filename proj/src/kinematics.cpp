#include "motionskill/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "csv_util.hpp"
#include "motionskill/error.hpp"

namespace motionskill {

Granularity parse_granularity(std::string_view text) {
  if (text == "per-segment") return Granularity::PerSegment;
  if (text == "per-trial") return Granularity::PerTrial;
  throw Error(ErrorKind::InvalidConfig, "granularity must be per-segment or per-trial");
}

std::string_view to_string(Granularity g) noexcept {
  return g == Granularity::PerSegment ? "per-segment" : "per-trial";
}

std::vector<double> derivative(std::span<const double> series, double fps) {
  if (series.size() < 3) {
    throw Error(ErrorKind::SeriesTooShort, "derivative needs at least 3 samples, got " + std::to_string(series.size()));
  }
  std::vector<double> out(series.size() - 2);
  const double half_rate = fps / 2.0;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) out[i - 1] = (series[i + 1] - series[i - 1]) * half_rate;
  return out;
}

double rms(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorKind::EmptySeries, "rms of an empty series");
  double acc = 0.0;
  for (double v : series) acc += v * v;
  return std::sqrt(acc / static_cast<double>(series.size()));
}

namespace {

std::vector<double> speed_profile(const ToolTrack& track, int order) {
  const auto need = static_cast<std::size_t>(2 * order + 1);
  if (order < 1 || order > 3) throw Error(ErrorKind::InvalidConfig, "kinematic order must be 1, 2 or 3");
  if (track.size() < need) {
    throw Error(ErrorKind::SeriesTooShort, "order-" + std::to_string(order) + " kinematics need " +
                                               std::to_string(need) + " samples, got " +
                                               std::to_string(track.size()));
  }
  auto dx = track.xs();
  auto dy = track.ys();
  for (int k = 0; k < order; ++k) {
    dx = derivative(dx, track.fps);
    dy = derivative(dy, track.fps);
  }
  std::vector<double> speed(dx.size());
  for (std::size_t i = 0; i < dx.size(); ++i) speed[i] = std::hypot(dx[i], dy[i]);
  return speed;
}

}  // namespace

double rms_kinematic(const ToolTrack& track, int order) { return rms(speed_profile(track, order)); }

double path_length(const ToolTrack& track) {
  if (track.size() < 2) throw Error(ErrorKind::SeriesTooShort, "path length needs at least 2 samples");
  double total = 0.0;
  for (std::size_t i = 1; i < track.size(); ++i) {
    total += std::hypot(track.samples[i].x - track.samples[i - 1].x, track.samples[i].y - track.samples[i - 1].y);
  }
  return total;
}

double bimanual_dexterity(const ToolTrack& left, const ToolTrack& right) {
  if (left.size() < 4 || right.size() < 4) {
    throw Error(ErrorKind::SeriesTooShort, "bimanual dexterity needs at least 4 samples per tool");
  }
  auto a = speed_profile(left, 1);
  auto b = speed_profile(right, 1);
  const std::size_t n = std::min(a.size(), b.size());
  a.resize(n);
  b.resize(n);

  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  // Variance below rounding noise of the mean counts as zero.
  const double floor_a = 1e-24 * (mean_a * mean_a + 1e-300) * static_cast<double>(n);
  const double floor_b = 1e-24 * (mean_b * mean_b + 1e-300) * static_cast<double>(n);
  if (saa <= floor_a || sbb <= floor_b) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

FeatureVector features_for(const ToolTrack& left, const ToolTrack& right) {
  FeatureVector fv;
  fv[Feature::RmsVelocityLeft] = rms_kinematic(left, 1);
  fv[Feature::RmsVelocityRight] = rms_kinematic(right, 1);
  fv[Feature::RmsAccelerationLeft] = rms_kinematic(left, 2);
  fv[Feature::RmsAccelerationRight] = rms_kinematic(right, 2);
  fv[Feature::RmsJerkLeft] = rms_kinematic(left, 3);
  fv[Feature::RmsJerkRight] = rms_kinematic(right, 3);
  fv[Feature::TotalPathLength] = path_length(left) + path_length(right);
  fv[Feature::BimanualDexterity] = bimanual_dexterity(left, right);
  return fv;
}

namespace {

ToolTrack concatenate(const std::vector<const ToolTrack*>& parts) {
  ToolTrack out{parts.front()->tool, {}, parts.front()->fps};
  for (const auto* p : parts) out.samples.insert(out.samples.end(), p->samples.begin(), p->samples.end());
  return out;
}

}  // namespace

std::vector<FeatureVector> extract_features(const SutureTrial& trial, const ExtractOptions& opts) {
  std::vector<FeatureVector> out;
  if (opts.granularity == Granularity::PerSegment) {
    for (const auto& [id, seg] : trial.segments) {
      if (seg.excluded && !opts.include_excluded) continue;
      auto fv = features_for(seg.left, seg.right);
      fv.sample_id = trial.trial_id + ":" + std::string(to_string(id));
      fv.subject_id = trial.subject_id;
      fv.label = trial.label;
      out.push_back(std::move(fv));
    }
    if (out.empty()) throw Error(ErrorKind::MissingSegments, "trial " + trial.trial_id + " has no included segments");
    return out;
  }

  for (const auto id : {SegmentId::S1, SegmentId::S2, SegmentId::S3}) {
    if (!trial.segments.contains(id)) {
      throw Error(ErrorKind::MissingSegments, "trial " + trial.trial_id + " lacks " + std::string(to_string(id)));
    }
  }
  std::vector<const ToolTrack*> left, right;
  for (const auto& [id, seg] : trial.segments) {
    if (seg.excluded && !opts.include_excluded) continue;
    left.push_back(&seg.left);
    right.push_back(&seg.right);
  }
  auto fv = features_for(concatenate(left), concatenate(right));
  fv.sample_id = trial.trial_id;
  fv.subject_id = trial.subject_id;
  fv.label = trial.label;
  out.push_back(std::move(fv));
  return out;
}

std::vector<Feature> FeatureMatrix::active_columns() const {
  std::vector<Feature> cols;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const auto f = static_cast<Feature>(i);
    if (std::ranges::find(dropped_columns, f) == dropped_columns.end()) cols.push_back(f);
  }
  return cols;
}

FeatureMatrix drop_acceleration(FeatureMatrix m) {
  for (const auto f : {Feature::RmsAccelerationLeft, Feature::RmsAccelerationRight}) {
    if (std::ranges::find(m.dropped_columns, f) != m.dropped_columns.end()) {
      throw Error(ErrorKind::AlreadyDropped, "acceleration columns were already dropped");
    }
  }
  m.dropped_columns.push_back(Feature::RmsAccelerationLeft);
  m.dropped_columns.push_back(Feature::RmsAccelerationRight);
  return m;
}

void write_features_csv(std::ostream& out, const std::vector<FeatureVector>& rows) {
  // The subject column is only needed when it cannot be recovered from the
  // sample id prefix.
  const bool need_subject = std::ranges::any_of(
      rows, [](const FeatureVector& r) { return r.sample_id.substr(0, r.sample_id.find(':')) != r.subject_id; });
  out << "sample_id,label";
  for (auto name : kFeatureNames) out << ',' << name;
  out << (need_subject ? ",subject\n" : "\n");
  for (const auto& r : rows) {
    out << r.sample_id << ',' << to_string(r.label);
    for (double v : r.values) out << ',' << detail::format_fixed(v, 9);
    if (need_subject) out << ',' << r.subject_id;
    out << '\n';
  }
}

std::vector<FeatureVector> read_features_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::MalformedRow, "empty features file");
  const auto header = detail::split_fields(line);
  bool ok = header.size() >= 2 + kFeatureCount && header[0] == "sample_id" && header[1] == "label";
  for (std::size_t i = 0; ok && i < kFeatureCount; ++i) ok = header[2 + i] == kFeatureNames[i];
  const bool has_subject = header.size() == 3 + kFeatureCount && header.back() == "subject";
  ok = ok && (header.size() == 2 + kFeatureCount || has_subject);
  if (!ok) throw Error(ErrorKind::MalformedRow, "unexpected features header");

  std::vector<FeatureVector> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != header.size()) {
      throw Error(ErrorKind::MalformedRow, "wrong field count at features line " + std::to_string(line_no));
    }
    FeatureVector fv;
    fv.sample_id = std::string(f[0]);
    fv.label = parse_label(f[1]);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const auto v = detail::parse_double(f[2 + i]);
      if (!v || !std::isfinite(*v)) {
        throw Error(ErrorKind::MalformedRow, "non-numeric feature at line " + std::to_string(line_no));
      }
      fv.values[i] = *v;
    }
    fv.subject_id = has_subject ? std::string(f.back()) : fv.sample_id.substr(0, fv.sample_id.find(':'));
    rows.push_back(std::move(fv));
  }
  return rows;
}

}  // namespace motionskill
