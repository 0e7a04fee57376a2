#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace motionskill {

enum class Tool { Left, Right };
enum class SegmentId { S1, S2, S3, S4 };
enum class Label { Novice, Expert };

std::string_view to_string(Tool tool) noexcept;
std::string_view to_string(SegmentId id) noexcept;
std::string_view to_string(Label label) noexcept;
SegmentId parse_segment_id(std::string_view text);
Label parse_label(std::string_view text);

/// Segments excluded from analysis unless explicitly re-included.
constexpr bool excluded_by_default(SegmentId id) noexcept { return id == SegmentId::S4; }

struct TrajectorySample {
  std::int64_t frame = 0;
  double x = 0.0;
  double y = 0.0;
};

/// Minimum track length for third-derivative features.
inline constexpr std::size_t kMinTrackLength = 8;

struct ToolTrack {
  Tool tool = Tool::Left;
  std::vector<TrajectorySample> samples;  // strictly ascending by frame
  double fps = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
  std::vector<double> xs() const;
  std::vector<double> ys() const;
};

using TrackMap = std::map<Tool, ToolTrack>;

struct ParsedTrajectory {
  TrackMap tracks;
  std::map<Tool, std::size_t> sample_counts;  // after interpolation
  std::size_t interpolated = 0;
};

/// Largest run of consecutive missing frames that is filled by interpolation.
inline constexpr std::int64_t kMaxInterpolatedGap = 5;

ParsedTrajectory parse_trajectory_csv(std::istream& in, double fps);
ParsedTrajectory parse_trajectory_csv(const std::filesystem::path& path, double fps);
void write_trajectory_csv(std::ostream& out, const TrackMap& tracks);

struct SegmentWindow {
  SegmentId id = SegmentId::S1;
  std::int64_t start_frame = 0;  // inclusive
  std::int64_t end_frame = 0;    // exclusive
};

struct SegmentTracks {
  ToolTrack left;
  ToolTrack right;
  bool excluded = false;
};

struct SutureTrial {
  std::string subject_id;
  Label label = Label::Novice;
  std::map<SegmentId, SegmentTracks> segments;
  std::string trial_id;  // names the trajectory file; defaults to subject_id

  double fps() const;
};

SutureTrial assemble_trial(std::string subject_id, Label label,
                           const std::vector<SegmentWindow>& segment_table, const TrackMap& tracks);

struct Dataset {
  std::vector<SutureTrial> trials;
};

struct ValidationReport {
  std::map<Label, std::size_t> class_counts;
  std::map<SegmentId, std::size_t> segment_coverage;
  std::vector<std::string> invariant_failures;
  bool missing_class = false;

  bool ok() const noexcept { return !missing_class && invariant_failures.empty(); }
};

ValidationReport validate_dataset(const Dataset& d);

/// Throws MissingClass unless both labels are present.
void require_both_classes(const Dataset& d);

/// One recorded video: full-length tracks plus the segment table.
struct Recording {
  std::string trial_id;
  std::string subject_id;
  Label label = Label::Novice;
  TrackMap tracks;
  std::vector<SegmentWindow> windows;
};

SutureTrial assemble_trial(const Recording& rec);

/// Directory layout: `segments.csv` with header
/// `subject,segment,start_frame,end_frame,label` (an optional trailing `trial`
/// column names the trajectory file), plus one `<trial>.csv` per recording.
std::vector<Recording> load_recordings(const std::filesystem::path& dir, double fps);
void write_recordings(const std::filesystem::path& dir, const std::vector<Recording>& recs);
Dataset load_dataset(const std::filesystem::path& dir, double fps);

}  // namespace motionskill
