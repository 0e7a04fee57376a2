#include "motionskill/motion_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "csv_util.hpp"
#include "motionskill/error.hpp"

namespace motionskill {

namespace detail {
std::string format_fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}
}  // namespace detail

using detail::split_fields;
using detail::trim;

std::string_view to_string(Tool tool) noexcept { return tool == Tool::Left ? "L" : "R"; }

std::string_view to_string(SegmentId id) noexcept {
  switch (id) {
    case SegmentId::S1: return "S1";
    case SegmentId::S2: return "S2";
    case SegmentId::S3: return "S3";
    case SegmentId::S4: return "S4";
  }
  return "?";
}

std::string_view to_string(Label label) noexcept {
  return label == Label::Expert ? "expert" : "novice";
}

SegmentId parse_segment_id(std::string_view text) {
  text = trim(text);
  if (text == "S1") return SegmentId::S1;
  if (text == "S2") return SegmentId::S2;
  if (text == "S3") return SegmentId::S3;
  if (text == "S4") return SegmentId::S4;
  throw Error(ErrorKind::MalformedRow, "unknown segment '" + std::string(text) + "'");
}

Label parse_label(std::string_view text) {
  text = trim(text);
  if (text == "novice" || text == "Novice" || text == "0") return Label::Novice;
  if (text == "expert" || text == "Expert" || text == "1") return Label::Expert;
  throw Error(ErrorKind::MalformedRow, "unknown label '" + std::string(text) + "'");
}

std::vector<double> ToolTrack::xs() const {
  std::vector<double> out(samples.size());
  std::ranges::transform(samples, out.begin(), &TrajectorySample::x);
  return out;
}

std::vector<double> ToolTrack::ys() const {
  std::vector<double> out(samples.size());
  std::ranges::transform(samples, out.begin(), &TrajectorySample::y);
  return out;
}

ParsedTrajectory parse_trajectory_csv(std::istream& in, double fps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw Error(ErrorKind::InvalidConfig, "fps must be positive");
  }
  std::string line;
  if (!std::getline(in, line) || trim(line) != "frame,tool,x,y") {
    throw Error(ErrorKind::MalformedRow, "expected header 'frame,tool,x,y'");
  }

  std::map<Tool, std::vector<TrajectorySample>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    const auto where = " at line " + std::to_string(line_no);
    if (fields.size() != 4) throw Error(ErrorKind::MalformedRow, "expected 4 fields" + where);
    const auto frame = detail::parse_int(fields[0]);
    const auto x = detail::parse_double(fields[2]);
    const auto y = detail::parse_double(fields[3]);
    if (!frame || *frame < 0 || !x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
      throw Error(ErrorKind::MalformedRow, "non-numeric or non-finite field" + where);
    }
    Tool tool;
    if (fields[1] == "L") {
      tool = Tool::Left;
    } else if (fields[1] == "R") {
      tool = Tool::Right;
    } else {
      throw Error(ErrorKind::MalformedRow, "tool must be L or R" + where);
    }
    rows[tool].push_back({*frame, *x, *y});
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyTrack, "no samples in trajectory file");

  ParsedTrajectory result;
  for (auto& [tool, samples] : rows) {
    std::ranges::stable_sort(samples, {}, &TrajectorySample::frame);
    ToolTrack track{tool, {}, fps};
    track.samples.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (i > 0) {
        const auto& prev = samples[i - 1];
        const auto& cur = samples[i];
        if (cur.frame == prev.frame) {
          throw Error(ErrorKind::DuplicateFrame, "frame " + std::to_string(cur.frame) + " repeated for tool " +
                                                     std::string(to_string(tool)));
        }
        const std::int64_t missing = cur.frame - prev.frame - 1;
        if (missing > kMaxInterpolatedGap) {
          throw Error(ErrorKind::GapTooLarge, std::to_string(missing) + " missing frames after frame " +
                                                  std::to_string(prev.frame));
        }
        const double span = static_cast<double>(cur.frame - prev.frame);
        for (std::int64_t f = prev.frame + 1; f < cur.frame; ++f) {
          const double t = static_cast<double>(f - prev.frame) / span;
          track.samples.push_back({f, prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
          ++result.interpolated;
        }
      }
      track.samples.push_back(samples[i]);
    }
    result.sample_counts[tool] = track.samples.size();
    result.tracks.emplace(tool, std::move(track));
  }
  return result;
}

ParsedTrajectory parse_trajectory_csv(const std::filesystem::path& path, double fps) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse_trajectory_csv(in, fps);
}

void write_trajectory_csv(std::ostream& out, const TrackMap& tracks) {
  out << "frame,tool,x,y\n";
  for (const auto& [tool, track] : tracks) {
    for (const auto& s : track.samples) {
      out << s.frame << ',' << to_string(tool) << ',' << detail::format_fixed(s.x) << ','
          << detail::format_fixed(s.y) << '\n';
    }
  }
}

double SutureTrial::fps() const {
  if (segments.empty()) return 0.0;
  return segments.begin()->second.left.fps;
}

namespace {

ToolTrack slice(const ToolTrack& track, std::int64_t start, std::int64_t end) {
  ToolTrack out{track.tool, {}, track.fps};
  const auto lo = std::ranges::lower_bound(track.samples, start, {}, &TrajectorySample::frame);
  const auto hi = std::ranges::lower_bound(track.samples, end, {}, &TrajectorySample::frame);
  out.samples.assign(lo, hi);
  return out;
}

}  // namespace

SutureTrial assemble_trial(std::string subject_id, Label label,
                           const std::vector<SegmentWindow>& segment_table, const TrackMap& tracks) {
  const auto left = tracks.find(Tool::Left);
  const auto right = tracks.find(Tool::Right);
  if (left == tracks.end() || right == tracks.end()) {
    throw Error(ErrorKind::MissingTool, "trial " + subject_id + " needs both L and R tracks");
  }
  if (left->second.fps != right->second.fps) {
    throw Error(ErrorKind::InvalidConfig, "fps differs between tools of trial " + subject_id);
  }

  auto windows = segment_table;
  std::ranges::sort(windows, {}, &SegmentWindow::start_frame);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].start_frame >= windows[i].end_frame) {
      throw Error(ErrorKind::InvalidConfig, "segment " + std::string(to_string(windows[i].id)) +
                                                " has start_frame >= end_frame");
    }
    if (i > 0 && windows[i].start_frame < windows[i - 1].end_frame) {
      throw Error(ErrorKind::OverlappingSegments,
                  std::string(to_string(windows[i - 1].id)) + " overlaps " + std::string(to_string(windows[i].id)));
    }
  }

  SutureTrial trial;
  trial.trial_id = subject_id;
  trial.subject_id = std::move(subject_id);
  trial.label = label;
  for (const auto& w : windows) {
    for (const auto* track : {&left->second, &right->second}) {
      if (track->samples.empty() || w.start_frame < track->samples.front().frame ||
          w.end_frame > track->samples.back().frame + 1) {
        throw Error(ErrorKind::WindowOutsideTrack,
                    std::string(to_string(w.id)) + " window [" + std::to_string(w.start_frame) + ", " +
                        std::to_string(w.end_frame) + ") exceeds the " + std::string(to_string(track->tool)) +
                        " track");
      }
    }
    if (trial.segments.contains(w.id)) {
      throw Error(ErrorKind::OverlappingSegments, std::string(to_string(w.id)) + " listed twice");
    }
    trial.segments.emplace(w.id, SegmentTracks{slice(left->second, w.start_frame, w.end_frame),
                                               slice(right->second, w.start_frame, w.end_frame),
                                               excluded_by_default(w.id)});
  }
  return trial;
}

SutureTrial assemble_trial(const Recording& rec) {
  auto trial = assemble_trial(rec.subject_id, rec.label, rec.windows, rec.tracks);
  trial.trial_id = rec.trial_id;
  return trial;
}

ValidationReport validate_dataset(const Dataset& d) {
  if (d.trials.empty()) throw Error(ErrorKind::EmptyDataset, "dataset has no trials");
  ValidationReport report;
  report.class_counts[Label::Novice] = 0;
  report.class_counts[Label::Expert] = 0;
  for (const auto& trial : d.trials) {
    ++report.class_counts[trial.label];
    for (const auto& [id, seg] : trial.segments) {
      ++report.segment_coverage[id];
      for (const auto* track : {&seg.left, &seg.right}) {
        const auto name = trial.trial_id + "/" + std::string(to_string(id)) + "/" + std::string(to_string(track->tool));
        if (track->size() < kMinTrackLength) {
          report.invariant_failures.push_back(name + ": length " + std::to_string(track->size()) + " < " +
                                              std::to_string(kMinTrackLength));
        }
        const bool finite = std::ranges::all_of(
            track->samples, [](const TrajectorySample& s) { return std::isfinite(s.x) && std::isfinite(s.y); });
        if (!finite) report.invariant_failures.push_back(name + ": non-finite coordinate");
        if (!(track->fps > 0.0)) report.invariant_failures.push_back(name + ": fps must be positive");
      }
    }
  }
  report.missing_class = report.class_counts[Label::Novice] == 0 || report.class_counts[Label::Expert] == 0;
  return report;
}

void require_both_classes(const Dataset& d) {
  const auto report = validate_dataset(d);
  if (report.missing_class) {
    throw Error(ErrorKind::MissingClass, "both novice and expert trials are required");
  }
}

std::vector<Recording> load_recordings(const std::filesystem::path& dir, double fps) {
  const auto seg_path = dir / "segments.csv";
  std::ifstream in(seg_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + seg_path.string());

  std::string line;
  std::getline(in, line);
  const auto header = split_fields(line);
  const bool has_trial = header.size() == 6 && header[5] == "trial";
  if (header.size() < 5 || header[0] != "subject" || header[1] != "segment" || header[2] != "start_frame" ||
      header[3] != "end_frame" || header[4] != "label" || (header.size() == 6 && !has_trial) ||
      header.size() > 6) {
    throw Error(ErrorKind::MalformedRow, "expected header 'subject,segment,start_frame,end_frame,label[,trial]'");
  }

  std::vector<Recording> recs;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    const auto where = " in segments.csv line " + std::to_string(line_no);
    if (f.size() != header.size()) throw Error(ErrorKind::MalformedRow, "wrong field count" + where);
    const auto start = detail::parse_int(f[2]);
    const auto end = detail::parse_int(f[3]);
    if (!start || !end) throw Error(ErrorKind::MalformedRow, "non-numeric frame" + where);
    const std::string subject(f[0]);
    const std::string trial_id = has_trial ? std::string(f[5]) : subject;
    const Label label = parse_label(f[4]);

    auto [it, inserted] = index.try_emplace(trial_id, recs.size());
    if (inserted) {
      recs.push_back(Recording{trial_id, subject, label, {}, {}});
    } else if (recs[it->second].label != label || recs[it->second].subject_id != subject) {
      throw Error(ErrorKind::MalformedRow, "inconsistent subject/label for trial " + trial_id + where);
    }
    recs[it->second].windows.push_back({parse_segment_id(f[1]), *start, *end});
  }

  for (auto& rec : recs) {
    rec.tracks = parse_trajectory_csv(dir / (rec.trial_id + ".csv"), fps).tracks;
  }
  return recs;
}

void write_recordings(const std::filesystem::path& dir, const std::vector<Recording>& recs) {
  std::filesystem::create_directories(dir);
  const bool need_trial =
      std::ranges::any_of(recs, [](const Recording& r) { return r.trial_id != r.subject_id; });
  std::ostringstream seg;
  seg << "subject,segment,start_frame,end_frame,label" << (need_trial ? ",trial" : "") << '\n';
  for (const auto& rec : recs) {
    for (const auto& w : rec.windows) {
      seg << rec.subject_id << ',' << to_string(w.id) << ',' << w.start_frame << ',' << w.end_frame << ','
          << to_string(rec.label);
      if (need_trial) seg << ',' << rec.trial_id;
      seg << '\n';
    }
    std::ofstream out(dir / (rec.trial_id + ".csv"), std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / (rec.trial_id + ".csv")).string());
    write_trajectory_csv(out, rec.tracks);
  }
  std::ofstream out(dir / "segments.csv", std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / "segments.csv").string());
  out << seg.str();
}

Dataset load_dataset(const std::filesystem::path& dir, double fps) {
  Dataset d;
  for (const auto& rec : load_recordings(dir, fps)) d.trials.push_back(assemble_trial(rec));
  return d;
}

}  // namespace motionskill
