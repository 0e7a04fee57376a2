#include "motionskill/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "motionskill/error.hpp"
#include "motionskill/parallel.hpp"
#include "motionskill/random.hpp"

namespace motionskill {

double min_jerk_profile(double tau) noexcept {
  const double t3 = tau * tau * tau;
  return t3 * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

std::vector<Point2> min_jerk_segment(Point2 p0, Point2 p1, std::size_t n_samples) {
  if (n_samples < 2) throw Error(ErrorKind::InvalidConfig, "min-jerk segment needs at least 2 samples");
  std::vector<Point2> out(n_samples);
  const double last = static_cast<double>(n_samples - 1);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double s = min_jerk_profile(static_cast<double>(i) / last);
    out[i] = {p0.x + (p1.x - p0.x) * s, p0.y + (p1.y - p0.y) * s};
  }
  return out;
}

GeneratorConfig GeneratorConfig::null_case() { return null_case(GeneratorConfig{}); }

GeneratorConfig GeneratorConfig::null_case(GeneratorConfig base) {
  base.novice_tremor_px = base.expert_tremor_px;
  base.novice_submovements = 0;
  base.novice_pause_probability = 0.0;
  base.novice_uncoordinated = false;
  return base;
}

void GeneratorConfig::validate() const {
  const auto fail = [](const char* msg) { throw Error(ErrorKind::InvalidConfig, msg); };
  if (n_subjects_per_class < 1) fail("need at least one subject per class");
  if (segments_per_trial < 1 || segments_per_trial > 4) fail("segments per trial must be 1..4");
  if (!(fps > 0.0) || !(segment_duration_s > 0.0) || !(first_segment_scale > 0.0)) fail("timing must be positive");
  if (reaches_per_segment < 1) fail("need at least one reach per segment");
  if (!(expert_tremor_px >= 0.0) || !(novice_tremor_px >= expert_tremor_px)) {
    fail("tremor must satisfy novice >= expert >= 0");
  }
  if (novice_submovements < 0) fail("submovement count must be non-negative");
  if (!(novice_pause_probability >= 0.0 && novice_pause_probability <= 1.0)) fail("pause probability must be in [0, 1]");
  if (idle_gap_s < 0.0) fail("idle gap must be non-negative");
  if (!(novice_pause_s >= 0.0) || !(correction_fraction > 0.0)) fail("pause and correction durations must be positive");
  if (!(margin >= 0.0) || 4.0 * margin >= canvas_width || 2.0 * margin >= canvas_height) fail("canvas too small for margin");
}

namespace {

using Path = std::vector<Point2>;

struct Timing {
  std::vector<double> reach_scale;  // per reach duration multiplier
  std::vector<double> pause_s;      // hold before each reach
};

Timing draw_timing(Rng& rng, int reaches, double pause_probability, double pause_s) {
  Timing t;
  for (int r = 0; r < reaches; ++r) {
    t.reach_scale.push_back(rng.uniform(0.8, 1.2));
    t.pause_s.push_back(rng.uniform() < pause_probability ? pause_s * rng.uniform(0.5, 1.5) : 0.0);
  }
  return t;
}

void append_move(Path& path, Point2 to, std::size_t n) {
  const auto seg = min_jerk_segment(path.back(), to, std::max<std::size_t>(n, 2));
  path.insert(path.end(), seg.begin() + 1, seg.end());
}

void hold(Path& path, std::size_t n) { path.insert(path.end(), n, path.back()); }

std::size_t frames(double seconds, double fps) { return static_cast<std::size_t>(std::lround(seconds * fps)); }

// One hand through one segment's waypoints.
void run_segment(Path& path, const std::vector<Point2>& waypoints, const Timing& timing, double reach_s, double fps,
                 int submovements, double correction, Rng& rng) {
  for (std::size_t r = 0; r < waypoints.size(); ++r) {
    hold(path, frames(timing.pause_s[r], fps));
    const double T = reach_s * timing.reach_scale[r];
    const Point2 target = waypoints[r];
    if (submovements == 0) {
      append_move(path, target, frames(T, fps) + 1);
      continue;
    }
    const Point2 from = path.back();
    const double dx = target.x - from.x;
    const double dy = target.y - from.y;
    const double over = rng.uniform(0.15, 0.35);
    const double side = rng.uniform(-0.15, 0.15);
    append_move(path, {target.x + over * dx - side * dy, target.y + over * dy + side * dx}, frames(0.8 * T, fps) + 1);
    for (int k = 1; k < submovements; ++k) {
      const double e = over * std::pow(-0.5, k);
      append_move(path, {target.x + e * dx, target.y + e * dy}, frames(correction * T, fps) + 1);
    }
    append_move(path, target, frames(correction * T, fps) + 1);
  }
}

Point2 draw_point(Rng& rng, double x_lo, double x_hi, double y_lo, double y_hi) {
  return {rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi)};
}

Recording generate_subject(const GeneratorConfig& cfg, Label label, int index, std::uint64_t seed) {
  Rng rng(seed);
  const bool novice = label == Label::Novice;
  const double mid = cfg.canvas_width / 2.0;
  const double y_lo = cfg.margin, y_hi = cfg.canvas_height - cfg.margin;
  const double lx_lo = cfg.margin, lx_hi = mid - cfg.margin / 2.0;
  const double rx_lo = mid + cfg.margin / 2.0, rx_hi = cfg.canvas_width - cfg.margin;

  Path left{draw_point(rng, lx_lo, lx_hi, y_lo, y_hi)};
  Path right{draw_point(rng, rx_lo, rx_hi, y_lo, y_hi)};
  const int submovements = novice ? cfg.novice_submovements : 0;
  const double pause_p = novice ? cfg.novice_pause_probability : 0.0;
  const bool independent = novice && cfg.novice_uncoordinated;

  Recording rec;
  char name[16];
  std::snprintf(name, sizeof name, "%c%02d", novice ? 'N' : 'E', index + 1);
  rec.subject_id = name;
  rec.trial_id = name;
  rec.label = label;

  for (int s = 0; s < cfg.segments_per_trial; ++s) {
    if (s > 0) {
      hold(left, frames(cfg.idle_gap_s, cfg.fps));
      hold(right, frames(cfg.idle_gap_s, cfg.fps));
    }
    const std::int64_t start = std::max<std::int64_t>(static_cast<std::int64_t>(left.size()) - 1,
                                                      rec.windows.empty() ? 0 : rec.windows.back().end_frame);
    std::vector<Point2> lw, rw;
    for (int r = 0; r < cfg.reaches_per_segment; ++r) {
      lw.push_back(draw_point(rng, lx_lo, lx_hi, y_lo, y_hi));
      rw.push_back(draw_point(rng, rx_lo, rx_hi, y_lo, y_hi));
    }
    const double duration = cfg.segment_duration_s * (s == 0 ? cfg.first_segment_scale : 1.0);
    const double reach_s = duration / cfg.reaches_per_segment;
    const Timing lt = draw_timing(rng, cfg.reaches_per_segment, pause_p, cfg.novice_pause_s);
    const Timing rt = independent ? draw_timing(rng, cfg.reaches_per_segment, pause_p, cfg.novice_pause_s) : lt;
    run_segment(left, lw, lt, reach_s, cfg.fps, submovements, cfg.correction_fraction, rng);
    run_segment(right, rw, rt, reach_s, cfg.fps, submovements, cfg.correction_fraction, rng);
    hold(left, right.size() > left.size() ? right.size() - left.size() : 0);
    hold(right, left.size() > right.size() ? left.size() - right.size() : 0);
    rec.windows.push_back(
        {static_cast<SegmentId>(s), start, static_cast<std::int64_t>(left.size())});
  }

  const double tremor = novice ? cfg.novice_tremor_px : cfg.expert_tremor_px;
  const auto to_track = [&](Tool tool, const Path& path) {
    ToolTrack track{tool, {}, cfg.fps};
    track.samples.reserve(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
      const double x = std::clamp(path[i].x + rng.normal(0.0, tremor), 0.0, cfg.canvas_width);
      const double y = std::clamp(path[i].y + rng.normal(0.0, tremor), 0.0, cfg.canvas_height);
      track.samples.push_back({static_cast<std::int64_t>(i), x, y});
    }
    return track;
  };
  rec.tracks[Tool::Left] = to_track(Tool::Left, left);
  rec.tracks[Tool::Right] = to_track(Tool::Right, right);
  return rec;
}

}  // namespace

std::vector<Recording> generate_recordings(const GeneratorConfig& cfg, std::size_t jobs) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.n_subjects_per_class);
  std::vector<Recording> out(2 * n);
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    const Label label = i < n ? Label::Expert : Label::Novice;
    out[i] = generate_subject(cfg, label, static_cast<int>(i % n), cfg.seed + i);
  });
  return out;
}

Dataset generate_dataset(const GeneratorConfig& cfg, std::size_t jobs) {
  Dataset d;
  for (const auto& rec : generate_recordings(cfg, jobs)) d.trials.push_back(assemble_trial(rec));
  return d;
}

}  // namespace motionskill
