#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "motionskill/motion_data.hpp"

namespace motionskill {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5.
double min_jerk_profile(double tau) noexcept;

/// n_samples points from p0 to p1 inclusive, evenly spaced in tau.
std::vector<Point2> min_jerk_segment(Point2 p0, Point2 p1, std::size_t n_samples);

struct GeneratorConfig {
  int n_subjects_per_class = 10;
  int segments_per_trial = 3;
  double fps = 120.0;
  double segment_duration_s = 4.0;
  double first_segment_scale = 1.25;  // S1 runs longer than the others
  int reaches_per_segment = 4;
  double expert_tremor_px = 1.0;
  double novice_tremor_px = 2.5;
  int novice_submovements = 2;  // overshoot-and-correct moves per reach
  double novice_pause_probability = 0.3;
  double novice_pause_s = 1.0;        // pauses last U(0.5, 1.5) x this
  double correction_fraction = 0.5;   // duration of each corrective move, relative to the reach
  bool novice_uncoordinated = true;  // independent left/right timing
  double idle_gap_s = 0.5;
  double canvas_width = 640.0;
  double canvas_height = 480.0;
  double margin = 60.0;
  std::uint64_t seed = 42;

  /// Novices move exactly like experts: equal tremor, no extra submovements,
  /// no pauses, coordinated hands.
  static GeneratorConfig null_case();
  static GeneratorConfig null_case(GeneratorConfig base);

  void validate() const;
};

/// Subjects E01.. are experts and N01.. novices; subject i draws from seed + i.
std::vector<Recording> generate_recordings(const GeneratorConfig& cfg, std::size_t jobs = 1);
Dataset generate_dataset(const GeneratorConfig& cfg, std::size_t jobs = 1);

}  // namespace motionskill
