#pragma once

#include <span>
#include <vector>

#include "motionskill/motion_data.hpp"

namespace motionskill {

struct FilterConfig {
  double cutoff_hz = 24.0;
  int order = 4;  // 1..8
  double fps = 0.0;
  bool zero_phase = true;

  /// Throws CutoffAtOrAboveNyquist or InvalidConfig.
  void validate() const;
};

/// One biquad in transposed direct form II; first-order sections have b2 = a2 = 0.
struct SecondOrderSection {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct IirCoefficients {
  std::vector<SecondOrderSection> sections;
  double dc_gain = 1.0;
};

/// Digital Butterworth low-pass: analog prototype poles, bilinear transform
/// prewarped at the cutoff, one section per conjugate pole pair (plus a
/// first-order section for odd orders). Each section is normalized to unit
/// DC gain.
IirCoefficients design_lowpass(const FilterConfig& cfg);

/// |H(e^{j 2 pi f / fps})| of the cascade.
double frequency_response(const IirCoefficients& c, double f_hz, double fps);

/// Digital frequency whose prewarped analog image is `ratio` times the
/// prewarped cutoff. ratio = 1 returns the cutoff itself.
double prewarped_frequency(double cutoff_hz, double fps, double ratio);

/// Minimum series length for zero-phase filtering at the given order.
std::size_t min_zero_phase_length(int order) noexcept;

std::vector<double> filter_series(std::span<const double> series, const FilterConfig& cfg);

ToolTrack filter_track(const ToolTrack& t, const FilterConfig& cfg);

}  // namespace motionskill
