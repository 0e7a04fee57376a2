#include "motionskill/signal_filter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "motionskill/error.hpp"

namespace motionskill {

void FilterConfig::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw Error(ErrorKind::InvalidConfig, "fps must be positive");
  if (order < 1 || order > 8) throw Error(ErrorKind::InvalidConfig, "filter order must be in 1..8");
  if (!(cutoff_hz > 0.0)) throw Error(ErrorKind::InvalidConfig, "cutoff must be positive");
  if (cutoff_hz >= fps / 2.0) {
    throw Error(ErrorKind::CutoffAtOrAboveNyquist, "cutoff " + std::to_string(cutoff_hz) +
                                                       " Hz is not below Nyquist (" + std::to_string(fps / 2.0) +
                                                       " Hz at " + std::to_string(fps) + " fps)");
  }
}

IirCoefficients design_lowpass(const FilterConfig& cfg) {
  cfg.validate();
  using cd = std::complex<double>;
  const double fs2 = 2.0 * cfg.fps;
  const double warped = fs2 * std::tan(std::numbers::pi * cfg.cutoff_hz / cfg.fps);
  const int n = cfg.order;

  IirCoefficients out;
  // Analog poles in the upper half plane: s_k = wc * exp(j pi (2k + n - 1) / (2n)).
  for (int k = 1; k <= n / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n - 1.0) / (2.0 * n);
    const cd s = warped * cd(std::cos(theta), std::sin(theta));
    const cd z = (fs2 + s) / (fs2 - s);
    SecondOrderSection sec;
    sec.a1 = -2.0 * z.real();
    sec.a2 = std::norm(z);
    const double k_gain = (1.0 + sec.a1 + sec.a2) / 4.0;
    sec.b0 = k_gain;
    sec.b1 = 2.0 * k_gain;
    sec.b2 = k_gain;
    out.sections.push_back(sec);
  }
  if (n % 2 == 1) {
    const double z = (fs2 - warped) / (fs2 + warped);
    SecondOrderSection sec;
    sec.a1 = -z;
    const double k_gain = (1.0 + sec.a1) / 2.0;
    sec.b0 = k_gain;
    sec.b1 = k_gain;
    out.sections.push_back(sec);
  }
  out.dc_gain = 1.0;
  for (const auto& s : out.sections) out.dc_gain *= (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  return out;
}

double frequency_response(const IirCoefficients& c, double f_hz, double fps) {
  using cd = std::complex<double>;
  const double w = 2.0 * std::numbers::pi * f_hz / fps;
  const cd zi = std::polar(1.0, -w);  // z^-1
  cd h(1.0, 0.0);
  for (const auto& s : c.sections) {
    const cd num = s.b0 + zi * (s.b1 + zi * s.b2);
    const cd den = 1.0 + zi * (s.a1 + zi * s.a2);
    h *= num / den;
  }
  return std::abs(h);
}

double prewarped_frequency(double cutoff_hz, double fps, double ratio) {
  const double t = ratio * std::tan(std::numbers::pi * cutoff_hz / fps);
  return fps / std::numbers::pi * std::atan(t);
}

std::size_t min_zero_phase_length(int order) noexcept {
  return static_cast<std::size_t>(3 * (2 * order + 1));
}

namespace {

// Single forward pass through the cascade, with each section's state set to
// its steady-state response to a constant input equal to the first sample.
void run_cascade(const IirCoefficients& c, std::vector<double>& x) {
  if (x.empty()) return;
  for (const auto& s : c.sections) {
    const double u = x.front();
    double z2 = (s.b2 - s.a2) * u;
    double z1 = (s.b1 - s.a1) * u + z2;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

// Odd reflection about each endpoint, then forward and backward passes.
std::vector<double> forward_backward(const IirCoefficients& c, std::span<const double> series, std::size_t pad) {
  const std::size_t n = series.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * series.front() - series[i]);
  ext.insert(ext.end(), series.begin(), series.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * series.back() - series[n - 1 - i]);

  run_cascade(c, ext);
  std::ranges::reverse(ext);
  run_cascade(c, ext);
  std::ranges::reverse(ext);
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace

std::vector<double> filter_series(std::span<const double> series, const FilterConfig& cfg) {
  const auto coeffs = design_lowpass(cfg);
  if (!std::ranges::all_of(series, [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorKind::NonFiniteInput, "series contains NaN or Inf");
  }

  if (!cfg.zero_phase) {
    if (series.empty()) throw Error(ErrorKind::SeriesTooShort, "empty series");
    std::vector<double> out(series.begin(), series.end());
    run_cascade(coeffs, out);
    return out;
  }

  const std::size_t need = min_zero_phase_length(cfg.order);
  if (series.size() < need) {
    throw Error(ErrorKind::SeriesTooShort, "zero-phase filtering at order " + std::to_string(cfg.order) +
                                               " needs at least " + std::to_string(need) + " samples, got " +
                                               std::to_string(series.size()));
  }
  const auto pad = static_cast<std::size_t>(3 * cfg.order);

  // Forward-backward and backward-forward differ only in their edge
  // transients; averaging them makes the result exactly time-reversal
  // symmetric.
  auto fb = forward_backward(coeffs, series, pad);
  std::vector<double> reversed(series.rbegin(), series.rend());
  auto bf = forward_backward(coeffs, reversed, pad);
  std::ranges::reverse(bf);
  for (std::size_t i = 0; i < fb.size(); ++i) fb[i] = 0.5 * (fb[i] + bf[i]);
  return fb;
}

ToolTrack filter_track(const ToolTrack& t, const FilterConfig& cfg) {
  const auto fx = filter_series(t.xs(), cfg);
  const auto fy = filter_series(t.ys(), cfg);
  ToolTrack out = t;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i].x = fx[i];
    out.samples[i].y = fy[i];
  }
  return out;
}

}  // namespace motionskill
