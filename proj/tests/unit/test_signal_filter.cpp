#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include <gtest/gtest.h>

#include "motionskill/random.hpp"
#include "motionskill/signal_filter.hpp"
#include "test_util.hpp"

using namespace motionskill;

namespace {

// Analytic magnitude of a bilinear-transformed Butterworth prewarped at fc.
double butterworth_magnitude(double f, double fc, double fps, int order) {
  const double r = std::tan(std::numbers::pi * f / fps) / std::tan(std::numbers::pi * fc / fps);
  return 1.0 / std::sqrt(1.0 + std::pow(r, 2 * order));
}

FilterConfig cfg120(int order = 4, bool zero_phase = true) {
  return FilterConfig{.cutoff_hz = 24.0, .order = order, .fps = 120.0, .zero_phase = zero_phase};
}

std::vector<double> sine(std::size_t n, double f, double fps, double amp = 1.0) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = amp * std::sin(2 * std::numbers::pi * f * static_cast<double>(i) / fps);
  return s;
}

double variance(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}

}  // namespace

TEST(DesignLowpass, UnitDcGainAndHalfPowerAtCutoff) {
  const auto c = design_lowpass(cfg120());
  EXPECT_EQ(c.sections.size(), 2u);
  EXPECT_NEAR(frequency_response(c, 0.0, 120.0), 1.0, 1e-9);
  EXPECT_NEAR(frequency_response(c, 24.0, 120.0), 1.0 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(c.dc_gain, 1.0, 1e-9);
}

TEST(DesignLowpass, MatchesAnalyticMagnitudeEverywhere) {
  for (int order : {1, 2, 3, 4, 5, 8}) {
    FilterConfig cfg = cfg120(order);
    const auto c = design_lowpass(cfg);
    for (int i = 0; i < 60; ++i) {
      const double f = i;
      EXPECT_NEAR(frequency_response(c, f, 120.0), butterworth_magnitude(f, 24.0, 120.0, order), 1e-9)
          << "order " << order << " f " << f;
    }
  }
}

TEST(DesignLowpass, DoubleCutoffInPrewarpedFrequency) {
  const auto c = design_lowpass(cfg120());
  const double f = prewarped_frequency(24.0, 120.0, 2.0);
  // tan(pi f / fps) = 2 tan(pi 24 / 120)
  EXPECT_NEAR(std::tan(std::numbers::pi * f / 120.0), 2.0 * std::tan(std::numbers::pi * 0.2), 1e-12);
  EXPECT_NEAR(frequency_response(c, f, 120.0), 1.0 / std::sqrt(257.0), 1e-9);
  EXPECT_NEAR(frequency_response(c, f, 120.0), 0.0624, 1e-4);
  EXPECT_DOUBLE_EQ(prewarped_frequency(24.0, 120.0, 1.0), 24.0);
}

TEST(DesignLowpass, MonotoneAndSmallAtNyquist) {
  const auto c = design_lowpass(cfg120());
  double prev = frequency_response(c, 0.0, 120.0);
  for (int i = 1; i < 256; ++i) {
    const double m = frequency_response(c, 60.0 * i / 255.0, 120.0);
    EXPECT_LE(m, prev + 1e-12);
    prev = m;
  }
  EXPECT_LT(frequency_response(c, 60.0, 120.0), 1e-3);
}

TEST(DesignLowpass, PolesInsideUnitCircle) {
  for (int order = 1; order <= 8; ++order) {
    for (double fc : {0.5, 5.0, 24.0, 50.0, 59.0}) {
      const auto c = design_lowpass(FilterConfig{.cutoff_hz = fc, .order = order, .fps = 120.0});
      double gain = 1.0;
      for (const auto& s : c.sections) {
        // Roots of z^2 + a1 z + a2.
        const std::complex<double> disc = std::sqrt(std::complex<double>(s.a1 * s.a1 - 4.0 * s.a2));
        EXPECT_LT(std::abs((-s.a1 + disc) / 2.0), 1.0);
        EXPECT_LT(std::abs((-s.a1 - disc) / 2.0), 1.0);
        gain *= (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
      }
      EXPECT_NEAR(gain, 1.0, 1e-9) << "order " << order << " fc " << fc;
    }
  }
}

TEST(FilterConfig, Validation) {
  EXPECT_ERROR_KIND(design_lowpass(FilterConfig{.cutoff_hz = 24.0, .order = 4, .fps = 30.0}),
                    ErrorKind::CutoffAtOrAboveNyquist);
  EXPECT_ERROR_KIND(design_lowpass(FilterConfig{.cutoff_hz = 24.0, .order = 4, .fps = 48.0}),
                    ErrorKind::CutoffAtOrAboveNyquist);
  EXPECT_ERROR_KIND(design_lowpass(FilterConfig{.cutoff_hz = 24.0, .order = 0, .fps = 120.0}),
                    ErrorKind::InvalidConfig);
  EXPECT_ERROR_KIND(design_lowpass(FilterConfig{.cutoff_hz = -1.0, .order = 2, .fps = 120.0}),
                    ErrorKind::InvalidConfig);
}

TEST(FilterSeries, ConstantIsUnchanged) {
  for (bool zp : {true, false}) {
    const std::vector<double> s(100, 5.0);
    const auto out = filter_series(s, cfg120(4, zp));
    ASSERT_EQ(out.size(), s.size());
    for (double v : out) EXPECT_NEAR(v, 5.0, 1e-9);
  }
}

TEST(FilterSeries, StopbandSineIsAttenuated) {
  const double fps = 120.0, f = fps / 2.5;
  FilterConfig cfg{.cutoff_hz = 6.0, .order = 4, .fps = fps};
  const auto s = sine(1200, f, fps);
  const auto out = filter_series(s, cfg);
  double peak = 0.0;
  for (std::size_t i = 200; i < 1000; ++i) peak = std::max(peak, std::abs(out[i]));
  const double predicted = std::pow(butterworth_magnitude(f, 6.0, fps, 4), 2);
  EXPECT_LT(peak, 0.02);
  EXPECT_LT(peak, predicted * 1.5 + 1e-9);
}

TEST(FilterSeries, PassbandSineKeepsPhase) {
  const double fps = 120.0, f = 2.0;
  const auto s = sine(1200, f, fps);
  const auto out = filter_series(s, cfg120());
  const double gain = std::pow(butterworth_magnitude(f, 24.0, fps, 4), 2);
  for (std::size_t i = 100; i < 1100; ++i) EXPECT_NEAR(out[i], gain * s[i], 1e-6);
}

TEST(FilterSeries, WhiteNoiseLosesVariance) {
  Rng rng(3);
  std::vector<double> s(2000);
  for (double& v : s) v = rng.normal();
  EXPECT_LT(variance(filter_series(s, cfg120())), variance(s));
}

TEST(FilterSeries, ZeroPhaseIsTimeReversalSymmetric) {
  Rng rng(11);
  std::vector<double> s(300);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(0.05 * static_cast<double>(i)) * 40 + rng.normal(0, 3);
  auto reversed = s;
  std::ranges::reverse(reversed);
  auto back = filter_series(reversed, cfg120());
  std::ranges::reverse(back);
  const auto direct = filter_series(s, cfg120());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(back[i], direct[i], 1e-9);
}

TEST(FilterSeries, OffsetInvariance) {
  Rng rng(5);
  std::vector<double> s(200), shifted(200);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.normal(0, 10);
    shifted[i] = s[i] + 250.0;
  }
  for (bool zp : {true, false}) {
    const auto a = filter_series(s, cfg120(4, zp));
    const auto b = filter_series(shifted, cfg120(4, zp));
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(b[i], a[i] + 250.0, 1e-9);
  }
}

TEST(FilterSeries, Errors) {
  EXPECT_EQ(min_zero_phase_length(4), 27u);
  EXPECT_ERROR_KIND(filter_series(std::vector<double>(26, 1.0), cfg120()), ErrorKind::SeriesTooShort);
  EXPECT_NO_THROW(filter_series(std::vector<double>(27, 1.0), cfg120()));
  std::vector<double> bad(100, 1.0);
  bad[40] = std::numeric_limits<double>::infinity();
  EXPECT_ERROR_KIND(filter_series(bad, cfg120()), ErrorKind::NonFiniteInput);
}

TEST(FilterTrack, NoisyPathGetsCloserToTruth) {
  Rng rng(17);
  ToolTrack clean{Tool::Left, {}, 120.0}, noisy{Tool::Left, {}, 120.0};
  for (int i = 0; i < 600; ++i) {
    const double t = i / 120.0;
    const double x = 200 + 80 * std::sin(0.8 * t), y = 150 + 60 * std::cos(0.5 * t);
    clean.samples.push_back({i, x, y});
    noisy.samples.push_back({i, x + rng.normal(0, 2), y + rng.normal(0, 2)});
  }
  // A 6 Hz cutoff keeps the sub-hertz path and passes roughly a tenth of the white-noise power.
  const auto filtered = filter_track(noisy, FilterConfig{.cutoff_hz = 6.0, .order = 4, .fps = 120.0});
  double before = 0.0, after = 0.0;
  for (int i = 0; i < 600; ++i) {
    before += std::pow(noisy.samples[i].x - clean.samples[i].x, 2) + std::pow(noisy.samples[i].y - clean.samples[i].y, 2);
    after += std::pow(filtered.samples[i].x - clean.samples[i].x, 2) +
             std::pow(filtered.samples[i].y - clean.samples[i].y, 2);
    EXPECT_EQ(filtered.samples[i].frame, i);
  }
  EXPECT_LE(std::sqrt(after), 0.5 * std::sqrt(before));

  ToolTrack still{Tool::Right, {}, 120.0};
  for (int i = 0; i < 60; ++i) still.samples.push_back({i, 3.0, 4.0});
  for (const auto& s : filter_track(still, cfg120()).samples) {
    EXPECT_NEAR(s.x, 3.0, 1e-9);
    EXPECT_NEAR(s.y, 4.0, 1e-9);
  }
  still.samples.resize(10);
  EXPECT_ERROR_KIND(filter_track(still, cfg120()), ErrorKind::SeriesTooShort);
}
