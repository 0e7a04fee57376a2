#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "motionskill/dae.hpp"
#include "motionskill/error.hpp"
#include "motionskill/random.hpp"

namespace motionskill {

std::string_view to_string(Axis axis) noexcept { return axis == Axis::X ? "x" : "y"; }

ValueRange global_range(std::span<const std::vector<double>> series) {
  ValueRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& s : series) {
    for (double v : s) {
      r.lo = std::min(r.lo, v);
      r.hi = std::max(r.hi, v);
    }
  }
  return r;
}

std::vector<double> concat_segments(const SutureTrial& trial, Tool tool, Axis axis) {
  std::vector<double> out;
  for (const auto id : {SegmentId::S1, SegmentId::S2, SegmentId::S3}) {
    const auto it = trial.segments.find(id);
    if (it == trial.segments.end()) {
      throw Error(ErrorKind::MissingSegments, "trial " + trial.trial_id + " lacks " + std::string(to_string(id)));
    }
    const auto& track = tool == Tool::Left ? it->second.left : it->second.right;
    for (const auto& s : track.samples) out.push_back(axis == Axis::X ? s.x : s.y);
  }
  return out;
}

namespace {

void draw_line(RasterImage& img, int x0, int y0, int x1, int y1) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    img.pixels[static_cast<std::size_t>(y0) * img.width + x0] = 1.0;
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

RasterImage rasterize(std::span<const double> series, int width, int height, int channels, std::size_t max_len,
                      ValueRange range, PadMode pad) {
  if (width < 1 || height < 1 || channels < 1 || max_len < 1) {
    throw Error(ErrorKind::InvalidConfig, "raster dimensions must be positive");
  }
  if (series.size() > max_len) {
    throw Error(ErrorKind::SeriesTooLong, "series of length " + std::to_string(series.size()) +
                                              " exceeds max_len " + std::to_string(max_len));
  }
  if (series.empty()) throw Error(ErrorKind::EmptySeries, "cannot rasterize an empty series");
  if (!(range.hi > range.lo)) throw Error(ErrorKind::DegenerateRange, "value range has zero width");

  const double pad_value = pad == PadMode::Zero ? 0.0 : series.back();
  const auto value_at = [&](std::size_t i) { return i < series.size() ? series[i] : pad_value; };
  const auto column = [&](std::size_t i) {
    if (max_len == 1) return 0;
    return static_cast<int>(std::lround(static_cast<double>(i) * (width - 1) / static_cast<double>(max_len - 1)));
  };
  const auto row = [&](double v) {
    const double t = (range.hi - v) / (range.hi - range.lo);
    return std::clamp(static_cast<int>(std::lround(t * (height - 1))), 0, height - 1);
  };

  RasterImage img{width, height, 1, std::vector<double>(static_cast<std::size_t>(width) * height, 0.0)};
  int px = column(0), py = row(value_at(0));
  img.pixels[static_cast<std::size_t>(py) * width + px] = 1.0;
  for (std::size_t i = 1; i < max_len; ++i) {
    const int cx = column(i), cy = row(value_at(i));
    if (cx != px || cy != py) draw_line(img, px, py, cx, cy);
    px = cx;
    py = cy;
  }
  if (channels > 1) {
    const auto plane = img.pixels;
    img.pixels.clear();
    for (int c = 0; c < channels; ++c) img.pixels.insert(img.pixels.end(), plane.begin(), plane.end());
    img.channels = channels;
  }
  return img;
}

std::vector<double> noise_field(std::size_t n, double noise_factor, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& v : out) v = noise_factor * rng.normal();
  return out;
}

RasterImage add_noise(const RasterImage& img, double noise_factor, std::uint64_t seed) {
  RasterImage out = img;
  if (noise_factor == 0.0) return out;
  Rng rng(seed);
  for (double& p : out.pixels) p = noisy_pixel(p, rng.normal(), noise_factor);
  return out;
}

}  // namespace motionskill
