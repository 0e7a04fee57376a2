#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motionskill/classifiers.hpp"
#include "motionskill/motion_data.hpp"
#include "motionskill/nn.hpp"

namespace motionskill {

enum class Axis { X, Y };
std::string_view to_string(Axis axis) noexcept;

// ---- rasterization -----------------------------------------------------------

/// Channel-major pixels in [0, 1].
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> pixels;

  double at(int c, int y, int x) const {
    return pixels[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  nn::Shape shape() const noexcept { return {channels, height, width}; }
};

enum class PadMode { Zero, LastValue };

struct ValueRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Min and max over every value of every series.
ValueRange global_range(std::span<const std::vector<double>> series);

/// S1 || S2 || S3 for one tool and axis. S4 is never included.
std::vector<double> concat_segments(const SutureTrial& trial, Tool tool, Axis axis);

/// Line plot of value against frame index: the series is padded to max_len,
/// frame i maps to column round(i (w-1) / (max_len-1)), the value maps to a
/// row by the given range (larger values higher up, out-of-range values
/// clamped), and consecutive points are joined with integer line segments.
RasterImage rasterize(std::span<const double> series, int width, int height, int channels, std::size_t max_len,
                      ValueRange range, PadMode pad = PadMode::Zero);

/// Pre-clip perturbations noise_factor * g, g standard normal, in pixel order.
std::vector<double> noise_field(std::size_t n, double noise_factor, std::uint64_t seed);

inline double noisy_pixel(double pixel, double g, double noise_factor) {
  const double v = pixel + noise_factor * g;
  return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

RasterImage add_noise(const RasterImage& img, double noise_factor, std::uint64_t seed);

// ---- denoising autoencoder ---------------------------------------------------

struct DaeConfig {
  int width = 32;
  int height = 32;
  int channels = 1;
  double noise_factor = 0.5;
  int latent_dim = 128;
  std::vector<int> block_channels = {8, 16};  // one stride-2 conv block each
  double lr = 0.05;
  double momentum = 0.9;
  int epochs = 50;
  int batch_size = 8;
  std::uint64_t seed = 0;

  static DaeConfig desk();
  /// 224 x 224 x 3 input, three blocks.
  static DaeConfig full_scale();

  void validate() const;
};

struct DaeModel {
  DaeConfig cfg;
  nn::Network encoder{nn::Shape{}};
  nn::Network decoder{nn::Shape{}};
  std::vector<double> loss_history;  // [0] before training, then one mean per epoch
};

/// Freshly initialized encoder/decoder pair for the configuration.
DaeModel make_dae(const DaeConfig& cfg);

/// Mean squared reconstruction error of decode(encode(noisy)) against clean,
/// averaged over pixels and images. Gradients are accumulated when non-null.
double dae_loss(const DaeModel& m, std::span<const RasterImage> clean, std::span<const RasterImage> noisy,
                std::vector<double>* grad_encoder = nullptr, std::vector<double>* grad_decoder = nullptr);

DaeModel train_dae(std::span<const RasterImage> images, const DaeConfig& cfg);

/// Deterministic noise-free forward pass through the encoder.
Vector encode(const DaeModel& m, const RasterImage& img);
RasterImage reconstruct(const DaeModel& m, const RasterImage& img);

/// Writes `<prefix>.bin` (little-endian float64 parameters) and `<prefix>.json`
/// (dims, config, seed, tensor table).
void save_dae(const DaeModel& m, const std::filesystem::path& prefix);
DaeModel load_dae(const std::filesystem::path& prefix);

// ---- 1-D CNN over latent vectors ---------------------------------------------

/// conv(k5, 8) -> relu -> maxpool 2 -> conv(k3, 16) -> relu -> global average
/// -> affine; the sigmoid is applied to the returned logit.
nn::Network make_latent_cnn_network(int latent_dim);

/// Class-weighted mean binary cross-entropy on logits.
double latent_cnn_loss(const nn::Network& net, const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                       std::vector<double>* grad = nullptr);

class LatentCnn final : public Model {
 public:
  LatentCnn(nn::Network net, std::vector<double> loss_history)
      : net_(std::move(net)), loss_history_(std::move(loss_history)) {}

  Vector predict_proba(const Matrix& X) const override;
  std::string name() const override { return "1-D CNN"; }
  const nn::Network& network() const noexcept { return net_; }
  const std::vector<double>& loss_history() const noexcept { return loss_history_; }

 private:
  nn::Network net_;
  std::vector<double> loss_history_;
};

LatentCnn train_latent_cnn(const Matrix& latents, std::span<const int> y, const ClassWeights& cw,
                           const LatentCnnOptions& opts);

// ---- end-to-end latent pipeline ---------------------------------------------

struct LatentRow {
  std::string trial_id;
  std::string subject_id;
  Tool tool = Tool::Left;
  Axis axis = Axis::X;
  Label label = Label::Novice;
};

struct LatentDataset {
  Matrix latents;  // one row per (trial, tool, axis)
  std::vector<LatentRow> rows;
};

/// Rasterized inputs for every (trial, tool, axis), in trial-major order
/// L-x, L-y, R-x, R-y.
struct RasterSet {
  std::vector<RasterImage> images;
  std::vector<LatentRow> rows;
};

struct RasterOptions {
  int image_size = 32;
  int channels = 1;
  PadMode pad = PadMode::Zero;
  bool per_sample_range = false;
};

RasterSet rasterize_dataset(const Dataset& d, const RasterOptions& opts);

LatentDataset encode_all(const DaeModel& m, const RasterSet& set);

struct LatentPipelineOptions {
  RasterOptions raster;
  DaeConfig dae = DaeConfig::desk();
  ScalerKind scaler = ScalerKind::Robust;
  ModelSpec classifier{ModelKind::LatentCnn, {}, {}, {}, {}, {}, true};
  bool global_dae = false;  // train one DAE on every image before the folds
};

nlohmann::json to_json(const LatentPipelineOptions& opts);

/// Rasterize, train the DAE on training-fold images, encode, scale, classify.
/// The plan assigns folds to trials; every latent row follows its trial.
MetricsReport latent_pipeline(const Dataset& d, const LatentPipelineOptions& opts, const CvPlan& trial_plan,
                              std::uint64_t seed, std::size_t jobs = 1);

}  // namespace motionskill
