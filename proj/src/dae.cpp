#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "motionskill/dae.hpp"
#include "motionskill/error.hpp"
#include "motionskill/random.hpp"

namespace motionskill {

DaeConfig DaeConfig::desk() { return DaeConfig{}; }

DaeConfig DaeConfig::full_scale() {
  DaeConfig cfg;
  cfg.width = 224;
  cfg.height = 224;
  cfg.channels = 3;
  cfg.block_channels = {16, 32, 64};
  return cfg;
}

void DaeConfig::validate() const {
  if (width < 1 || height < 1 || channels < 1) throw Error(ErrorKind::InvalidConfig, "image dims must be positive");
  if (block_channels.empty()) throw Error(ErrorKind::InvalidConfig, "DAE needs at least one conv block");
  const int div = 1 << block_channels.size();
  if (width % div != 0 || height % div != 0) {
    throw Error(ErrorKind::InvalidConfig, "image size must be divisible by " + std::to_string(div));
  }
  if (latent_dim < 1 || static_cast<std::size_t>(latent_dim) >= static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorKind::InvalidConfig, "latent_dim must be positive and below the flattened input size");
  }
  if (noise_factor < 0.0 || epochs < 0 || batch_size < 1 || !(lr > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "invalid DAE training parameters");
  }
}

DaeModel make_dae(const DaeConfig& cfg) {
  cfg.validate();
  using namespace nn;
  DaeModel m{cfg, Network(Shape{cfg.channels, cfg.height, cfg.width}), Network(Shape{cfg.latent_dim, 1, 1}), {}};

  for (int ch : cfg.block_channels) {
    m.encoder.add<Conv2d>(ch, 3, 2, 1);
    m.encoder.add<Relu>();
  }
  const Shape bottleneck = m.encoder.output_shape();
  m.encoder.add<Dense>(cfg.latent_dim);

  m.decoder.add<Dense>(bottleneck);
  m.decoder.add<Relu>();
  for (std::size_t b = cfg.block_channels.size(); b-- > 0;) {
    m.decoder.add<Upsample2d>();
    const int out = b > 0 ? cfg.block_channels[b - 1] : cfg.channels;
    m.decoder.add<Conv2d>(out, 3, 1, 1);
    if (b > 0) {
      m.decoder.add<Relu>();
    } else {
      m.decoder.add<Sigmoid>();
    }
  }

  Rng rng(cfg.seed);
  m.encoder.init(rng);
  m.decoder.init(rng);
  return m;
}

namespace {

void check_image(const DaeConfig& cfg, const RasterImage& img) {
  if (img.width != cfg.width || img.height != cfg.height || img.channels != cfg.channels) {
    throw Error(ErrorKind::DimensionMismatch, "image is " + std::to_string(img.width) + "x" +
                                                  std::to_string(img.height) + "x" + std::to_string(img.channels) +
                                                  ", model expects " + std::to_string(cfg.width) + "x" +
                                                  std::to_string(cfg.height) + "x" + std::to_string(cfg.channels));
  }
}

}  // namespace

double dae_loss(const DaeModel& m, std::span<const RasterImage> clean, std::span<const RasterImage> noisy,
                std::vector<double>* grad_encoder, std::vector<double>* grad_decoder) {
  if (clean.size() != noisy.size() || clean.empty()) {
    throw Error(ErrorKind::DimensionMismatch, "clean and noisy batches must be non-empty and aligned");
  }
  const bool want_grad = grad_encoder != nullptr && grad_decoder != nullptr;
  if (want_grad) {
    grad_encoder->resize(m.encoder.param_count(), 0.0);
    grad_decoder->resize(m.decoder.param_count(), 0.0);
  }
  const auto batch = static_cast<double>(clean.size());
  nn::Trace enc, dec;
  std::vector<double> grad_out;
  double loss = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    check_image(m.cfg, clean[i]);
    check_image(m.cfg, noisy[i]);
    m.encoder.forward(noisy[i].pixels, enc);
    m.decoder.forward(enc.output(), dec);
    const auto out = dec.output();
    const auto pixels = static_cast<double>(out.size());
    grad_out.resize(out.size());
    double sq = 0.0;
    for (std::size_t p = 0; p < out.size(); ++p) {
      const double diff = out[p] - clean[i].pixels[p];
      sq += diff * diff;
      grad_out[p] = 2.0 * diff / (pixels * batch);
    }
    loss += sq / pixels;
    if (want_grad) {
      const auto grad_latent = m.decoder.backward(dec, grad_out, *grad_decoder);
      m.encoder.backward(enc, grad_latent, *grad_encoder);
    }
  }
  return loss / batch;
}

namespace {

RasterImage noised(const RasterImage& img, double factor, Rng& rng) {
  RasterImage out = img;
  if (factor == 0.0) return out;
  for (double& p : out.pixels) p = noisy_pixel(p, rng.normal(), factor);
  return out;
}

}  // namespace

DaeModel train_dae(std::span<const RasterImage> images, const DaeConfig& cfg) {
  if (images.size() < 2) throw Error(ErrorKind::InvalidConfig, "DAE training needs at least 2 images");
  for (const auto& img : images) check_image(cfg, img);
  DaeModel m = make_dae(cfg);
  Rng rng(cfg.seed + 0x5DEECE66DULL);

  std::vector<RasterImage> noisy(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) noisy[i] = noised(images[i], cfg.noise_factor, rng);
  m.loss_history.push_back(dae_loss(m, images, noisy));

  nn::MomentumSgd enc_opt(m.encoder.param_count(), cfg.lr, cfg.momentum);
  nn::MomentumSgd dec_opt(m.decoder.param_count(), cfg.lr, cfg.momentum);
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> g_enc, g_dec;
  std::vector<RasterImage> clean_batch, noisy_batch;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      clean_batch.clear();
      noisy_batch.clear();
      for (std::size_t k = start; k < end; ++k) {
        clean_batch.push_back(images[order[k]]);
        noisy_batch.push_back(noised(images[order[k]], cfg.noise_factor, rng));
      }
      g_enc.assign(m.encoder.param_count(), 0.0);
      g_dec.assign(m.decoder.param_count(), 0.0);
      const double loss = dae_loss(m, clean_batch, noisy_batch, &g_enc, &g_dec);
      if (!std::isfinite(loss)) throw Error(ErrorKind::NonFiniteLoss, "DAE loss diverged at epoch " + std::to_string(epoch));
      epoch_loss += loss * static_cast<double>(end - start);
      enc_opt.step(m.encoder.params, g_enc);
      dec_opt.step(m.decoder.params, g_dec);
    }
    m.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return m;
}

Vector encode(const DaeModel& m, const RasterImage& img) {
  check_image(m.cfg, img);
  const auto z = m.encoder.predict(img.pixels);
  return Eigen::Map<const Vector>(z.data(), static_cast<Eigen::Index>(z.size()));
}

RasterImage reconstruct(const DaeModel& m, const RasterImage& img) {
  check_image(m.cfg, img);
  RasterImage out = img;
  out.pixels = m.decoder.predict(m.encoder.predict(img.pixels));
  return out;
}

// ---- persistence ---------------------------------------------------------------

namespace {

nlohmann::json config_json(const DaeConfig& cfg) {
  return {{"width", cfg.width},           {"height", cfg.height},   {"channels", cfg.channels},
          {"noise_factor", cfg.noise_factor}, {"latent_dim", cfg.latent_dim}, {"block_channels", cfg.block_channels},
          {"lr", cfg.lr},                 {"momentum", cfg.momentum}, {"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size}, {"seed", cfg.seed}};
}

DaeConfig config_from_json(const nlohmann::json& j) {
  DaeConfig cfg;
  cfg.width = j.at("width");
  cfg.height = j.at("height");
  cfg.channels = j.at("channels");
  cfg.noise_factor = j.at("noise_factor");
  cfg.latent_dim = j.at("latent_dim");
  cfg.block_channels = j.at("block_channels").get<std::vector<int>>();
  cfg.lr = j.at("lr");
  cfg.momentum = j.at("momentum");
  cfg.epochs = j.at("epochs");
  cfg.batch_size = j.at("batch_size");
  cfg.seed = j.at("seed");
  return cfg;
}

nlohmann::json tensor_table(const nn::Network& net, const std::string& prefix, std::size_t base) {
  nlohmann::json tensors = nlohmann::json::array();
  const auto layers = net.describe();
  std::size_t index = 0;
  for (const auto& [offset, count] : net.param_blocks()) {
    tensors.push_back({{"name", prefix + "." + std::to_string(index++)}, {"offset", base + offset}, {"count", count}});
  }
  return {{"layers", layers}, {"tensors", tensors}, {"param_count", net.param_count()}};
}

void write_doubles(std::ostream& out, const std::vector<double>& values) {
  static_assert(std::endian::native == std::endian::little, "parameter files are little-endian");
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
}

}  // namespace

void save_dae(const DaeModel& m, const std::filesystem::path& prefix) {
  const auto bin_path = std::filesystem::path(prefix.string() + ".bin");
  const auto json_path = std::filesystem::path(prefix.string() + ".json");
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error(ErrorKind::Io, "cannot write " + bin_path.string());
  write_doubles(bin, m.encoder.params);
  write_doubles(bin, m.decoder.params);

  const nlohmann::json manifest{{"format", "motionskill-dae"},
                                {"version", 1},
                                {"dtype", "float64-le"},
                                {"dims", {m.cfg.channels, m.cfg.height, m.cfg.width}},
                                {"config", config_json(m.cfg)},
                                {"seed", m.cfg.seed},
                                {"encoder", tensor_table(m.encoder, "encoder", 0)},
                                {"decoder", tensor_table(m.decoder, "decoder", m.encoder.param_count())},
                                {"loss_history", m.loss_history}};
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw Error(ErrorKind::Io, "cannot write " + json_path.string());
  js << manifest.dump(2) << '\n';
}

DaeModel load_dae(const std::filesystem::path& prefix) {
  const auto bin_path = std::filesystem::path(prefix.string() + ".bin");
  const auto json_path = std::filesystem::path(prefix.string() + ".json");
  std::ifstream js(json_path, std::ios::binary);
  if (!js) throw Error(ErrorKind::Io, "cannot open " + json_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedReport, std::string("DAE manifest: ") + e.what());
  }
  DaeModel m = make_dae(config_from_json(manifest.at("config")));
  m.loss_history = manifest.at("loss_history").get<std::vector<double>>();

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error(ErrorKind::Io, "cannot open " + bin_path.string());
  for (auto* params : {&m.encoder.params, &m.decoder.params}) {
    bin.read(reinterpret_cast<char*>(params->data()), static_cast<std::streamsize>(params->size() * sizeof(double)));
    if (!bin) throw Error(ErrorKind::DimensionMismatch, "parameter file shorter than the manifest describes");
  }
  if (bin.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::DimensionMismatch, "parameter file longer than the manifest describes");
  }
  return m;
}

// ---- latent 1-D CNN ------------------------------------------------------------

nn::Network make_latent_cnn_network(int latent_dim) {
  using namespace nn;
  Network net(Shape{1, 1, latent_dim});
  net.add<Conv1d>(8, 5);
  net.add<Relu>();
  net.add<MaxPool1d>(2);
  net.add<Conv1d>(16, 3);
  net.add<Relu>();
  net.add<GlobalAvgPool1d>();
  net.add<Dense>(1);
  return net;
}

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double latent_cnn_loss(const nn::Network& net, const Matrix& X, std::span<const int> y, const ClassWeights& cw,
                       std::vector<double>* grad) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw Error(ErrorKind::LengthMismatch, "labels vs rows");
  if (X.cols() != static_cast<Eigen::Index>(net.input_shape().size())) {
    throw Error(ErrorKind::DimensionMismatch, "latent width does not match the network");
  }
  if (grad) grad->resize(net.param_count(), 0.0);
  const auto n = static_cast<double>(X.rows());
  nn::Trace trace;
  std::vector<double> row(static_cast<std::size_t>(X.cols()));
  double loss = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) row[static_cast<std::size_t>(j)] = X(i, j);
    net.forward(row, trace);
    const double z = trace.output()[0];
    const double c = cw(y[i]);
    loss += c * (softplus(z) - y[i] * z);
    if (grad) {
      const double dz = c * (sigmoid(z) - y[i]) / n;
      net.backward(trace, std::span(&dz, 1), *grad);
    }
  }
  return loss / n;
}

Vector LatentCnn::predict_proba(const Matrix& X) const {
  Vector p(X.rows());
  std::vector<double> row(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) row[static_cast<std::size_t>(j)] = X(i, j);
    p[i] = sigmoid(net_.predict(row)[0]);
  }
  return p;
}

LatentCnn train_latent_cnn(const Matrix& latents, std::span<const int> y, const ClassWeights& cw,
                           const LatentCnnOptions& opts) {
  if (static_cast<Eigen::Index>(y.size()) != latents.rows()) throw Error(ErrorKind::LengthMismatch, "labels vs rows");
  if (std::ranges::count(y, 1) == 0 || std::ranges::count(y, 1) == static_cast<std::ptrdiff_t>(y.size())) {
    throw Error(ErrorKind::SingleClassInput, "training data must contain both classes");
  }
  if (opts.epochs < 0 || !(opts.lr > 0.0) || opts.l2 < 0.0) {
    throw Error(ErrorKind::InvalidConfig, "invalid 1-D CNN training parameters");
  }
  nn::Network net = make_latent_cnn_network(static_cast<int>(latents.cols()));
  Rng rng(opts.seed);
  net.init(rng, opts.zero_init ? nn::Init::Zero : nn::Init::FanInUniform);

  nn::MomentumSgd opt(net.param_count(), opts.lr, opts.momentum);
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> history{latent_cnn_loss(net, latents, y, cw)};
  std::vector<double> grad;
  const auto bs = static_cast<std::size_t>(std::max(1, opts.batch_size));
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      Matrix xb(static_cast<Eigen::Index>(end - start), latents.cols());
      Labels yb;
      for (std::size_t k = start; k < end; ++k) {
        xb.row(static_cast<Eigen::Index>(k - start)) = latents.row(static_cast<Eigen::Index>(order[k]));
        yb.push_back(y[order[k]]);
      }
      grad.assign(net.param_count(), 0.0);
      const double loss = latent_cnn_loss(net, xb, yb, cw, &grad);
      if (!std::isfinite(loss)) throw Error(ErrorKind::NonFiniteLoss, "CNN loss diverged");
      epoch_loss += loss * static_cast<double>(end - start);
      if (opts.l2 > 0.0) {
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += opts.l2 * net.params[k];
      }
      opt.step(net.params, grad);
    }
    history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return LatentCnn(std::move(net), std::move(history));
}

}  // namespace motionskill
