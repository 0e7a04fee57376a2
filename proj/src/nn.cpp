#include "motionskill/nn.hpp"

#include <algorithm>
#include <cmath>

#include "motionskill/error.hpp"

namespace motionskill::nn {

void Layer::init(std::span<double> params, Rng&, Init) const { std::ranges::fill(params, 0.0); }

namespace {

void fan_in_uniform(std::span<double> weights, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (double& w : weights) w = rng.uniform(-limit, limit);
}

// Small nonzero biases keep pre-activations off the ReLU kink at init.
void bias_uniform(std::span<double> biases, std::size_t fan_in, Rng& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& b : biases) b = rng.uniform(-limit, limit);
}

}  // namespace

// ---- Conv2d ---------------------------------------------------------------

Conv2d::Conv2d(Shape in, int out_channels, int kernel, int stride, int padding)
    : in_(in), kernel_(kernel), stride_(stride), padding_(padding) {
  out_.c = out_channels;
  out_.h = (in.h + 2 * padding - kernel) / stride + 1;
  out_.w = (in.w + 2 * padding - kernel) / stride + 1;
  if (out_.h <= 0 || out_.w <= 0) throw Error(ErrorKind::DimensionMismatch, "conv2d kernel larger than input");
}

std::size_t Conv2d::param_count() const {
  return static_cast<std::size_t>(out_.c) * in_.c * kernel_ * kernel_ + out_.c;
}

void Conv2d::init(std::span<double> params, Rng& rng, Init mode) const {
  std::ranges::fill(params, 0.0);
  if (mode == Init::Zero) return;
  const std::size_t nw = params.size() - out_.c;
  fan_in_uniform(params.first(nw), static_cast<std::size_t>(in_.c) * kernel_ * kernel_, rng);
  bias_uniform(params.subspan(nw), static_cast<std::size_t>(in_.c) * kernel_ * kernel_, rng);
}

void Conv2d::forward(std::span<const double> params, std::span<const double> in, std::span<double> out) const {
  const std::size_t kk = static_cast<std::size_t>(kernel_) * kernel_;
  const double* bias = params.data() + static_cast<std::size_t>(out_.c) * in_.c * kk;
  for (int oc = 0; oc < out_.c; ++oc) {
    double* o = out.data() + static_cast<std::size_t>(oc) * out_.h * out_.w;
    std::fill(o, o + out_.h * out_.w, bias[oc]);
    for (int ic = 0; ic < in_.c; ++ic) {
      const double* w = params.data() + (static_cast<std::size_t>(oc) * in_.c + ic) * kk;
      const double* src = in.data() + static_cast<std::size_t>(ic) * in_.h * in_.w;
      for (int ky = 0; ky < kernel_; ++ky) {
        for (int kx = 0; kx < kernel_; ++kx) {
          const double wv = w[ky * kernel_ + kx];
          for (int oy = 0; oy < out_.h; ++oy) {
            const int iy = oy * stride_ + ky - padding_;
            if (iy < 0 || iy >= in_.h) continue;
            const double* row = src + static_cast<std::size_t>(iy) * in_.w;
            double* orow = o + static_cast<std::size_t>(oy) * out_.w;
            for (int ox = 0; ox < out_.w; ++ox) {
              const int ix = ox * stride_ + kx - padding_;
              if (ix >= 0 && ix < in_.w) orow[ox] += wv * row[ix];
            }
          }
        }
      }
    }
  }
}

void Conv2d::backward(std::span<const double> params, std::span<const double> in, std::span<const double>,
                      std::span<const double> grad_out, std::span<double> grad_params,
                      std::span<double> grad_in) const {
  const std::size_t kk = static_cast<std::size_t>(kernel_) * kernel_;
  double* gbias = grad_params.data() + static_cast<std::size_t>(out_.c) * in_.c * kk;
  std::ranges::fill(grad_in, 0.0);
  for (int oc = 0; oc < out_.c; ++oc) {
    const double* go = grad_out.data() + static_cast<std::size_t>(oc) * out_.h * out_.w;
    for (int i = 0; i < out_.h * out_.w; ++i) gbias[oc] += go[i];
    for (int ic = 0; ic < in_.c; ++ic) {
      const std::size_t wofs = (static_cast<std::size_t>(oc) * in_.c + ic) * kk;
      const double* w = params.data() + wofs;
      double* gw = grad_params.data() + wofs;
      const double* src = in.data() + static_cast<std::size_t>(ic) * in_.h * in_.w;
      double* gsrc = grad_in.data() + static_cast<std::size_t>(ic) * in_.h * in_.w;
      for (int ky = 0; ky < kernel_; ++ky) {
        for (int kx = 0; kx < kernel_; ++kx) {
          const double wv = w[ky * kernel_ + kx];
          double acc = 0.0;
          for (int oy = 0; oy < out_.h; ++oy) {
            const int iy = oy * stride_ + ky - padding_;
            if (iy < 0 || iy >= in_.h) continue;
            const double* row = src + static_cast<std::size_t>(iy) * in_.w;
            double* grow = gsrc + static_cast<std::size_t>(iy) * in_.w;
            const double* gorow = go + static_cast<std::size_t>(oy) * out_.w;
            for (int ox = 0; ox < out_.w; ++ox) {
              const int ix = ox * stride_ + kx - padding_;
              if (ix < 0 || ix >= in_.w) continue;
              acc += gorow[ox] * row[ix];
              grow[ix] += gorow[ox] * wv;
            }
          }
          gw[ky * kernel_ + kx] += acc;
        }
      }
    }
  }
}

std::string Conv2d::describe() const {
  return "conv2d " + std::to_string(in_.c) + "->" + std::to_string(out_.c) + " k" + std::to_string(kernel_) + " s" +
         std::to_string(stride_) + " p" + std::to_string(padding_) + " out " + std::to_string(out_.h) + "x" +
         std::to_string(out_.w);
}

// ---- Conv1d ---------------------------------------------------------------

Conv1d::Conv1d(Shape in, int out_channels, int kernel) : in_(in), kernel_(kernel) {
  out_ = Shape{out_channels, 1, in.w - kernel + 1};
  if (out_.w <= 0) throw Error(ErrorKind::DimensionMismatch, "conv1d kernel longer than input");
}

std::size_t Conv1d::param_count() const { return static_cast<std::size_t>(out_.c) * in_.c * kernel_ + out_.c; }

void Conv1d::init(std::span<double> params, Rng& rng, Init mode) const {
  std::ranges::fill(params, 0.0);
  if (mode == Init::Zero) return;
  fan_in_uniform(params.first(params.size() - out_.c), static_cast<std::size_t>(in_.c) * kernel_, rng);
  bias_uniform(params.subspan(params.size() - out_.c), static_cast<std::size_t>(in_.c) * kernel_, rng);
}

void Conv1d::forward(std::span<const double> params, std::span<const double> in, std::span<double> out) const {
  const double* bias = params.data() + static_cast<std::size_t>(out_.c) * in_.c * kernel_;
  for (int oc = 0; oc < out_.c; ++oc) {
    double* o = out.data() + static_cast<std::size_t>(oc) * out_.w;
    std::fill(o, o + out_.w, bias[oc]);
    for (int ic = 0; ic < in_.c; ++ic) {
      const double* w = params.data() + (static_cast<std::size_t>(oc) * in_.c + ic) * kernel_;
      const double* src = in.data() + static_cast<std::size_t>(ic) * in_.w;
      for (int k = 0; k < kernel_; ++k) {
        for (int x = 0; x < out_.w; ++x) o[x] += w[k] * src[x + k];
      }
    }
  }
}

void Conv1d::backward(std::span<const double> params, std::span<const double> in, std::span<const double>,
                      std::span<const double> grad_out, std::span<double> grad_params,
                      std::span<double> grad_in) const {
  double* gbias = grad_params.data() + static_cast<std::size_t>(out_.c) * in_.c * kernel_;
  std::ranges::fill(grad_in, 0.0);
  for (int oc = 0; oc < out_.c; ++oc) {
    const double* go = grad_out.data() + static_cast<std::size_t>(oc) * out_.w;
    for (int x = 0; x < out_.w; ++x) gbias[oc] += go[x];
    for (int ic = 0; ic < in_.c; ++ic) {
      const std::size_t wofs = (static_cast<std::size_t>(oc) * in_.c + ic) * kernel_;
      const double* src = in.data() + static_cast<std::size_t>(ic) * in_.w;
      double* gsrc = grad_in.data() + static_cast<std::size_t>(ic) * in_.w;
      for (int k = 0; k < kernel_; ++k) {
        double acc = 0.0;
        const double wv = params[wofs + k];
        for (int x = 0; x < out_.w; ++x) {
          acc += go[x] * src[x + k];
          gsrc[x + k] += go[x] * wv;
        }
        grad_params[wofs + k] += acc;
      }
    }
  }
}

std::string Conv1d::describe() const {
  return "conv1d " + std::to_string(in_.c) + "->" + std::to_string(out_.c) + " k" + std::to_string(kernel_) +
         " out " + std::to_string(out_.w);
}

// ---- Dense ----------------------------------------------------------------

Dense::Dense(Shape in, int outputs) : in_(in), out_{outputs, 1, 1} {}
Dense::Dense(Shape in, Shape out) : in_(in), out_(out) {}

std::size_t Dense::param_count() const { return out_.size() * in_.size() + out_.size(); }

void Dense::init(std::span<double> params, Rng& rng, Init mode) const {
  std::ranges::fill(params, 0.0);
  if (mode == Init::Zero) return;
  fan_in_uniform(params.first(out_.size() * in_.size()), in_.size(), rng);
  bias_uniform(params.subspan(out_.size() * in_.size()), in_.size(), rng);
}

void Dense::forward(std::span<const double> params, std::span<const double> in, std::span<double> out) const {
  const std::size_t n_in = in_.size();
  const double* bias = params.data() + out_.size() * n_in;
  for (std::size_t o = 0; o < out_.size(); ++o) {
    const double* w = params.data() + o * n_in;
    double acc = bias[o];
    for (std::size_t i = 0; i < n_in; ++i) acc += w[i] * in[i];
    out[o] = acc;
  }
}

void Dense::backward(std::span<const double> params, std::span<const double> in, std::span<const double>,
                     std::span<const double> grad_out, std::span<double> grad_params,
                     std::span<double> grad_in) const {
  const std::size_t n_in = in_.size();
  double* gbias = grad_params.data() + out_.size() * n_in;
  std::ranges::fill(grad_in, 0.0);
  for (std::size_t o = 0; o < out_.size(); ++o) {
    const double g = grad_out[o];
    gbias[o] += g;
    if (g == 0.0) continue;
    const double* w = params.data() + o * n_in;
    double* gw = grad_params.data() + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) {
      gw[i] += g * in[i];
      grad_in[i] += g * w[i];
    }
  }
}

std::string Dense::describe() const {
  return "dense " + std::to_string(in_.size()) + "->" + std::to_string(out_.size());
}

// ---- pointwise and pooling -----------------------------------------------

void Relu::forward(std::span<const double>, std::span<const double> in, std::span<double> out) const {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void Relu::backward(std::span<const double>, std::span<const double> in, std::span<const double>,
                    std::span<const double> grad_out, std::span<double>, std::span<double> grad_in) const {
  for (std::size_t i = 0; i < in.size(); ++i) grad_in[i] = in[i] > 0.0 ? grad_out[i] : 0.0;
}

void Sigmoid::forward(std::span<const double>, std::span<const double> in, std::span<double> out) const {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-in[i]));
}

void Sigmoid::backward(std::span<const double>, std::span<const double>, std::span<const double> out,
                       std::span<const double> grad_out, std::span<double>, std::span<double> grad_in) const {
  for (std::size_t i = 0; i < out.size(); ++i) grad_in[i] = grad_out[i] * out[i] * (1.0 - out[i]);
}

void Upsample2d::forward(std::span<const double>, std::span<const double> in, std::span<double> out) const {
  for (int c = 0; c < out_.c; ++c) {
    for (int y = 0; y < out_.h; ++y) {
      for (int x = 0; x < out_.w; ++x) {
        out[(static_cast<std::size_t>(c) * out_.h + y) * out_.w + x] =
            in[(static_cast<std::size_t>(c) * in_.h + y / 2) * in_.w + x / 2];
      }
    }
  }
}

void Upsample2d::backward(std::span<const double>, std::span<const double>, std::span<const double>,
                          std::span<const double> grad_out, std::span<double>, std::span<double> grad_in) const {
  std::ranges::fill(grad_in, 0.0);
  for (int c = 0; c < out_.c; ++c) {
    for (int y = 0; y < out_.h; ++y) {
      for (int x = 0; x < out_.w; ++x) {
        grad_in[(static_cast<std::size_t>(c) * in_.h + y / 2) * in_.w + x / 2] +=
            grad_out[(static_cast<std::size_t>(c) * out_.h + y) * out_.w + x];
      }
    }
  }
}

void MaxPool1d::forward(std::span<const double>, std::span<const double> in, std::span<double> out) const {
  for (int c = 0; c < out_.c; ++c) {
    for (int x = 0; x < out_.w; ++x) {
      const double* src = in.data() + static_cast<std::size_t>(c) * in_.w + static_cast<std::size_t>(x) * window_;
      out[static_cast<std::size_t>(c) * out_.w + x] = *std::max_element(src, src + window_);
    }
  }
}

void MaxPool1d::backward(std::span<const double>, std::span<const double> in, std::span<const double>,
                         std::span<const double> grad_out, std::span<double>, std::span<double> grad_in) const {
  std::ranges::fill(grad_in, 0.0);
  for (int c = 0; c < out_.c; ++c) {
    for (int x = 0; x < out_.w; ++x) {
      const std::size_t base = static_cast<std::size_t>(c) * in_.w + static_cast<std::size_t>(x) * window_;
      const auto arg = static_cast<std::size_t>(std::max_element(in.begin() + base, in.begin() + base + window_) -
                                                (in.begin() + base));
      grad_in[base + arg] += grad_out[static_cast<std::size_t>(c) * out_.w + x];
    }
  }
}

void GlobalAvgPool1d::forward(std::span<const double>, std::span<const double> in, std::span<double> out) const {
  for (int c = 0; c < in_.c; ++c) {
    double acc = 0.0;
    for (int x = 0; x < in_.w; ++x) acc += in[static_cast<std::size_t>(c) * in_.w + x];
    out[c] = acc / in_.w;
  }
}

void GlobalAvgPool1d::backward(std::span<const double>, std::span<const double>, std::span<const double>,
                               std::span<const double> grad_out, std::span<double>,
                               std::span<double> grad_in) const {
  for (int c = 0; c < in_.c; ++c) {
    for (int x = 0; x < in_.w; ++x) grad_in[static_cast<std::size_t>(c) * in_.w + x] = grad_out[c] / in_.w;
  }
}

// ---- Network --------------------------------------------------------------

Network& Network::push(std::shared_ptr<const Layer> layer) {
  if (!(layer->input_shape() == output_shape())) {
    throw Error(ErrorKind::DimensionMismatch, "layer input does not match previous output");
  }
  offsets_.push_back(params.size());
  params.resize(params.size() + layer->param_count(), 0.0);
  layers_.push_back(std::move(layer));
  return *this;
}

void Network::init(Rng& rng, Init mode) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l]->init(std::span(params).subspan(offsets_[l], layers_[l]->param_count()), rng, mode);
  }
}

void Network::forward(std::span<const double> input, Trace& trace) const {
  if (input.size() != input_.size()) throw Error(ErrorKind::DimensionMismatch, "network input size mismatch");
  trace.acts.resize(layers_.size() + 1);
  trace.acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    trace.acts[l + 1].resize(layers_[l]->output_shape().size());
    layers_[l]->forward(std::span<const double>(params).subspan(offsets_[l], layers_[l]->param_count()),
                        trace.acts[l], trace.acts[l + 1]);
  }
}

std::vector<double> Network::predict(std::span<const double> input) const {
  Trace trace;
  forward(input, trace);
  return std::move(trace.acts.back());
}

std::vector<double> Network::backward(const Trace& trace, std::span<const double> grad_out,
                                      std::span<double> grad_params) const {
  std::vector<double> grad(grad_out.begin(), grad_out.end());
  std::vector<double> grad_in;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    grad_in.resize(layers_[l]->input_shape().size());
    const auto count = layers_[l]->param_count();
    layers_[l]->backward(std::span<const double>(params).subspan(offsets_[l], count), trace.acts[l],
                         trace.acts[l + 1], grad, grad_params.subspan(offsets_[l], count), grad_in);
    std::swap(grad, grad_in);
  }
  return grad;
}

std::vector<std::string> Network::describe() const {
  std::vector<std::string> out;
  for (const auto& l : layers_) out.push_back(l->describe());
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> Network::param_blocks() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l]->param_count() > 0) out.emplace_back(offsets_[l], layers_[l]->param_count());
  }
  return out;
}

void MomentumSgd::step(std::span<double> params, std::span<const double> grad) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] - lr_ * grad[i];
    params[i] += velocity_[i];
  }
}

}  // namespace motionskill::nn
