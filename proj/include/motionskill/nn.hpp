#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "motionskill/random.hpp"

// Minimal feed-forward layers with explicit backpropagation. Activations are
// channel-major (c, h, w) buffers; 1-D layers use h = 1.
namespace motionskill::nn {

struct Shape {
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t size() const noexcept { return static_cast<std::size_t>(c) * h * w; }
  bool operator==(const Shape&) const = default;
};

enum class Init { FanInUniform, Zero };

class Layer {
 public:
  virtual ~Layer() = default;

  virtual Shape input_shape() const = 0;
  virtual Shape output_shape() const = 0;
  virtual std::size_t param_count() const { return 0; }
  virtual void init(std::span<double> params, Rng& rng, Init mode) const;

  virtual void forward(std::span<const double> params, std::span<const double> in, std::span<double> out) const = 0;

  /// Accumulates into grad_params and overwrites grad_in.
  virtual void backward(std::span<const double> params, std::span<const double> in, std::span<const double> out,
                        std::span<const double> grad_out, std::span<double> grad_params,
                        std::span<double> grad_in) const = 0;

  virtual std::string describe() const = 0;
};

/// 2-D convolution, weights laid out [out][in][ky][kx] followed by biases.
class Conv2d final : public Layer {
 public:
  Conv2d(Shape in, int out_channels, int kernel, int stride, int padding);
  Shape input_shape() const override { return in_; }
  Shape output_shape() const override { return out_; }
  std::size_t param_count() const override;
  void init(std::span<double> params, Rng& rng, Init mode) const override;
  void forward(std::span<const double> params, std::span<const double> in, std::span<double> out) const override;
  void backward(std::span<const double> params, std::span<const double> in, std::span<const double> out,
                std::span<const double> grad_out, std::span<double> grad_params,
                std::span<double> grad_in) const override;
  std::string describe() const override;

 private:
  Shape in_, out_;
  int kernel_, stride_, padding_;
};

/// 1-D "valid" convolution over (channels, length).
class Conv1d final : public Layer {
 public:
  Conv1d(Shape in, int out_channels, int kernel);
  Shape input_shape() const override { return in_; }
  Shape output_shape() const override { return out_; }
  std::size_t param_count() const override;
  void init(std::span<double> params, Rng& rng, Init mode) const override;
  void forward(std::span<const double> params, std::span<const double> in, std::span<double> out) const override;
  void backward(std::span<const double> params, std::span<const double> in, std::span<const double> out,
                std::span<const double> grad_out, std::span<double> grad_params,
                std::span<double> grad_in) const override;
  std::string describe() const override;

 private:
  Shape in_, out_;
  int kernel_;
};

/// Fully connected layer over the flattened input; output shape (n, 1, 1).
class Dense final : public Layer {
 public:
  Dense(Shape in, int outputs);
  Dense(Shape in, Shape out);
  Shape input_shape() const override { return in_; }
  Shape output_shape() const override { return out_; }
  std::size_t param_count() const override;
  void init(std::span<double> params, Rng& rng, Init mode) const override;
  void forward(std::span<const double> params, std::span<const double> in, std::span<double> out) const override;
  void backward(std::span<const double> params, std::span<const double> in, std::span<const double> out,
                std::span<const double> grad_out, std::span<double> grad_params,
                std::span<double> grad_in) const override;
  std::string describe() const override;

 private:
  Shape in_, out_;
};

class Relu final : public Layer {
 public:
  explicit Relu(Shape s) : shape_(s) {}
  Shape input_shape() const override { return shape_; }
  Shape output_shape() const override { return shape_; }
  void forward(std::span<const double>, std::span<const double> in, std::span<double> out) const override;
  void backward(std::span<const double>, std::span<const double> in, std::span<const double> out,
                std::span<const double> grad_out, std::span<double>, std::span<double> grad_in) const override;
  std::string describe() const override { return "relu"; }

 private:
  Shape shape_;
};

class Sigmoid final : public Layer {
 public:
  explicit Sigmoid(Shape s) : shape_(s) {}
  Shape input_shape() const override { return shape_; }
  Shape output_shape() const override { return shape_; }
  void forward(std::span<const double>, std::span<const double> in, std::span<double> out) const override;
  void backward(std::span<const double>, std::span<const double> in, std::span<const double> out,
                std::span<const double> grad_out, std::span<double>, std::span<double> grad_in) const override;
  std::string describe() const override { return "sigmoid"; }

 private:
  Shape shape_;
};

/// Nearest-neighbour 2x upsampling in both spatial directions.
class Upsample2d final : public Layer {
 public:
  explicit Upsample2d(Shape in) : in_(in), out_{in.c, in.h * 2, in.w * 2} {}
  Shape input_shape() const override { return in_; }
  Shape output_shape() const override { return out_; }
  void forward(std::span<const double>, std::span<const double> in, std::span<double> out) const override;
  void backward(std::span<const double>, std::span<const double> in, std::span<const double> out,
                std::span<const double> grad_out, std::span<double>, std::span<double> grad_in) const override;
  std::string describe() const override { return "upsample2x"; }

 private:
  Shape in_, out_;
};

/// Non-overlapping max pooling along the length axis; a trailing remainder is dropped.
class MaxPool1d final : public Layer {
 public:
  MaxPool1d(Shape in, int window) : in_(in), out_{in.c, 1, in.w / window}, window_(window) {}
  Shape input_shape() const override { return in_; }
  Shape output_shape() const override { return out_; }
  void forward(std::span<const double>, std::span<const double> in, std::span<double> out) const override;
  void backward(std::span<const double>, std::span<const double> in, std::span<const double> out,
                std::span<const double> grad_out, std::span<double>, std::span<double> grad_in) const override;
  std::string describe() const override { return "maxpool" + std::to_string(window_); }

 private:
  Shape in_, out_;
  int window_;
};

class GlobalAvgPool1d final : public Layer {
 public:
  explicit GlobalAvgPool1d(Shape in) : in_(in), out_{in.c, 1, 1} {}
  Shape input_shape() const override { return in_; }
  Shape output_shape() const override { return out_; }
  void forward(std::span<const double>, std::span<const double> in, std::span<double> out) const override;
  void backward(std::span<const double>, std::span<const double> in, std::span<const double> out,
                std::span<const double> grad_out, std::span<double>, std::span<double> grad_in) const override;
  std::string describe() const override { return "global-avg-pool"; }

 private:
  Shape in_, out_;
};

/// Activations of every layer from one forward pass; acts[0] is the input.
struct Trace {
  std::vector<std::vector<double>> acts;

  std::span<const double> output() const { return acts.back(); }
};

/// A sequential stack of layers that owns one flat parameter vector.
class Network {
 public:
  explicit Network(Shape input) : input_(input) {}

  template <typename L, typename... Args>
  Network& add(Args&&... args) {
    return push(std::make_shared<const L>(output_shape(), std::forward<Args>(args)...));
  }

  Shape input_shape() const noexcept { return input_; }
  Shape output_shape() const noexcept { return layers_.empty() ? input_ : layers_.back()->output_shape(); }
  std::size_t param_count() const noexcept { return params.size(); }

  void init(Rng& rng, Init mode = Init::FanInUniform);
  void forward(std::span<const double> input, Trace& trace) const;
  std::vector<double> predict(std::span<const double> input) const;

  /// Backpropagates grad_out through the trace; parameter gradients are
  /// accumulated into grad_params (same layout as params). Returns dL/dinput.
  std::vector<double> backward(const Trace& trace, std::span<const double> grad_out,
                               std::span<double> grad_params) const;

  /// One line per layer, for manifests and logs.
  std::vector<std::string> describe() const;
  /// Offset and size of each layer's parameter block.
  std::vector<std::pair<std::size_t, std::size_t>> param_blocks() const;

  std::vector<double> params;

 private:
  Network& push(std::shared_ptr<const Layer> layer);

  Shape input_;
  std::vector<std::shared_ptr<const Layer>> layers_;
  std::vector<std::size_t> offsets_;
};

/// SGD with classical momentum over a flat parameter vector.
class MomentumSgd {
 public:
  MomentumSgd(std::size_t n, double lr, double momentum) : velocity_(n, 0.0), lr_(lr), momentum_(momentum) {}

  void step(std::span<double> params, std::span<const double> grad);

 private:
  std::vector<double> velocity_;
  double lr_;
  double momentum_;
};

}  // namespace motionskill::nn
