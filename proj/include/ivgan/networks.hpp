#pragma once

#include <cstddef>
#include <vector>

#include "ivgan/autodiff.hpp"
#include "ivgan/random.hpp"
#include "ivgan/tensor.hpp"

namespace ivgan {

enum class Activation { identity, relu, leaky_relu, tanh, sigmoid, softmax };

inline constexpr double kLeakySlope = 0.2;

struct MlpSpec {
  // Input width followed by the width of every affine layer.
  std::vector<std::size_t> layer_widths;
  Activation hidden_activation = Activation::leaky_relu;
  Activation output_activation = Activation::identity;

  std::size_t input_width() const { return layer_widths.front(); }
  std::size_t output_width() const { return layer_widths.back(); }
  std::size_t affine_layers() const { return layer_widths.size() - 1; }
  void validate() const;
};

// Weights are (fan_in x fan_out) so a batch multiplies from the left.
class Mlp {
 public:
  Mlp() = default;
  // He init N(0, 2/fan_in) for relu-family nets, N(0, 1/fan_in) otherwise;
  // zero biases.
  Mlp(MlpSpec spec, RandomSource& rng);

  const MlpSpec& spec() const { return spec_; }
  Tensor& weight(std::size_t layer) { return params_[2 * layer]; }
  const Tensor& weight(std::size_t layer) const { return params_[2 * layer]; }
  Tensor& bias(std::size_t layer) { return params_[2 * layer + 1]; }
  const Tensor& bias(std::size_t layer) const { return params_[2 * layer + 1]; }

  // Flat list: w0, b0, w1, b1, ...
  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  std::size_t parameter_count() const;

  friend bool operator==(const Mlp& a, const Mlp& b) { return a.params_ == b.params_; }

 private:
  MlpSpec spec_;
  std::vector<Tensor> params_;
};

double init_variance(const MlpSpec& spec, std::size_t fan_in);

// Parameters of an Mlp placed on a tape, either as leaves (trainable) or as
// constants.
struct BoundMlp {
  const MlpSpec* spec = nullptr;
  std::vector<Var> params;
};

BoundMlp bind(Tape& tape, const Mlp& net, bool trainable = true);
Var forward(const BoundMlp& net, Var x);
Tensor forward(const Mlp& net, const Tensor& x);

struct ModelSpecs {
  MlpSpec encoder;
  MlpSpec generator;
  MlpSpec trunk;
  MlpSpec d_head;
  MlpSpec f_head;
};

// Desk-scale defaults: hidden widths [64, 64], leaky_relu(0.2), identity
// latent and data outputs, a one-layer D head and a one-layer softmax f head
// on a shared trunk.
ModelSpecs default_model_specs(std::size_t data_dim, std::size_t latent_dim, std::size_t blocks,
                               std::vector<std::size_t> hidden = {64, 64});

struct GanModels {
  Mlp encoder;
  Mlp generator;
  Mlp trunk;   // shared by discriminator and classifier
  Mlp d_head;  // trunk_out -> 1
  Mlp f_head;  // trunk_out -> k, softmax

  std::size_t data_dim() const { return generator.spec().output_width(); }
  std::size_t latent_dim() const { return encoder.spec().output_width(); }
  std::size_t blocks() const { return f_head.spec().output_width(); }

  friend bool operator==(const GanModels&, const GanModels&) = default;
};

GanModels init_models(std::size_t data_dim, std::size_t latent_dim, std::size_t blocks,
                      const ModelSpecs& specs, RandomSource& rng);

struct Trainable {
  bool encoder = true;
  bool generator = true;
  bool trunk = true;
  bool d_head = true;
  bool f_head = true;
};

struct BoundModels {
  BoundMlp encoder, generator, trunk, d_head, f_head;
};

BoundModels bind(Tape& tape, const GanModels& models, Trainable trainable = {});

Var encode(const BoundModels& m, Var x);
Var generate(const BoundModels& m, Var z);
// Raw discriminator score, n x 1.
Var discriminate(const BoundModels& m, Var x);
// Classifier probabilities, n x k.
Var classify(const BoundModels& m, Var x);

Tensor encode(const GanModels& m, const Tensor& x);
Tensor generate(const GanModels& m, const Tensor& z);
Tensor discriminate(const GanModels& m, const Tensor& x);
Tensor classify(const GanModels& m, const Tensor& x);

}  // namespace ivgan
