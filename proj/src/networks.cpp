#include "ivgan/networks.hpp"

#include <cmath>

#include "ivgan/errors.hpp"
#include "ivgan/ops.hpp"

namespace ivgan {

namespace {

Var activate(Var x, Activation act) {
  switch (act) {
    case Activation::identity: return x;
    case Activation::relu: return relu(x);
    case Activation::leaky_relu: return leaky_relu(x, kLeakySlope);
    case Activation::tanh: return tanh(x);
    case Activation::sigmoid: return sigmoid(x);
    case Activation::softmax: return softmax_rows(x);
  }
  throw ContractError("unknown activation");
}

bool relu_family(Activation a) { return a == Activation::relu || a == Activation::leaky_relu; }

}  // namespace

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) throw ShapeError("an MLP needs at least input and output widths");
  for (auto w : layer_widths)
    if (w == 0) throw ShapeError("MLP widths must be positive");
}

double init_variance(const MlpSpec& spec, std::size_t fan_in) {
  const double gain = relu_family(spec.hidden_activation) ? 2.0 : 1.0;
  return gain / static_cast<double>(fan_in);
}

Mlp::Mlp(MlpSpec spec, RandomSource& rng) : spec_(std::move(spec)) {
  spec_.validate();
  for (std::size_t l = 0; l < spec_.affine_layers(); ++l) {
    const std::size_t fan_in = spec_.layer_widths[l], fan_out = spec_.layer_widths[l + 1];
    const double sd = std::sqrt(init_variance(spec_, fan_in));
    Tensor w = gaussian(rng, {fan_in, fan_out});
    for (double& v : w.data()) v *= sd;
    params_.push_back(std::move(w));
    params_.emplace_back(Dims{1, fan_out});
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

BoundMlp bind(Tape& tape, const Mlp& net, bool trainable) {
  BoundMlp b{&net.spec(), {}};
  b.params.reserve(net.params().size());
  for (const auto& p : net.params()) b.params.push_back(trainable ? tape.leaf(p) : tape.constant(p));
  return b;
}

Var forward(const BoundMlp& net, Var x) {
  const std::size_t layers = net.spec->affine_layers();
  if (x.value().rank() != 2 || x.value().dim(1) != net.spec->input_width()) {
    throw ShapeError("network expects n x " + std::to_string(net.spec->input_width()) +
                     " input, got " + dims_to_string(x.value().dims()));
  }
  Var h = x;
  for (std::size_t l = 0; l < layers; ++l) {
    h = add_row(matmul(h, net.params[2 * l]), net.params[2 * l + 1]);
    h = activate(h, l + 1 < layers ? net.spec->hidden_activation : net.spec->output_activation);
  }
  return h;
}

Tensor forward(const Mlp& net, const Tensor& x) {
  Tape tape;
  return forward(bind(tape, net, false), tape.constant(x)).value();
}

ModelSpecs default_model_specs(std::size_t data_dim, std::size_t latent_dim, std::size_t blocks,
                               std::vector<std::size_t> hidden) {
  auto widths = [&](std::size_t in, std::size_t out) {
    std::vector<std::size_t> w{in};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(out);
    return w;
  };
  std::vector<std::size_t> trunk{data_dim};
  trunk.insert(trunk.end(), hidden.begin(), hidden.end());
  const std::size_t feat = trunk.back();
  const auto lr = Activation::leaky_relu;
  return ModelSpecs{
      MlpSpec{widths(data_dim, latent_dim), lr, Activation::identity},
      MlpSpec{widths(latent_dim, data_dim), lr, Activation::identity},
      MlpSpec{trunk, lr, lr},
      MlpSpec{{feat, 1}, lr, Activation::identity},
      MlpSpec{{feat, blocks}, lr, Activation::softmax},
  };
}

GanModels init_models(std::size_t data_dim, std::size_t latent_dim, std::size_t blocks,
                      const ModelSpecs& specs, RandomSource& rng) {
  if (blocks == 0 || latent_dim % blocks != 0) {
    throw ShapeError("latent dim " + std::to_string(latent_dim) +
                     " is not divisible by block count " + std::to_string(blocks));
  }
  for (const MlpSpec* s : {&specs.encoder, &specs.generator, &specs.trunk, &specs.d_head,
                           &specs.f_head})
    s->validate();
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ShapeError(std::string("inconsistent model dims: ") + what);
  };
  require(specs.encoder.input_width() == data_dim, "encoder input != data dim");
  require(specs.encoder.output_width() == latent_dim, "encoder output != latent dim");
  require(specs.generator.input_width() == latent_dim, "generator input != latent dim");
  require(specs.generator.output_width() == data_dim, "generator output != data dim");
  require(specs.trunk.input_width() == data_dim, "trunk input != data dim");
  require(specs.d_head.input_width() == specs.trunk.output_width(), "D head input != trunk out");
  require(specs.f_head.input_width() == specs.trunk.output_width(), "f head input != trunk out");
  require(specs.d_head.output_width() == 1, "D head must output one score");
  require(specs.f_head.output_width() == blocks, "f head must output k probabilities");
  require(specs.f_head.output_activation == Activation::softmax, "f head must end in softmax");

  RandomSource enc = rng.substream(1), gen = rng.substream(2), trunk = rng.substream(3),
               dh = rng.substream(4), fh = rng.substream(5);
  return GanModels{Mlp(specs.encoder, enc), Mlp(specs.generator, gen), Mlp(specs.trunk, trunk),
                   Mlp(specs.d_head, dh), Mlp(specs.f_head, fh)};
}

BoundModels bind(Tape& tape, const GanModels& models, Trainable t) {
  return BoundModels{bind(tape, models.encoder, t.encoder), bind(tape, models.generator, t.generator),
                     bind(tape, models.trunk, t.trunk), bind(tape, models.d_head, t.d_head),
                     bind(tape, models.f_head, t.f_head)};
}

Var encode(const BoundModels& m, Var x) { return forward(m.encoder, x); }
Var generate(const BoundModels& m, Var z) { return forward(m.generator, z); }
Var discriminate(const BoundModels& m, Var x) { return forward(m.d_head, forward(m.trunk, x)); }
Var classify(const BoundModels& m, Var x) { return forward(m.f_head, forward(m.trunk, x)); }

Tensor encode(const GanModels& m, const Tensor& x) { return forward(m.encoder, x); }
Tensor generate(const GanModels& m, const Tensor& z) { return forward(m.generator, z); }
Tensor discriminate(const GanModels& m, const Tensor& x) {
  return forward(m.d_head, forward(m.trunk, x));
}
Tensor classify(const GanModels& m, const Tensor& x) {
  return forward(m.f_head, forward(m.trunk, x));
}

}  // namespace ivgan
