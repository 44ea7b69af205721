#include "ivgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "ivgan/errors.hpp"

namespace ivgan {

namespace {

template <typename T>
void put(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& what) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw FormatError("checkpoint truncated while reading " + what);
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void add_mlp(std::vector<NamedTensor>& out, const std::string& prefix, const Mlp& net) {
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    out.push_back({prefix + "." + (i % 2 ? "b" : "w") + std::to_string(i / 2), net.params()[i]});
  }
}

void add_adam(std::vector<NamedTensor>& out, const std::string& prefix, const AdamState& s) {
  out.push_back({prefix + ".t", Tensor::scalar(static_cast<double>(s.t))});
  for (std::size_t i = 0; i < s.m.size(); ++i) {
    out.push_back({prefix + ".m" + std::to_string(i), s.m[i]});
    out.push_back({prefix + ".v" + std::to_string(i), s.v[i]});
  }
}

class TensorMap {
 public:
  explicit TensorMap(const std::vector<NamedTensor>& tensors) {
    for (const auto& t : tensors) map_[t.name] = &t.value;
  }
  const Tensor& at(const std::string& name) const {
    auto it = map_.find(name);
    if (it == map_.end()) throw FormatError("checkpoint is missing tensor '" + name + "'");
    return *it->second;
  }
  double scalar(const std::string& name) const { return at(name).item(); }
  std::uint64_t u64(const std::string& prefix) const {
    return (static_cast<std::uint64_t>(scalar(prefix + ".hi")) << 32) |
           static_cast<std::uint64_t>(scalar(prefix + ".lo"));
  }

 private:
  std::map<std::string, const Tensor*> map_;
};

void restore_mlp(const TensorMap& map, const std::string& prefix, Mlp& net) {
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    const Tensor& t = map.at(prefix + "." + (i % 2 ? "b" : "w") + std::to_string(i / 2));
    if (!t.same_dims(net.params()[i])) throw FormatError("tensor " + prefix + " has wrong dims");
    net.params()[i] = t;
  }
}

AdamState restore_adam(const TensorMap& map, const std::string& prefix, std::size_t count) {
  AdamState s;
  s.t = static_cast<std::uint64_t>(map.scalar(prefix + ".t"));
  for (std::size_t i = 0; i < count; ++i) {
    s.m.push_back(map.at(prefix + ".m" + std::to_string(i)));
    s.v.push_back(map.at(prefix + ".v" + std::to_string(i)));
  }
  return s;
}

void add_u64(std::vector<NamedTensor>& out, const std::string& prefix, std::uint64_t v) {
  out.push_back({prefix + ".hi", Tensor::scalar(static_cast<double>(v >> 32))});
  out.push_back({prefix + ".lo", Tensor::scalar(static_cast<double>(v & 0xFFFFFFFFULL))});
}

}  // namespace

void write_tensor_file(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  os.write(kCheckpointMagic, 4);
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t.name.size() > UINT16_MAX) throw ContractError("tensor name too long: " + t.name);
    if (t.value.rank() > UINT8_MAX) throw ContractError("tensor rank too large: " + t.name);
    put<std::uint16_t>(os, static_cast<std::uint16_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(t.value.rank()));
    for (auto d : t.value.dims()) put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    for (double v : t.value.data()) put<double>(os, v);
  }
  if (!os) throw std::runtime_error("failed writing checkpoint " + path.string());
}

std::vector<NamedTensor> read_tensor_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint " + path.string());
  char magic[4];
  if (!is.read(magic, 4)) throw FormatError("checkpoint truncated in header");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("bad checkpoint magic");
  const auto version = get<std::uint32_t>(is, "version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = get<std::uint32_t>(is, "tensor count");
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get<std::uint16_t>(is, "name length");
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw FormatError("checkpoint truncated in tensor name");
    const auto rank = get<std::uint8_t>(is, "rank of " + name);
    Dims dims;
    for (std::uint8_t r = 0; r < rank; ++r) dims.push_back(get<std::uint32_t>(is, "dims of " + name));
    std::vector<double> data(element_count(dims));
    for (double& v : data) v = get<double>(is, "payload of " + name);
    out.push_back({std::move(name), Tensor(std::move(dims), std::move(data))});
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in checkpoint");
  return out;
}

std::vector<NamedTensor> to_tensors(const TrainerState& state, const TrainConfig& c) {
  std::vector<NamedTensor> out;
  add_u64(out, "state.iter", state.iter);
  add_mlp(out, "encoder", state.models.encoder);
  add_mlp(out, "generator", state.models.generator);
  add_mlp(out, "trunk", state.models.trunk);
  add_mlp(out, "d_head", state.models.d_head);
  add_mlp(out, "f_head", state.models.f_head);
  add_adam(out, "adam.disc", state.disc);
  add_adam(out, "adam.gen", state.gen);
  add_adam(out, "adam.enc", state.enc);

  auto cfg = [&](const std::string& key, double v) { out.push_back({"config." + key, Tensor::scalar(v)}); };
  cfg("base_loss", static_cast<double>(c.base_loss));
  cfg("latent_dim", static_cast<double>(c.latent_dim));
  cfg("blocks", static_cast<double>(c.blocks));
  cfg("batch_size", static_cast<double>(c.batch_size));
  add_u64(out, "config.total_iters", c.total_iters);
  cfg("inner_iters", static_cast<double>(c.inner_iters));
  cfg("lr_df", c.lr_df);
  cfg("lr_e", c.lr_e);
  cfg("adam_beta1", c.adam_beta1);
  cfg("adam_beta2", c.adam_beta2);
  cfg("adam_eps", c.adam_eps);
  cfg("lambda_gd", c.coeffs.lambda_gd);
  cfg("mu_gd", c.coeffs.mu_gd);
  cfg("lambda_e", c.coeffs.lambda_e);
  cfg("mu_e", c.coeffs.mu_e);
  cfg("noise_sigma0", c.noise_sigma0);
  cfg("noise_decay_frac", c.noise_decay_frac);
  add_u64(out, "config.seed", c.seed);
  cfg("dataset", static_cast<double>(c.dataset));
  cfg("square_a", c.square_a);
  cfg("d_sees_intervened", c.d_sees_intervened ? 1.0 : 0.0);
  add_u64(out, "config.eval_every", c.eval_every);
  add_u64(out, "config.checkpoint_every", c.checkpoint_every);
  cfg("eval_samples", static_cast<double>(c.eval_samples));
  std::vector<double> hidden(c.hidden.begin(), c.hidden.end());
  out.push_back({"config.hidden", Tensor::vector(hidden)});
  return out;
}

Checkpoint from_tensors(const std::vector<NamedTensor>& tensors) {
  const TensorMap map(tensors);
  auto sz = [&](const std::string& key) { return static_cast<std::size_t>(map.scalar("config." + key)); };
  TrainConfig c;
  if (sz("base_loss") > 1) throw FormatError("checkpoint has an unknown base_loss");
  c.base_loss = static_cast<BaseLoss>(sz("base_loss"));
  c.latent_dim = sz("latent_dim");
  c.blocks = sz("blocks");
  c.batch_size = sz("batch_size");
  c.total_iters = map.u64("config.total_iters");
  c.inner_iters = sz("inner_iters");
  c.lr_df = map.scalar("config.lr_df");
  c.lr_e = map.scalar("config.lr_e");
  c.adam_beta1 = map.scalar("config.adam_beta1");
  c.adam_beta2 = map.scalar("config.adam_beta2");
  c.adam_eps = map.scalar("config.adam_eps");
  c.coeffs.lambda_gd = map.scalar("config.lambda_gd");
  c.coeffs.mu_gd = map.scalar("config.mu_gd");
  c.coeffs.lambda_e = map.scalar("config.lambda_e");
  c.coeffs.mu_e = map.scalar("config.mu_e");
  c.noise_sigma0 = map.scalar("config.noise_sigma0");
  c.noise_decay_frac = map.scalar("config.noise_decay_frac");
  c.seed = map.u64("config.seed");
  if (sz("dataset") > 2) throw FormatError("checkpoint has an unknown dataset");
  c.dataset = static_cast<DatasetKind>(sz("dataset"));
  c.square_a = map.scalar("config.square_a");
  c.d_sees_intervened = map.scalar("config.d_sees_intervened") != 0.0;
  c.eval_every = map.u64("config.eval_every");
  c.checkpoint_every = map.u64("config.checkpoint_every");
  c.eval_samples = sz("eval_samples");
  c.hidden.clear();
  for (double h : map.at("config.hidden").data()) c.hidden.push_back(static_cast<std::size_t>(h));
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw FormatError(std::string("checkpoint carries an invalid config: ") + e.what());
  }

  Checkpoint ck{init_trainer(c), c};
  ck.state.iter = map.u64("state.iter");
  restore_mlp(map, "encoder", ck.state.models.encoder);
  restore_mlp(map, "generator", ck.state.models.generator);
  restore_mlp(map, "trunk", ck.state.models.trunk);
  restore_mlp(map, "d_head", ck.state.models.d_head);
  restore_mlp(map, "f_head", ck.state.models.f_head);
  ck.state.disc = restore_adam(map, "adam.disc", ck.state.disc.m.size());
  ck.state.gen = restore_adam(map, "adam.gen", ck.state.gen.m.size());
  ck.state.enc = restore_adam(map, "adam.enc", ck.state.enc.m.size());
  return ck;
}

void save_checkpoint(const TrainerState& state, const TrainConfig& config,
                     const std::filesystem::path& path) {
  write_tensor_file(path, to_tensors(state, config));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return from_tensors(read_tensor_file(path));
}

}  // namespace ivgan
