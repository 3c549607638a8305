#include "dail/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

namespace dail {

namespace {

constexpr char kMagic[8] = {'D', 'A', 'I', 'L', 'C', 'K', 'P', 'T'};

void write_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

void read_exact(std::istream& in, char* dst, std::size_t n) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw std::runtime_error("load_checkpoint: unexpected end of file");
  }
}

std::uint32_t read_u32(std::istream& in) {
  char bytes[4];
  read_exact(in, bytes, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  }
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  char bytes[8];
  read_exact(in, bytes, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  }
  return v;
}

NamedArray matrix_array(const std::string& name, const Matrix& m) {
  return {name, {m.rows, m.cols}, m.data};
}

NamedArray vector_array(const std::string& name, const std::vector<double>& v) {
  return {name, {v.size()}, v};
}

const NamedArray& find_array(const Checkpoint& ckpt, const std::string& name) {
  for (const auto& arr : ckpt.arrays) {
    if (arr.name == name) return arr;
  }
  throw std::runtime_error("checkpoint: missing array '" + name + "'");
}

bool has_array(const Checkpoint& ckpt, const std::string& name) {
  for (const auto& arr : ckpt.arrays) {
    if (arr.name == name) return true;
  }
  return false;
}

Matrix to_matrix(const NamedArray& arr) {
  if (arr.dims.size() != 2) {
    throw std::runtime_error("checkpoint: array '" + arr.name + "' is not 2-D");
  }
  Matrix m(arr.dims[0], arr.dims[1]);
  m.data = arr.values;
  return m;
}

std::vector<double> to_vector(const NamedArray& arr) {
  if (arr.dims.size() != 1) {
    throw std::runtime_error("checkpoint: array '" + arr.name + "' is not 1-D");
  }
  return arr.values;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);

  out.write(kMagic, sizeof(kMagic));
  out.put(static_cast<char>(ckpt.version));

  const std::string meta = ckpt.metadata.dump();
  write_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));

  write_u32(out, static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& arr : ckpt.arrays) {
    write_u32(out, static_cast<std::uint32_t>(arr.name.size()));
    out.write(arr.name.data(), static_cast<std::streamsize>(arr.name.size()));
    write_u32(out, static_cast<std::uint32_t>(arr.dims.size()));
    std::uint64_t count = 1;
    for (std::uint64_t d : arr.dims) {
      write_u64(out, d);
      count *= d;
    }
    if (count != arr.values.size()) {
      throw std::runtime_error("save_checkpoint: array '" + arr.name +
                               "' dims do not match value count");
    }
    for (double v : arr.values) write_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);

  char magic[8];
  read_exact(in, magic, sizeof(magic));
  if (!std::equal(magic, magic + 8, kMagic)) {
    throw std::runtime_error("load_checkpoint: not a checkpoint file");
  }

  char version_byte;
  read_exact(in, &version_byte, 1);
  Checkpoint ckpt;
  ckpt.version = static_cast<std::uint8_t>(version_byte);
  if (ckpt.version != Checkpoint::kVersion) {
    throw std::runtime_error("load_checkpoint: unsupported version " +
                             std::to_string(ckpt.version) + " (expected " +
                             std::to_string(Checkpoint::kVersion) + ")");
  }

  const std::uint32_t meta_len = read_u32(in);
  std::string meta(meta_len, '\0');
  read_exact(in, meta.data(), meta_len);
  try {
    ckpt.metadata = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("load_checkpoint: bad metadata: ") + e.what());
  }

  const std::uint32_t array_count = read_u32(in);
  for (std::uint32_t a = 0; a < array_count; ++a) {
    NamedArray arr;
    const std::uint32_t name_len = read_u32(in);
    arr.name.resize(name_len);
    read_exact(in, arr.name.data(), name_len);
    const std::uint32_t ndim = read_u32(in);
    std::uint64_t count = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      arr.dims.push_back(read_u64(in));
      count *= arr.dims.back();
    }
    arr.values.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      arr.values[i] = std::bit_cast<double>(read_u64(in));
    }
    ckpt.arrays.push_back(std::move(arr));
  }
  return ckpt;
}

nlohmann::json train_config_to_json(const TrainConfig& config) {
  return nlohmann::json{
      {"loss_mode", loss_mode_name(config.loss_mode)},
      {"margin",
       {{"m1", config.margin.m1},
        {"m2", config.margin.m2},
        {"m3", config.margin.m3},
        {"s", config.margin.s},
        {"angular", config.margin.angular}}},
      {"lambda", config.lambda},
      {"cd_p", config.cd_p},
      {"batch_size", config.batch_size},
      {"total_steps", config.total_steps},
      {"stage2_start_step", config.stage2_start_step},
      {"base_lr", config.base_lr},
      {"lr_decay_steps", config.lr_decay_steps},
      {"lr_decay_factor", config.lr_decay_factor},
      {"momentum", config.momentum},
      {"hidden_dims", config.hidden_dims},
      {"embed_dim", config.embed_dim},
      {"emit_every", config.emit_every},
      {"seed", config.seed},
  };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig config;
  config.loss_mode = loss_mode_from_name(j.at("loss_mode").get<std::string>());
  const auto& margin = j.at("margin");
  config.margin.m1 = margin.at("m1").get<double>();
  config.margin.m2 = margin.at("m2").get<double>();
  config.margin.m3 = margin.at("m3").get<double>();
  config.margin.s = margin.at("s").get<double>();
  config.margin.angular = margin.at("angular").get<bool>();
  config.lambda = j.at("lambda").get<double>();
  config.cd_p = j.at("cd_p").get<double>();
  config.batch_size = j.at("batch_size").get<std::size_t>();
  config.total_steps = j.at("total_steps").get<std::size_t>();
  config.stage2_start_step = j.at("stage2_start_step").get<std::size_t>();
  config.base_lr = j.at("base_lr").get<double>();
  config.lr_decay_steps = j.at("lr_decay_steps").get<std::vector<std::size_t>>();
  config.lr_decay_factor = j.at("lr_decay_factor").get<double>();
  config.momentum = j.at("momentum").get<double>();
  config.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
  config.embed_dim = j.at("embed_dim").get<std::size_t>();
  config.emit_every = j.at("emit_every").get<std::size_t>();
  config.seed = j.at("seed").get<std::uint64_t>();
  return config;
}

Checkpoint make_checkpoint(const TrainState& state, const TrainConfig& config) {
  Checkpoint ckpt;
  ckpt.metadata = nlohmann::json{
      {"step", state.step},
      {"seed", state.seed},
      {"loss_mode", loss_mode_name(config.loss_mode)},
      {"lambda", state.params.lambda},
      {"margin",
       {{"m1", state.params.margin.m1},
        {"m2", state.params.margin.m2},
        {"m3", state.params.margin.m3},
        {"s", state.params.margin.s},
        {"angular", state.params.margin.angular}}},
      {"prng", Prng::kAlgorithm},
      {"config", train_config_to_json(config)},
  };

  const auto add_group = [&ckpt](const std::string& prefix, const ModelParams& params,
                                 bool is_momentum, const ModelGrads& momentum) {
    for (std::size_t l = 0; l < params.embed_layers.size(); ++l) {
      const auto& layer =
          is_momentum
              ? std::pair<const Matrix&, const std::vector<double>&>(
                    momentum.embed_layers[l].w, momentum.embed_layers[l].b)
              : std::pair<const Matrix&, const std::vector<double>&>(
                    params.embed_layers[l].w, params.embed_layers[l].b);
      ckpt.arrays.push_back(
          matrix_array(prefix + "embed." + std::to_string(l) + ".w", layer.first));
      ckpt.arrays.push_back(
          vector_array(prefix + "embed." + std::to_string(l) + ".b", layer.second));
    }
    ckpt.arrays.push_back(matrix_array(
        prefix + "class.w", is_momentum ? momentum.class_w : params.class_w));
    const auto& class_b = is_momentum ? momentum.class_b : params.class_b;
    if (!class_b.empty()) {
      ckpt.arrays.push_back(vector_array(prefix + "class.b", class_b));
    }
    if (params.has_domain_head()) {
      ckpt.arrays.push_back(matrix_array(
          prefix + "domain.w", is_momentum ? momentum.domain_w : params.domain_w));
      ckpt.arrays.push_back(vector_array(
          prefix + "domain.b", is_momentum ? momentum.domain_b : params.domain_b));
    }
  };
  add_group("", state.params, false, state.momentum);
  add_group("mom.", state.params, true, state.momentum);
  return ckpt;
}

TrainState state_from_checkpoint(const Checkpoint& ckpt) {
  TrainState state;
  state.step = ckpt.metadata.at("step").get<std::size_t>();
  state.seed = ckpt.metadata.at("seed").get<std::uint64_t>();
  state.params.lambda = ckpt.metadata.at("lambda").get<double>();
  const auto& margin = ckpt.metadata.at("margin");
  state.params.margin.m1 = margin.at("m1").get<double>();
  state.params.margin.m2 = margin.at("m2").get<double>();
  state.params.margin.m3 = margin.at("m3").get<double>();
  state.params.margin.s = margin.at("s").get<double>();
  state.params.margin.angular = margin.at("angular").get<bool>();

  for (std::size_t l = 0;; ++l) {
    const std::string w_name = "embed." + std::to_string(l) + ".w";
    if (!has_array(ckpt, w_name)) break;
    state.params.embed_layers.push_back(
        {to_matrix(find_array(ckpt, w_name)),
         to_vector(find_array(ckpt, "embed." + std::to_string(l) + ".b"))});
  }
  state.params.class_w = to_matrix(find_array(ckpt, "class.w"));
  if (has_array(ckpt, "class.b")) {
    state.params.class_b = to_vector(find_array(ckpt, "class.b"));
  }
  if (has_array(ckpt, "domain.w")) {
    state.params.domain_w = to_matrix(find_array(ckpt, "domain.w"));
    state.params.domain_b = to_vector(find_array(ckpt, "domain.b"));
  }

  state.momentum = zero_grads(state.params);
  for (std::size_t l = 0; l < state.params.embed_layers.size(); ++l) {
    state.momentum.embed_layers[l].w =
        to_matrix(find_array(ckpt, "mom.embed." + std::to_string(l) + ".w"));
    state.momentum.embed_layers[l].b =
        to_vector(find_array(ckpt, "mom.embed." + std::to_string(l) + ".b"));
  }
  state.momentum.class_w = to_matrix(find_array(ckpt, "mom.class.w"));
  if (has_array(ckpt, "mom.class.b")) {
    state.momentum.class_b = to_vector(find_array(ckpt, "mom.class.b"));
  }
  if (has_array(ckpt, "mom.domain.w")) {
    state.momentum.domain_w = to_matrix(find_array(ckpt, "mom.domain.w"));
    state.momentum.domain_b = to_vector(find_array(ckpt, "mom.domain.b"));
  }
  return state;
}

}  // namespace dail
