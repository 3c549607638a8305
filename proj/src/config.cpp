#include "dail/config.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dail {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void value_error(const std::string& key, const std::string& value) {
  throw std::invalid_argument("invalid value '" + value + "' for key '" + key + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) value_error(key, value);
    return v;
  } catch (const std::invalid_argument&) {
    value_error(key, value);
  } catch (const std::out_of_range&) {
    value_error(key, value);
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) value_error(key, value);
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  value_error(key, value);
}

std::vector<std::size_t> parse_uint_list(const std::string& key,
                                         const std::string& value) {
  std::vector<std::size_t> out;
  if (trim(value).empty()) return out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    out.push_back(static_cast<std::size_t>(parse_uint(key, trim(item))));
  }
  return out;
}

std::string format_uint_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out;
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, ptr);
}

void apply_key(RunConfig& config, const std::string& key, const std::string& value) {
  auto& gen = config.gen;
  auto& train = config.train;
  auto& eval = config.eval;

  if (key == "gen.num_datasets") gen.num_datasets = parse_uint(key, value);
  else if (key == "gen.identities_per_dataset") gen.identities_per_dataset = parse_uint(key, value);
  else if (key == "gen.overlap_fraction") gen.overlap_fraction = parse_double(key, value);
  else if (key == "gen.samples_per_identity") gen.samples_per_identity = parse_uint(key, value);
  else if (key == "gen.input_dim") gen.input_dim = parse_uint(key, value);
  else if (key == "gen.prototype_spread") gen.prototype_spread = parse_double(key, value);
  else if (key == "gen.sample_noise") gen.sample_noise = parse_double(key, value);
  else if (key == "gen.domain_shift_strength") gen.domain_shift_strength = parse_double(key, value);
  else if (key == "gen.holdout_fraction") gen.holdout_fraction = parse_double(key, value);
  else if (key == "gen.seed") gen.seed = parse_uint(key, value);
  else if (key == "train.loss_mode") train.loss_mode = loss_mode_from_name(value);
  else if (key == "train.margin_m1") train.margin.m1 = parse_double(key, value);
  else if (key == "train.margin_m2") train.margin.m2 = parse_double(key, value);
  else if (key == "train.margin_m3") train.margin.m3 = parse_double(key, value);
  else if (key == "train.margin_scale") train.margin.s = parse_double(key, value);
  else if (key == "train.margin_angular") train.margin.angular = parse_bool(key, value);
  else if (key == "train.lambda") train.lambda = parse_double(key, value);
  else if (key == "train.cd_p") train.cd_p = parse_double(key, value);
  else if (key == "train.batch_size") train.batch_size = parse_uint(key, value);
  else if (key == "train.total_steps") train.total_steps = parse_uint(key, value);
  else if (key == "train.stage2_start_step") train.stage2_start_step = parse_uint(key, value);
  else if (key == "train.base_lr") train.base_lr = parse_double(key, value);
  else if (key == "train.lr_decay_steps") train.lr_decay_steps = parse_uint_list(key, value);
  else if (key == "train.lr_decay_factor") train.lr_decay_factor = parse_double(key, value);
  else if (key == "train.momentum") train.momentum = parse_double(key, value);
  else if (key == "train.hidden_dims") train.hidden_dims = parse_uint_list(key, value);
  else if (key == "train.embed_dim") train.embed_dim = parse_uint(key, value);
  else if (key == "train.emit_every") train.emit_every = parse_uint(key, value);
  else if (key == "train.seed") train.seed = parse_uint(key, value);
  else if (key == "eval.pairs") eval.pairs = parse_uint(key, value);
  else if (key == "eval.seed") eval.seed = parse_uint(key, value);
  else throw std::invalid_argument("unknown key '" + key + "'");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::stringstream stream(text);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(stream, line)) {
    line_number++;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto equals = line.find('=');
    if (equals == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_number) +
                                  ": expected 'section.key = value'");
    }
    const std::string key = trim(line.substr(0, equals));
    const std::string value = trim(line.substr(equals + 1));
    try {
      apply_key(config, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(line_number) + ": " +
                                  e.what());
    }
  }
  config.gen.validate();
  config.train.validate();
  return config;
}

std::string default_config_text() {
  const RunConfig d;
  std::ostringstream out;
  out << "# Reference configuration; every key listed with its default.\n"
      << "\n"
      << "# Synthetic corpus\n"
      << "gen.num_datasets = " << d.gen.num_datasets << "\n"
      << "gen.identities_per_dataset = " << d.gen.identities_per_dataset << "\n"
      << "gen.overlap_fraction = " << format_double(d.gen.overlap_fraction) << "\n"
      << "gen.samples_per_identity = " << d.gen.samples_per_identity << "\n"
      << "gen.input_dim = " << d.gen.input_dim << "\n"
      << "gen.prototype_spread = " << format_double(d.gen.prototype_spread) << "\n"
      << "gen.sample_noise = " << format_double(d.gen.sample_noise) << "\n"
      << "gen.domain_shift_strength = " << format_double(d.gen.domain_shift_strength)
      << "\n"
      << "gen.holdout_fraction = " << format_double(d.gen.holdout_fraction) << "\n"
      << "gen.seed = " << d.gen.seed << "\n"
      << "\n"
      << "# Training\n"
      << "train.loss_mode = " << loss_mode_name(d.train.loss_mode) << "\n"
      << "train.margin_m1 = " << format_double(d.train.margin.m1) << "\n"
      << "train.margin_m2 = " << format_double(d.train.margin.m2) << "\n"
      << "train.margin_m3 = " << format_double(d.train.margin.m3) << "\n"
      << "train.margin_scale = " << format_double(d.train.margin.s) << "\n"
      << "train.margin_angular = " << (d.train.margin.angular ? "true" : "false") << "\n"
      << "train.lambda = " << format_double(d.train.lambda) << "\n"
      << "train.cd_p = " << format_double(d.train.cd_p) << "\n"
      << "train.batch_size = " << d.train.batch_size << "\n"
      << "train.total_steps = " << d.train.total_steps << "\n"
      << "train.stage2_start_step = " << d.train.stage2_start_step << "\n"
      << "train.base_lr = " << format_double(d.train.base_lr) << "\n"
      << "train.lr_decay_steps = " << format_uint_list(d.train.lr_decay_steps) << "\n"
      << "train.lr_decay_factor = " << format_double(d.train.lr_decay_factor) << "\n"
      << "train.momentum = " << format_double(d.train.momentum) << "\n"
      << "train.hidden_dims = " << format_uint_list(d.train.hidden_dims) << "\n"
      << "train.embed_dim = " << d.train.embed_dim << "\n"
      << "train.emit_every = " << d.train.emit_every << "\n"
      << "train.seed = " << d.train.seed << "\n"
      << "\n"
      << "# Evaluation\n"
      << "eval.pairs = " << d.eval.pairs << "\n"
      << "eval.seed = " << d.eval.seed << "\n";
  return out.str();
}

void override_seeds(RunConfig& config, std::uint64_t seed) {
  config.gen.seed = seed;
  config.train.seed = seed;
  config.eval.seed = seed;
}

}  // namespace dail
