#include "cfea/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cfea/error.hpp"

namespace cfea {

void RunConfig::validate() const {
  synth.validate();
  backbone.validate();
  weights.validate();
  augment.validate();
  disc_enc_config().validate();
  disc_dec_config().validate();
  seg_opt_config().validate();
  disc_opt_config().validate();
  if (source_crop_size < 1 || target_crop_size < 1)
    throw ConfigError("config: crop sizes must be positive");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (total_iterations < 1) throw ConfigError("config: total_iterations must be >= 1");
  if (checkpoint_every < 1) throw ConfigError("config: checkpoint_every must be >= 1");
  if (ema_ramp_iters < 0) throw ConfigError("config: ema_ramp_iters must be >= 0");
}

DiscriminatorConfig RunConfig::disc_enc_config() const {
  return {backbone.encoder_channels(), disc_width_enc, disc_output_mode};
}

DiscriminatorConfig RunConfig::disc_dec_config() const {
  return {kNumClasses, disc_width_dec, disc_output_mode};
}

AdamConfig RunConfig::seg_opt_config() const {
  AdamConfig c;
  c.lr = seg_lr;
  return c;
}

AdamConfig RunConfig::disc_opt_config() const {
  AdamConfig c;
  c.lr = disc_lr;
  return c;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("trailing characters in number: " + s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number: " + s);
  }
}

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("invalid integer: " + s);
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("invalid unsigned integer: " + s);
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("invalid boolean: " + s);
}

#define F_DOUBLE(section, key, expr)                                            \
  Field{section, key, [](const RunConfig& c) { return fmt_double(c.expr); },    \
        [](RunConfig& c, const std::string& v) { c.expr = parse_double(v); }}
#define F_INT(section, key, type, expr)                                         \
  Field{section, key, [](const RunConfig& c) { return std::to_string(c.expr); },\
        [](RunConfig& c, const std::string& v) { c.expr = static_cast<type>(parse_int(v)); }}
#define F_UINT(section, key, expr)                                              \
  Field{section, key, [](const RunConfig& c) { return std::to_string(c.expr); },\
        [](RunConfig& c, const std::string& v) { c.expr = parse_uint(v); }}
#define F_BOOL(section, key, expr)                                              \
  Field{section, key, [](const RunConfig& c) { return c.expr ? "true" : "false"; }, \
        [](RunConfig& c, const std::string& v) { c.expr = parse_bool(v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      F_INT("synth", "n_source", int, synth.n_source),
      F_INT("synth", "n_target", int, synth.n_target),
      F_INT("synth", "n_target_test", int, synth.n_target_test),
      F_INT("synth", "image_size", int, synth.image_size),
      F_UINT("synth", "seed", synth.seed),
      F_DOUBLE("synth", "brightness_delta", synth.shift.brightness_delta),
      F_DOUBLE("synth", "hue_rotation_deg", synth.shift.hue_rotation_deg),
      F_DOUBLE("synth", "contrast_factor", synth.shift.contrast_factor),
      F_DOUBLE("synth", "noise_level", synth.shift.noise_level),
      F_DOUBLE("synth", "disc_radius_lo", synth.disc_radius_lo),
      F_DOUBLE("synth", "disc_radius_hi", synth.disc_radius_hi),
      F_DOUBLE("synth", "cup_ratio_lo", synth.cup_ratio_lo),
      F_DOUBLE("synth", "cup_ratio_hi", synth.cup_ratio_hi),
      F_DOUBLE("synth", "eccentricity", synth.eccentricity),
      F_INT("data", "source_crop_size", int, source_crop_size),
      F_INT("data", "target_crop_size", int, target_crop_size),
      F_BOOL("data", "standardize", standardize),
      F_INT("backbone", "input_size", int, backbone.input_size),
      F_INT("backbone", "depth", int, backbone.depth),
      F_INT("backbone", "base_channels", int, backbone.base_channels),
      F_INT("discriminator", "width_enc", int, disc_width_enc),
      F_INT("discriminator", "width_dec", int, disc_width_dec),
      Field{"discriminator", "output_mode",
            [](const RunConfig& c) {
              return c.disc_output_mode == DiscriminatorOutput::PatchMap ? "patch" : "scalar";
            },
            [](RunConfig& c, const std::string& v) {
              if (v == "patch")
                c.disc_output_mode = DiscriminatorOutput::PatchMap;
              else if (v == "scalar")
                c.disc_output_mode = DiscriminatorOutput::Scalar;
              else
                throw ConfigError("output_mode must be 'patch' or 'scalar'");
            }},
      F_DOUBLE("weights", "lambda_adv_enc", weights.lambda_adv_enc),
      F_DOUBLE("weights", "lambda_adv_dec", weights.lambda_adv_dec),
      F_DOUBLE("weights", "lambda_mse_enc", weights.lambda_mse_enc),
      F_DOUBLE("weights", "lambda_mse_dec", weights.lambda_mse_dec),
      F_DOUBLE("weights", "ema_decay", weights.ema_decay),
      F_INT("weights", "ema_ramp_iters", std::int64_t, ema_ramp_iters),
      F_DOUBLE("augment", "noise_sigma", augment.noise_sigma),
      F_DOUBLE("augment", "brightness_lo", augment.brightness_lo),
      F_DOUBLE("augment", "brightness_hi", augment.brightness_hi),
      F_DOUBLE("augment", "shift_lo", augment.shift_lo),
      F_DOUBLE("augment", "shift_hi", augment.shift_hi),
      F_DOUBLE("train", "seg_lr", seg_lr),
      F_DOUBLE("train", "disc_lr", disc_lr),
      F_INT("train", "batch_size", int, batch_size),
      F_INT("train", "total_iterations", std::int64_t, total_iterations),
      F_INT("train", "checkpoint_every", std::int64_t, checkpoint_every),
      F_UINT("train", "seed", train_seed),
      Field{"train", "adversarial_mode",
            [](const RunConfig& c) {
              return c.adversarial_mode == AdversarialMode::NonSaturating ? "non_saturating"
                                                                          : "literal";
            },
            [](RunConfig& c, const std::string& v) {
              if (v == "non_saturating")
                c.adversarial_mode = AdversarialMode::NonSaturating;
              else if (v == "literal")
                c.adversarial_mode = AdversarialMode::Literal;
              else
                throw ConfigError("adversarial_mode must be 'non_saturating' or 'literal'");
            }},
  };
  return f;
}

#undef F_DOUBLE
#undef F_INT
#undef F_UINT
#undef F_BOOL

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string dump_config(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get(config) << '\n';
  }
  return out.str();
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool matched = false;
    for (const auto& f : fields())
      if (f.section == section && f.key == key) {
        try {
          f.set(config, value);
        } catch (const ConfigError& e) {
          throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
        matched = true;
        break;
      }
    if (!matched)
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key [" + section +
                        "] " + key);
  }
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string text = dump_config(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cfea
