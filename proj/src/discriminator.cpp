#include "cfea/discriminator.hpp"

#include "cfea/error.hpp"
#include "cfea/losses.hpp"

namespace cfea {

namespace {
constexpr double kLeakySlope = 0.2;
constexpr int kStages = 3;
}  // namespace

void DiscriminatorConfig::validate() const {
  if (input_channels < 1) throw ConfigError("DiscriminatorConfig: input_channels must be >= 1");
  if (width < 2) throw ConfigError("DiscriminatorConfig: width must be >= 2");
}

ParameterSet init_discriminator(const DiscriminatorConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ParameterSet params;
  int cin = config.input_channels;
  for (int i = 0; i < kStages; ++i) {
    const int cout = config.width << i;
    params.add("d" + std::to_string(i) + ".w", he_normal({cout, cin, 3, 3}, cin * 9, rng));
    params.add("d" + std::to_string(i) + ".b", Tensor::zeros({cout}));
    cin = cout;
  }
  params.add("head.w", he_normal({1, cin, 3, 3}, cin * 9, rng));
  params.add("head.b", Tensor::zeros({1}));
  params.freeze();
  return params;
}

std::int64_t discriminator_parameter_count(const DiscriminatorConfig& config) {
  std::int64_t n = 0;
  int cin = config.input_channels;
  for (int i = 0; i < kStages; ++i) {
    const int cout = config.width << i;
    n += static_cast<std::int64_t>(cout) * cin * 9 + cout;
    cin = cout;
  }
  return n + static_cast<std::int64_t>(cin) * 9 + 1;
}

Var discriminator_forward_graph(const VarMap& params, const Var& input,
                                const DiscriminatorConfig& config) {
  config.validate();
  const Tensor& x = input->value;
  if (x.ndim() != 4) throw InputError("discriminator forward: expects (N, C, H, W)");
  if (x.dim(1) != config.input_channels)
    throw InputError("discriminator forward: input channel count does not match config");
  if (x.dim(2) < 8 || x.dim(3) < 8)
    throw InputError("discriminator forward: spatial size must be >= 8");
  Var cur = input;
  for (int i = 0; i < kStages; ++i) {
    const std::string name = "d" + std::to_string(i);
    cur = leaky_relu(conv2d(cur, params.at(name + ".w"), params.at(name + ".b"), 2, 1),
                     kLeakySlope);
  }
  Var logits = conv2d(cur, params.at("head.w"), params.at("head.b"), 1, 1);
  if (config.output_mode == DiscriminatorOutput::Scalar) logits = spatial_mean(logits);
  return clamp(sigmoid(logits), kScoreClamp, 1.0 - kScoreClamp);
}

Tensor d_forward(const ParameterSet& params, const Tensor& feature_chw,
                 const DiscriminatorConfig& config) {
  if (feature_chw.ndim() != 3) throw InputError("d_forward: expects (C, H, W)");
  Tensor batched({1, feature_chw.dim(0), feature_chw.dim(1), feature_chw.dim(2)},
                 std::vector<double>(feature_chw.data(), feature_chw.data() + feature_chw.size()));
  VarMap leaves = make_var_map(params, false);
  Var scores = discriminator_forward_graph(leaves, make_constant(std::move(batched)), config);
  const Tensor& s = scores->value;
  return Tensor({s.dim(1), s.dim(2), s.dim(3)},
                std::vector<double>(s.data(), s.data() + s.size()));
}

}  // namespace cfea
