#include "cfea/backbone.hpp"

#include <vector>

#include "cfea/error.hpp"

namespace cfea {

void BackboneConfig::validate() const {
  if (depth < 2) throw ConfigError("BackboneConfig: depth must be >= 2");
  if (base_channels < 4) throw ConfigError("BackboneConfig: base_channels must be >= 4");
  if (num_classes != kNumClasses) throw ConfigError("BackboneConfig: num_classes is fixed at 3");
  if (input_size < (1 << depth) || input_size % (1 << depth) != 0)
    throw ConfigError("BackboneConfig: input_size must be divisible by 2^depth");
}

namespace {

struct ConvSpec {
  std::string name;
  int cin = 0;
  int cout = 0;
  int k = 3;
};

std::vector<ConvSpec> layer_specs(const BackboneConfig& cfg) {
  std::vector<ConvSpec> specs;
  const int base = cfg.base_channels;
  int cin = 3;
  for (int i = 0; i < cfg.depth; ++i) {
    const int ch = base << i;
    specs.push_back({"enc" + std::to_string(i) + ".conv1", cin, ch, 3});
    specs.push_back({"enc" + std::to_string(i) + ".conv2", ch, ch, 3});
    cin = ch;
  }
  const int cb = base << cfg.depth;
  specs.push_back({"bottleneck.conv1", cin, cb, 3});
  specs.push_back({"bottleneck.conv2", cb, cb, 3});
  for (int i = cfg.depth - 1; i >= 0; --i) {
    const int ch = base << i;
    const int below = base << (i + 1);
    specs.push_back({"dec" + std::to_string(i) + ".up", below, ch, 3});
    specs.push_back({"dec" + std::to_string(i) + ".conv1", 2 * ch, ch, 3});
    specs.push_back({"dec" + std::to_string(i) + ".conv2", ch, ch, 3});
  }
  specs.push_back({"head", base, cfg.num_classes, 1});
  return specs;
}

}  // namespace

ParameterSet init_backbone(const BackboneConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ParameterSet params;
  for (const auto& s : layer_specs(config)) {
    const int fan_in = s.cin * s.k * s.k;
    params.add(s.name + ".w", he_normal({s.cout, s.cin, s.k, s.k}, fan_in, rng));
    params.add(s.name + ".b", Tensor::zeros({s.cout}));
  }
  params.freeze();
  return params;
}

std::int64_t backbone_parameter_count(const BackboneConfig& config) {
  std::int64_t n = 0;
  for (const auto& s : layer_specs(config))
    n += static_cast<std::int64_t>(s.cout) * s.cin * s.k * s.k + s.cout;
  return n;
}

namespace {

Var conv_block(const VarMap& p, const std::string& name, const Var& x, int pad) {
  return relu(conv2d(x, p.at(name + ".w"), p.at(name + ".b"), 1, pad));
}

}  // namespace

BackboneOutputs backbone_forward_graph(const VarMap& params, const Var& input,
                                       const BackboneConfig& config) {
  config.validate();
  const Tensor& x = input->value;
  if (x.ndim() != 4 || x.dim(1) != 3 || x.dim(2) != config.input_size ||
      x.dim(3) != config.input_size)
    throw InputError("backbone forward: input must be (N, 3, S, S) with S = config.input_size");

  std::vector<Var> skips;
  Var cur = input;
  for (int i = 0; i < config.depth; ++i) {
    const std::string name = "enc" + std::to_string(i);
    cur = conv_block(params, name + ".conv1", cur, 1);
    cur = conv_block(params, name + ".conv2", cur, 1);
    skips.push_back(cur);
    cur = maxpool2x2(cur);
  }
  cur = conv_block(params, "bottleneck.conv1", cur, 1);
  cur = conv_block(params, "bottleneck.conv2", cur, 1);
  Var encoder_feature = cur;

  for (int i = config.depth - 1; i >= 0; --i) {
    const std::string name = "dec" + std::to_string(i);
    cur = conv_block(params, name + ".up", upsample2x(cur), 1);
    cur = concat_channels(skips[static_cast<std::size_t>(i)], cur);
    cur = conv_block(params, name + ".conv1", cur, 1);
    cur = conv_block(params, name + ".conv2", cur, 1);
  }
  Var logits = conv2d(cur, params.at("head.w"), params.at("head.b"), 1, 0);
  return {encoder_feature, softmax_channels(logits)};
}

std::pair<EncoderFeature, SoftPrediction> forward(const ParameterSet& params,
                                                  const ImageTensor& image,
                                                  const BackboneConfig& config) {
  const Tensor& img = image.tensor();
  Tensor batched({1, 3, img.dim(1), img.dim(2)},
                 std::vector<double>(img.data(), img.data() + img.size()));
  VarMap leaves = make_var_map(params, false);
  BackboneOutputs out = backbone_forward_graph(leaves, make_constant(std::move(batched)), config);
  const Tensor& f = out.encoder_feature->value;
  const Tensor& p = out.prediction->value;
  Tensor feature({f.dim(1), f.dim(2), f.dim(3)},
                 std::vector<double>(f.data(), f.data() + f.size()));
  Tensor pred({p.dim(1), p.dim(2), p.dim(3)},
              std::vector<double>(p.data(), p.data() + p.size()));
  return {EncoderFeature(std::move(feature)), SoftPrediction(std::move(pred))};
}

}  // namespace cfea
