#include "cfea/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cfea/backbone.hpp"
#include "cfea/checkpoint.hpp"
#include "cfea/discriminator.hpp"
#include "cfea/ema.hpp"
#include "cfea/error.hpp"

namespace fs = std::filesystem;

namespace cfea {

TrainState init_train_state(const RunConfig& config) {
  config.validate();
  TrainState state;
  state.student = init_backbone(config.backbone, hash_combine(config.train_seed, 0xba5e));
  state.teacher = init_teacher(state.student);
  state.disc_enc = init_discriminator(config.disc_enc_config(), hash_combine(config.train_seed, 0xd15c0));
  state.disc_dec = init_discriminator(config.disc_dec_config(), hash_combine(config.train_seed, 0xd15c1));
  state.opt_student = AdamState(state.student);
  state.opt_disc_enc = AdamState(state.disc_enc);
  state.opt_disc_dec = AdamState(state.disc_dec);
  state.rng = Rng(hash_combine(config.train_seed, 0x57e9));
  return state;
}

StepPlan draw_step_plan(TrainState& state, int target_batch_size) {
  StepPlan plan;
  if (target_batch_size <= 0) return plan;
  plan.transform = sample_spatial_transform(state.rng.next_u64());
  plan.student_aug_seeds.resize(static_cast<std::size_t>(target_batch_size));
  plan.teacher_aug_seeds.resize(static_cast<std::size_t>(target_batch_size));
  for (int i = 0; i < target_batch_size; ++i) plan.student_aug_seeds[static_cast<std::size_t>(i)] = state.rng.next_u64();
  for (int i = 0; i < target_batch_size; ++i) plan.teacher_aug_seeds[static_cast<std::size_t>(i)] = state.rng.next_u64();
  return plan;
}

namespace {

Tensor slice_sample(const Tensor& batch, int n) {
  const int c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
  const std::int64_t stride = static_cast<std::int64_t>(c) * h * w;
  return Tensor({c, h, w}, std::vector<double>(batch.data() + n * stride,
                                               batch.data() + (n + 1) * stride));
}

void put_sample(Tensor& batch, int n, const Tensor& chw) {
  const std::int64_t stride = chw.size();
  std::copy_n(chw.data(), stride, batch.data() + n * stride);
}

// Optional per-channel standardization applied right before the network.
Tensor network_input(const Tensor& batch, const RunConfig& config) {
  if (!config.standardize) return batch;
  Tensor out = batch;
  const int n = out.dim(0), c = out.dim(1);
  const std::int64_t plane = static_cast<std::int64_t>(out.dim(2)) * out.dim(3);
  for (int ni = 0; ni < n; ++ni)
    for (int ci = 0; ci < c; ++ci) {
      double* p = out.data() + (static_cast<std::int64_t>(ni) * c + ci) * plane;
      double mean = 0;
      for (std::int64_t i = 0; i < plane; ++i) mean += p[i];
      mean /= static_cast<double>(plane);
      double var = 0;
      for (std::int64_t i = 0; i < plane; ++i) var += (p[i] - mean) * (p[i] - mean);
      var /= static_cast<double>(plane);
      const double inv = 1.0 / std::sqrt(var + 1e-8);
      for (std::int64_t i = 0; i < plane; ++i) p[i] = (p[i] - mean) * inv;
    }
  return out;
}

}  // namespace

TargetInputs build_target_inputs(const Batch& batch, const StepPlan& plan,
                                 const RunConfig& config) {
  const int b = batch.target_images.dim(0);
  TargetInputs inputs;
  inputs.student = Tensor(batch.target_images.shape());
  inputs.teacher = Tensor(batch.target_images.shape());
  for (int i = 0; i < b; ++i) {
    Tensor raw = slice_sample(batch.target_images, i);
    Tensor aug_student =
        pixel_augment(raw, config.augment, plan.student_aug_seeds[static_cast<std::size_t>(i)]);
    put_sample(inputs.student, i, apply_transform(plan.transform, aug_student));
    put_sample(inputs.teacher, i,
               pixel_augment(raw, config.augment, plan.teacher_aug_seeds[static_cast<std::size_t>(i)]));
  }
  return inputs;
}

void run_segmentation_step(TrainState& state, const Batch& batch, const StepPlan& plan,
                           const RunConfig& config, LossReport& report) {
  const bool have_target = !batch.target_images.empty();

  // Teacher forward (TTN) on the teacher-augmented, untransformed target
  // stream; its outputs are treated as constants and transformed by the
  // shared spatial permutation before entering the consistency terms.
  Tensor teacher_enc, teacher_dec;
  TargetInputs target_inputs;
  if (have_target) {
    target_inputs = build_target_inputs(batch, plan, config);
    VarMap teacher_leaves = make_var_map(state.teacher, false);
    BackboneOutputs tt = backbone_forward_graph(
        teacher_leaves, make_constant(network_input(target_inputs.teacher, config)),
        config.backbone);
    const SpatialTransform enc_t =
        plan.transform.scaled_for_grid(1 << config.backbone.depth, /*keep_translation=*/false);
    const int b = batch.target_images.dim(0);
    teacher_enc = Tensor(tt.encoder_feature->value.shape());
    teacher_dec = Tensor(tt.prediction->value.shape());
    for (int i = 0; i < b; ++i) {
      put_sample(teacher_enc, i, apply_transform(enc_t, slice_sample(tt.encoder_feature->value, i)));
      put_sample(teacher_dec, i, apply_transform(plan.transform, slice_sample(tt.prediction->value, i)));
    }
  }

  // Student graph: SN pass on source plus, in adaptation runs, the TSN pass
  // on the transformed target stream. One leaf set, gradients accumulate
  // across both passes.
  VarMap student_leaves = make_var_map(state.student, true);
  BackboneOutputs sn = backbone_forward_graph(
      student_leaves, make_constant(network_input(batch.source_images, config)), config.backbone);
  Var objective = dice_loss_graph(sn.prediction, batch.source_one_hot, kDiceSmooth);
  report.seg = objective->value[0];

  if (have_target) {
    // Frozen discriminators: gradients pass through them into the student
    // features but never accumulate on discriminator weights.
    VarMap de_frozen = make_var_map(state.disc_enc, false);
    VarMap dd_frozen = make_var_map(state.disc_dec, false);
    Var adv_enc = fool_loss_graph(
        discriminator_forward_graph(de_frozen, sn.encoder_feature, config.disc_enc_config()),
        config.adversarial_mode);
    Var adv_dec = fool_loss_graph(
        discriminator_forward_graph(dd_frozen, sn.prediction, config.disc_dec_config()),
        config.adversarial_mode);
    report.adv_enc = adv_enc->value[0];
    report.adv_dec = adv_dec->value[0];

    BackboneOutputs tsn = backbone_forward_graph(
        student_leaves, make_constant(network_input(target_inputs.student, config)),
        config.backbone);
    Var mse_enc = mse_loss(tsn.encoder_feature, make_constant(teacher_enc));
    Var mse_dec = mse_loss(tsn.prediction, make_constant(teacher_dec));
    report.mse_enc = mse_enc->value[0];
    report.mse_dec = mse_dec->value[0];

    objective = add(objective, scale(adv_enc, config.weights.lambda_adv_enc));
    objective = add(objective, scale(adv_dec, config.weights.lambda_adv_dec));
    objective = add(objective, scale(mse_enc, config.weights.lambda_mse_enc));
    objective = add(objective, scale(mse_dec, config.weights.lambda_mse_dec));
  }

  if (!std::isfinite(objective->value[0]))
    throw NumericError("segmentation step: non-finite objective");
  backward(objective);
  ParameterSet grads = collect_gradients(state.student, student_leaves);
  state.opt_student.step(state.student, grads, config.seg_opt_config());
}

void run_discriminator_step(TrainState& state, const Batch& batch, const StepPlan& plan,
                            const RunConfig& config, LossReport& report) {
  if (batch.target_images.empty()) return;  // nothing to classify against

  // Features come from the just-updated student and are detached: the
  // discriminator graphs contain no student leaves at all.
  TargetInputs target_inputs = build_target_inputs(batch, plan, config);
  VarMap student_frozen = make_var_map(state.student, false);
  BackboneOutputs sn = backbone_forward_graph(
      student_frozen, make_constant(network_input(batch.source_images, config)), config.backbone);
  BackboneOutputs tsn = backbone_forward_graph(
      student_frozen, make_constant(network_input(target_inputs.student, config)),
      config.backbone);

  {
    VarMap leaves = make_var_map(state.disc_enc, true);
    Var target_scores = discriminator_forward_graph(
        leaves, make_constant(tsn.encoder_feature->value), config.disc_enc_config());
    Var source_scores = discriminator_forward_graph(
        leaves, make_constant(sn.encoder_feature->value), config.disc_enc_config());
    Var loss = domain_classification_loss_graph(target_scores, source_scores);
    report.disc_enc = loss->value[0];
    backward(loss);
    ParameterSet grads = collect_gradients(state.disc_enc, leaves);
    state.opt_disc_enc.step(state.disc_enc, grads, config.disc_opt_config());
  }
  {
    VarMap leaves = make_var_map(state.disc_dec, true);
    Var target_scores = discriminator_forward_graph(leaves, make_constant(tsn.prediction->value),
                                                    config.disc_dec_config());
    Var source_scores = discriminator_forward_graph(leaves, make_constant(sn.prediction->value),
                                                    config.disc_dec_config());
    Var loss = domain_classification_loss_graph(target_scores, source_scores);
    report.disc_dec = loss->value[0];
    backward(loss);
    ParameterSet grads = collect_gradients(state.disc_dec, leaves);
    state.opt_disc_dec.step(state.disc_dec, grads, config.disc_opt_config());
  }
}

double effective_ema_decay(const RunConfig& config, std::int64_t iteration) {
  if (config.ema_ramp_iters <= 0) return config.weights.ema_decay;
  const double frac = std::min(1.0, static_cast<double>(iteration + 1) /
                                        static_cast<double>(config.ema_ramp_iters));
  return config.weights.ema_decay * frac;
}

void run_ema_step(TrainState& state, const RunConfig& config) {
  ema_update(state.teacher, state.student, effective_ema_decay(config, state.iteration));
}

LossReport train_step(TrainState& state, const Batch& batch, const RunConfig& config) {
  LossReport report;
  StepPlan plan = draw_step_plan(state, batch.target_images.empty() ? 0 : batch.target_images.dim(0));
  run_segmentation_step(state, batch, plan, config, report);
  run_discriminator_step(state, batch, plan, config, report);
  run_ema_step(state, config);
  state.iteration += 1;
  report.total = total_loss(report.seg, report.disc_enc, report.disc_dec, report.mse_enc,
                            report.mse_dec, config.weights);
  report.check_finite();
  return report;
}

namespace {

std::string checkpoint_name(std::int64_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%06lld.ckpt", static_cast<long long>(iteration));
  return buf;
}

// Rewrites the metrics log keeping only rows up to `iteration` so a resumed
// run reproduces the straight run byte for byte. A missing log starts fresh.
void truncate_log(const std::string& path, std::int64_t iteration) {
  std::vector<std::string> keep{kMetricsHeader};
  std::ifstream in(path);
  if (in) {
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const std::int64_t row = std::atoll(line.c_str());
      if (row <= iteration && !line.empty()) keep.push_back(line);
    }
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : keep) out << l << '\n';
}

}  // namespace

TrainResult train(const RunConfig& config, const Dataset& source, const Dataset& target,
                  const std::string& out_dir, const std::string& resume_path, bool strict) {
  config.validate();
  if (source.samples.empty()) throw InputError("train: source dataset is empty");
  fs::create_directories(out_dir);
  const std::string log_path = (fs::path(out_dir) / "metrics.csv").string();

  TrainState state;
  if (!resume_path.empty()) {
    LoadedCheckpoint loaded = load_checkpoint(resume_path);
    const std::uint64_t expect = config_hash(config);
    if (loaded.config_hash != expect) {
      if (strict)
        throw ConfigError("resume: checkpoint config hash mismatch (strict mode)");
      std::fprintf(stderr, "warning: checkpoint config hash differs from current config\n");
    }
    state = std::move(loaded.state);
    truncate_log(log_path, state.iteration);
  } else {
    state = init_train_state(config);
    std::ofstream log(log_path, std::ios::trunc);
    log << kMetricsHeader << '\n';
  }

  std::ofstream log(log_path, std::ios::app);
  if (!log) throw IoError("cannot open metrics log: " + log_path);
  log.precision(17);

  TrainResult result;
  while (state.iteration < config.total_iterations) {
    const std::int64_t it = state.iteration;
    Batch batch = make_batch(source, target, config.train_seed, it, config.batch_size);
    LossReport r = train_step(state, batch, config);
    log << it + 1 << ',' << r.seg << ',' << r.adv_enc << ',' << r.adv_dec << ',' << r.disc_enc
        << ',' << r.disc_dec << ',' << r.mse_enc << ',' << r.mse_dec << ',' << r.total << '\n';
    result.last = r;
    if ((it + 1) % config.checkpoint_every == 0 && it + 1 < config.total_iterations)
      save_checkpoint(state, config, (fs::path(out_dir) / checkpoint_name(it + 1)).string());
  }
  log.flush();

  result.final_checkpoint = (fs::path(out_dir) / "final.ckpt").string();
  save_checkpoint(state, config, result.final_checkpoint);
  result.metrics_log = log_path;
  result.iterations_run = state.iteration;
  return result;
}

}  // namespace cfea
