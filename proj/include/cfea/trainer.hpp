#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfea/adam.hpp"
#include "cfea/augment.hpp"
#include "cfea/config.hpp"
#include "cfea/data.hpp"
#include "cfea/losses.hpp"
#include "cfea/params.hpp"
#include "cfea/rng.hpp"

namespace cfea {

// Everything one CFEA run mutates. The student set is shared by SN and TSN
// (two forward passes, one weight set); the teacher is updated only by the
// moving average and never sits in any optimizer state.
struct TrainState {
  ParameterSet student;
  ParameterSet teacher;
  ParameterSet disc_enc;
  ParameterSet disc_dec;
  AdamState opt_student;
  AdamState opt_disc_enc;
  AdamState opt_disc_dec;
  std::int64_t iteration = 0;
  Rng rng;
};

TrainState init_train_state(const RunConfig& config);

// Per-iteration randomness, drawn from the state RNG in one fixed order.
struct StepPlan {
  SpatialTransform transform;
  std::vector<std::uint64_t> student_aug_seeds;
  std::vector<std::uint64_t> teacher_aug_seeds;
};

StepPlan draw_step_plan(TrainState& state, int target_batch_size);

// Materialized network inputs for the target stream: the student sees
// pixel-augmented then spatially transformed images, the teacher sees
// differently pixel-augmented, untransformed ones.
struct TargetInputs {
  Tensor student;  // (B, 3, S, S)
  Tensor teacher;  // (B, 3, S, S)
};
TargetInputs build_target_inputs(const Batch& batch, const StepPlan& plan,
                                 const RunConfig& config);

// Sub-steps of one iteration, exposed so tests can snapshot parameters
// between them. Only run_segmentation_step touches the student, only
// run_discriminator_step touches the discriminators (on detached,
// post-update features), and only run_ema_step touches the teacher.
void run_segmentation_step(TrainState& state, const Batch& batch, const StepPlan& plan,
                           const RunConfig& config, LossReport& report);
void run_discriminator_step(TrainState& state, const Batch& batch, const StepPlan& plan,
                            const RunConfig& config, LossReport& report);
void run_ema_step(TrainState& state, const RunConfig& config);

// Decay in effect at an iteration (supports the linear warm-up ramp).
double effective_ema_decay(const RunConfig& config, std::int64_t iteration);

// One full iteration: plan, segmentation step, discriminator step, EMA.
// The reported total is the Eq.-10 style combination of the components.
LossReport train_step(TrainState& state, const Batch& batch, const RunConfig& config);

inline constexpr const char* kMetricsHeader =
    "iteration,seg,adv_enc,adv_dec,disc_enc,disc_dec,mse_enc,mse_dec,total";

struct TrainResult {
  std::string final_checkpoint;
  std::string metrics_log;
  LossReport last;
  std::int64_t iterations_run = 0;
};

// Full run with per-iteration CSV logging and periodic checkpoints.
// An empty target dataset gives the supervised source-only path. Resume
// restores bit-exact state (parameters, optimizer moments, RNG) from a
// checkpoint and truncates the metrics log back to that iteration.
TrainResult train(const RunConfig& config, const Dataset& source, const Dataset& target,
                  const std::string& out_dir, const std::string& resume_path = "",
                  bool strict = false);

}  // namespace cfea
