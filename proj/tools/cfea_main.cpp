#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "cfea/checkpoint.hpp"
#include "cfea/config.hpp"
#include "cfea/data.hpp"
#include "cfea/error.hpp"
#include "cfea/eval.hpp"
#include "cfea/report.hpp"
#include "cfea/synth.hpp"
#include "cfea/trainer.hpp"

namespace fs = std::filesystem;
using namespace cfea;

namespace {

RunConfig config_from(const std::string& config_path) {
  return config_path.empty() ? RunConfig{} : load_config_file(config_path);
}

int cmd_synth(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed) {
  RunConfig config = config_from(config_path);
  if (seed) config.synth.seed = *seed;
  config.synth.validate();
  SynthOutput data = synth_generate(config.synth);
  write_synth_dataset(data, out_dir);
  std::printf("synthetic dataset written to %s\n", out_dir.c_str());
  std::printf("  source:      %zu samples\n", data.source.samples.size());
  std::printf("  target:      %zu samples\n", data.target.samples.size());
  std::printf("  target_test: %zu samples\n", data.target_test.samples.size());
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              std::string source_manifest, std::string target_manifest, const std::string& out_dir,
              const std::string& mode, const std::string& resume, bool strict,
              std::optional<std::uint64_t> seed) {
  RunConfig config = config_from(config_path);
  if (seed) config.train_seed = *seed;
  if (mode == "source-only") {
    config.weights.lambda_adv_enc = 0.0;
    config.weights.lambda_adv_dec = 0.0;
    config.weights.lambda_mse_enc = 0.0;
    config.weights.lambda_mse_dec = 0.0;
  } else if (mode != "cfea") {
    std::fprintf(stderr, "error: --mode must be 'cfea' or 'source-only'\n");
    return 1;
  }
  config.validate();

  if (!data_dir.empty()) {
    if (source_manifest.empty())
      source_manifest = (fs::path(data_dir) / "source" / "manifest.jsonl").string();
    if (target_manifest.empty())
      target_manifest = (fs::path(data_dir) / "target" / "manifest.jsonl").string();
  }
  if (source_manifest.empty()) {
    std::fprintf(stderr, "error: no source data (use --data or --source-manifest)\n");
    return 1;
  }

  LoadOptions src_opts;
  src_opts.crop_size = config.source_crop_size;
  src_opts.out_size = config.backbone.input_size;
  src_opts.with_masks = true;
  src_opts.expected_domain = "source";
  Dataset source = load_dataset(source_manifest, src_opts);

  Dataset target;
  target.domain = "target";
  if (mode == "cfea") {
    if (target_manifest.empty()) {
      std::fprintf(stderr, "error: cfea mode needs target data (use --data or --target-manifest)\n");
      return 1;
    }
    LoadOptions tgt_opts;
    tgt_opts.crop_size = config.target_crop_size;
    tgt_opts.out_size = config.backbone.input_size;
    tgt_opts.with_masks = false;  // target labels are never read
    tgt_opts.expected_domain = "target";
    target = load_dataset(target_manifest, tgt_opts);
  }

  TrainResult result = train(config, source, target, out_dir, resume, strict);
  std::printf("trained %lld iterations; final seg loss %.6f, total %.6f\n",
              static_cast<long long>(result.iterations_run), result.last.seg, result.last.total);
  std::printf("checkpoint: %s\nmetrics:    %s\n", result.final_checkpoint.c_str(),
              result.metrics_log.c_str());
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& manifest,
             const std::string& out_path, bool strict, const std::string& config_path) {
  LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
  RunConfig config = loaded.config;
  if (!config_path.empty()) {
    config = load_config_file(config_path);
    if (config_hash(config) != loaded.config_hash) {
      if (strict) throw ConfigError("eval: config hash mismatch with checkpoint (strict mode)");
      std::fprintf(stderr, "warning: eval config differs from checkpoint config\n");
    }
  }

  LoadOptions opts;
  opts.crop_size = config.target_crop_size;
  opts.out_size = config.backbone.input_size;
  opts.with_masks = true;  // evaluation needs labels
  Dataset test_set = load_dataset(manifest, opts);

  // Inference goes through the teacher: one backbone forward per image.
  EvalReport report = evaluate(loaded.state.teacher, config.backbone, test_set);

  std::ofstream rec(out_path);
  if (!rec) throw IoError("cannot write eval record: " + out_path);
  rec << eval_report_json(report);
  rec.close();
  std::ofstream table(out_path + ".txt");
  table << eval_report_table(report);
  table.close();

  std::printf("%s", eval_report_table(report).c_str());
  return 0;
}

int cmd_report(const std::string& a_path, const std::string& b_path, const std::string& out_path,
               const std::string& label_a, const std::string& label_b) {
  auto read_record = [](const std::string& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open eval record: " + p);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return eval_report_from_json(text);
  };
  EvalReport a = read_record(a_path);
  EvalReport b = read_record(b_path);
  const std::string table = comparison_table(a, b, label_a, label_b);
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write report: " + out_path);
  out << table;
  out.close();
  write_comparison_chart(out_path + ".png", a, b, label_a, label_b);
  std::printf("%s", table.c_str());
  std::printf("chart: %s.png\n", out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CFEA: collaborative feature ensembling adaptation for optic disc/cup segmentation"};
  app.require_subcommand(0, 1);

  bool print_config = false;
  std::string config_path;
  app.add_flag("--print-config", print_config, "print the effective config and exit");
  app.add_option("--config", config_path, "config file (also accepted by subcommands)");

  std::string out_dir, mode = "cfea", resume, data_dir;
  std::string source_manifest, target_manifest, checkpoint_path, manifest;
  std::string a_path, b_path, label_a = "A", label_b = "B";
  bool strict = false;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--config", config_path, "config file");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate the synthetic domain-shift benchmark");
  synth->add_option("--out", out_dir, "output directory")->required();
  add_common(synth);

  CLI::App* trainc = app.add_subcommand("train", "train a model (cfea or source-only)");
  trainc->add_option("--out", out_dir, "output directory")->required();
  trainc->add_option("--data", data_dir, "synth dataset root (source/, target/)");
  trainc->add_option("--source-manifest", source_manifest, "source manifest (JSONL)");
  trainc->add_option("--target-manifest", target_manifest, "target manifest (JSONL)");
  trainc->add_option("--mode", mode, "cfea | source-only")->capture_default_str();
  trainc->add_option("--resume", resume, "checkpoint to resume from");
  trainc->add_flag("--strict", strict, "refuse config mismatches on resume");
  add_common(trainc);

  CLI::App* evalc = app.add_subcommand("eval", "evaluate a checkpoint on a labeled manifest");
  evalc->add_option("--checkpoint", checkpoint_path, "trained checkpoint")->required();
  evalc->add_option("--manifest", manifest, "labeled test manifest")->required();
  evalc->add_option("--out", out_dir, "output record path (JSON; table at <out>.txt)")->required();
  evalc->add_flag("--strict", strict, "refuse config mismatches");
  evalc->add_option("--config", config_path, "override config (defaults to checkpoint's)");

  CLI::App* reportc = app.add_subcommand("report", "compare two eval records");
  reportc->add_option("--a", a_path, "first record (e.g. source-only)")->required();
  reportc->add_option("--b", b_path, "second record (e.g. cfea)")->required();
  reportc->add_option("--out", out_dir, "output table path (chart at <out>.png)")->required();
  reportc->add_option("--label-a", label_a, "column label for --a")->capture_default_str();
  reportc->add_option("--label-b", label_b, "column label for --b")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (print_config) {
      std::cout << dump_config(config_from(config_path));
      return 0;
    }
    if (synth->parsed()) return cmd_synth(config_path, out_dir, seed);
    if (trainc->parsed())
      return cmd_train(config_path, data_dir, source_manifest, target_manifest, out_dir, mode,
                       resume, strict, seed);
    if (evalc->parsed()) return cmd_eval(checkpoint_path, manifest, out_dir, strict, config_path);
    if (reportc->parsed()) return cmd_report(a_path, b_path, out_dir, label_a, label_b);
    std::cout << app.help();
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
