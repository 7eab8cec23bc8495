#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cfea/checkpoint.hpp"
#include "cfea/error.hpp"

using namespace cfea;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.backbone.input_size = 16;
  cfg.backbone.depth = 2;
  cfg.backbone.base_channels = 4;
  cfg.disc_width_enc = 4;
  cfg.disc_width_dec = 4;
  return cfg;
}

fs::path temp_file(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "cfea_ckpt_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("checkpoint: save then load restores state field for field") {
  RunConfig cfg = tiny_config();
  TrainState state = init_train_state(cfg);
  state.iteration = 17;
  state.rng.next_u64();  // advance so the state is nontrivial
  const std::string path = temp_file("roundtrip.ckpt").string();
  save_checkpoint(state, cfg, path);

  LoadedCheckpoint loaded = load_checkpoint(path);
  CHECK(loaded.state.student.values_equal(state.student));
  CHECK(loaded.state.teacher.values_equal(state.teacher));
  CHECK(loaded.state.disc_enc.values_equal(state.disc_enc));
  CHECK(loaded.state.disc_dec.values_equal(state.disc_dec));
  CHECK(loaded.state.opt_student.m().values_equal(state.opt_student.m()));
  CHECK(loaded.state.opt_student.v().values_equal(state.opt_student.v()));
  CHECK(loaded.state.opt_student.steps() == state.opt_student.steps());
  CHECK(loaded.state.iteration == 17);
  CHECK(loaded.state.rng.serialize() == state.rng.serialize());
  CHECK(loaded.config_hash == config_hash(cfg));
  CHECK(dump_config(loaded.config) == dump_config(cfg));

  // Same RNG continuation after restore.
  Rng a = state.rng;
  CHECK(loaded.state.rng.next_u64() == a.next_u64());
}

TEST_CASE("checkpoint: distinct error kinds") {
  RunConfig cfg = tiny_config();
  TrainState state = init_train_state(cfg);
  const std::string path = temp_file("errors.ckpt").string();
  save_checkpoint(state, cfg, path);

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint(path + ".nope"), CheckpointNotFoundError);
  }
  SUBCASE("truncated file fails the size/checksum check, never half-loads") {
    std::string bytes;
    {
      std::ifstream in(path, std::ios::binary);
      bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }
    const std::string cut = path + ".cut";
    std::ofstream out(cut, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS_AS(load_checkpoint(cut), CheckpointCorruptError);
  }
  SUBCASE("flipped payload byte fails the CRC") {
    std::string bytes;
    {
      std::ifstream in(path, std::ios::binary);
      bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }
    bytes[bytes.size() / 2] ^= 0x40;
    const std::string bad = path + ".bad";
    std::ofstream out(bad, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS(load_checkpoint(bad), CheckpointCorruptError);
  }
  SUBCASE("version mismatch is its own error") {
    std::string bytes;
    {
      std::ifstream in(path, std::ios::binary);
      bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }
    bytes[8] = 99;  // version field follows the 8-byte magic
    const std::string other = path + ".v99";
    std::ofstream out(other, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS(load_checkpoint(other), CheckpointVersionError);
  }
}

TEST_CASE("checkpoint writes are atomic: no temp file left behind") {
  RunConfig cfg = tiny_config();
  TrainState state = init_train_state(cfg);
  const std::string path = temp_file("atomic.ckpt").string();
  save_checkpoint(state, cfg, path);
  CHECK(fs::exists(path));
  CHECK_FALSE(fs::exists(path + ".tmp"));
}

TEST_CASE("inference export: float32 round trip within float precision") {
  RunConfig cfg = tiny_config();
  TrainState state = init_train_state(cfg);
  const std::string path = temp_file("teacher.f32").string();
  save_inference_params(state.teacher, path);
  ParameterSet back = load_inference_params(path);
  CHECK(back.same_structure(state.teacher));
  for (const auto& name : back.names()) {
    const Tensor& a = back.at(name);
    const Tensor& b = state.teacher.at(name);
    for (std::int64_t i = 0; i < a.size(); ++i)
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
  }
}

TEST_CASE("parameter round trip through the checkpoint codec is bit-exact") {
  // The spec's ParameterSet round-trip invariant, via the real container.
  RunConfig cfg = tiny_config();
  TrainState state = init_train_state(cfg);
  // Scribble irrational values to make bit-exactness meaningful.
  for (const auto& name : state.student.names()) {
    Tensor& t = state.student.at(name);
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = std::sqrt(2.0) * (t[i] + 0.1) / 3.0;
  }
  const std::string path = temp_file("bits.ckpt").string();
  save_checkpoint(state, cfg, path);
  LoadedCheckpoint loaded = load_checkpoint(path);
  for (const auto& name : state.student.names())
    CHECK(loaded.state.student.at(name) == state.student.at(name));
}
