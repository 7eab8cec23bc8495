#include "cfea/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "cfea/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint codec assumes a little-endian host");

namespace fs = std::filesystem;

namespace cfea {

namespace {

constexpr std::uint64_t kMagic = 0x54504b4341454643ULL;          // "CFEACKPT"
constexpr std::uint64_t kInferenceMagic = 0x31464e4941454643ULL;  // "CFEAINF1"

std::uint32_t crc32(const std::string& data) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t c = 0xFFFFFFFFu;
  for (unsigned char ch : data) c = table[(c ^ ch) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

struct Writer {
  std::string buf;
  void raw(const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void tensor(const Tensor& t) {
    u32(static_cast<std::uint32_t>(t.ndim()));
    for (int d : t.shape()) i64(d);
    raw(t.data(), static_cast<std::size_t>(t.size()) * sizeof(double));
  }
  void params(const ParameterSet& p) {
    i64(p.iteration());
    u64(p.count());
    for (const auto& name : p.names()) {
      str(name);
      tensor(p.at(name));
    }
  }
};

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;
  explicit Reader(const std::string& b) : buf(b) {}
  void raw(void* p, std::size_t n) {
    if (pos + n > buf.size()) throw CheckpointCorruptError("checkpoint payload truncated");
    std::memcpy(p, buf.data() + pos, n);
    pos += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, 8);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    raw(&v, 8);
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    if (pos + n > buf.size()) throw CheckpointCorruptError("checkpoint string truncated");
    std::string s(buf.data() + pos, n);
    pos += n;
    return s;
  }
  Tensor tensor() {
    const std::uint32_t nd = u32();
    if (nd > 8) throw CheckpointCorruptError("checkpoint tensor rank out of range");
    std::vector<int> shape(nd);
    for (auto& d : shape) d = static_cast<int>(i64());
    const std::int64_t n = shape_size(shape);
    std::vector<double> data(static_cast<std::size_t>(n));
    raw(data.data(), static_cast<std::size_t>(n) * sizeof(double));
    return Tensor(std::move(shape), std::move(data));
  }
  ParameterSet params() {
    ParameterSet p;
    const std::int64_t it = i64();
    const std::uint64_t n = u64();
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string name = str();
      p.add(name, tensor());
    }
    p.freeze();
    p.set_iteration(it);
    return p;
  }
};

void atomic_write(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create file: " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw IoError("write failed: " + tmp);
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("rename failed for " + path + ": " + ec.message());
  }
}

std::string read_all(const std::string& path, const char* kind) {
  if (!fs::exists(path)) throw CheckpointNotFoundError(std::string(kind) + " not found: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + kind + ": " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void adam_to(Writer& w, const AdamState& s) {
  w.i64(s.steps());
  w.params(s.m());
  w.params(s.v());
}

AdamState adam_from(Reader& r) {
  AdamState s;
  const std::int64_t t = r.i64();
  ParameterSet m = r.params();
  ParameterSet v = r.params();
  s.restore(std::move(m), std::move(v), t);
  return s;
}

}  // namespace

void save_checkpoint(const TrainState& state, const RunConfig& config, const std::string& path) {
  Writer payload;
  payload.str(dump_config(config));
  payload.params(state.student);
  payload.params(state.teacher);
  payload.params(state.disc_enc);
  payload.params(state.disc_dec);
  adam_to(payload, state.opt_student);
  adam_to(payload, state.opt_disc_enc);
  adam_to(payload, state.opt_disc_dec);
  payload.str(state.rng.serialize());

  Writer file;
  file.u64(kMagic);
  file.u32(kCheckpointVersion);
  file.u64(config_hash(config));
  file.i64(state.iteration);
  file.u64(payload.buf.size());
  file.buf += payload.buf;
  file.u32(crc32(payload.buf));
  atomic_write(path, file.buf);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  const std::string bytes = read_all(path, "checkpoint");
  if (bytes.size() < 8 + 4 + 8 + 8 + 8 + 4) throw CheckpointCorruptError("checkpoint too short: " + path);
  Reader header(bytes);
  if (header.u64() != kMagic) throw CheckpointCorruptError("bad checkpoint magic: " + path);
  const std::uint32_t version = header.u32();
  if (version != kCheckpointVersion)
    throw CheckpointVersionError("unsupported checkpoint version " + std::to_string(version) +
                                 " (expected " + std::to_string(kCheckpointVersion) + ")");
  LoadedCheckpoint out;
  out.config_hash = header.u64();
  const std::int64_t iteration = header.i64();
  const std::uint64_t payload_size = header.u64();
  if (header.pos + payload_size + 4 != bytes.size())
    throw CheckpointCorruptError("checkpoint size mismatch (truncated or trailing bytes): " + path);
  const std::string payload = bytes.substr(header.pos, payload_size);
  Reader tail(bytes);
  tail.pos = header.pos + payload_size;
  if (crc32(payload) != tail.u32())
    throw CheckpointCorruptError("checkpoint checksum mismatch: " + path);

  Reader r(payload);
  out.config = parse_config(r.str());
  out.state.student = r.params();
  out.state.teacher = r.params();
  out.state.disc_enc = r.params();
  out.state.disc_dec = r.params();
  out.state.opt_student = adam_from(r);
  out.state.opt_disc_enc = adam_from(r);
  out.state.opt_disc_dec = adam_from(r);
  out.state.rng.deserialize(r.str());
  out.state.iteration = iteration;
  if (r.pos != payload.size()) throw CheckpointCorruptError("checkpoint has unread payload bytes");
  return out;
}

void save_inference_params(const ParameterSet& params, const std::string& path) {
  Writer payload;
  payload.i64(params.iteration());
  payload.u64(params.count());
  for (const auto& name : params.names()) {
    payload.str(name);
    const Tensor& t = params.at(name);
    payload.u32(static_cast<std::uint32_t>(t.ndim()));
    for (int d : t.shape()) payload.i64(d);
    for (std::int64_t i = 0; i < t.size(); ++i) {
      const float f = static_cast<float>(t[i]);
      payload.raw(&f, 4);
    }
  }
  Writer file;
  file.u64(kInferenceMagic);
  file.u32(kCheckpointVersion);
  file.u64(payload.buf.size());
  file.buf += payload.buf;
  file.u32(crc32(payload.buf));
  atomic_write(path, file.buf);
}

ParameterSet load_inference_params(const std::string& path) {
  const std::string bytes = read_all(path, "inference params");
  Reader header(bytes);
  if (header.u64() != kInferenceMagic)
    throw CheckpointCorruptError("bad inference-file magic: " + path);
  const std::uint32_t version = header.u32();
  if (version != kCheckpointVersion)
    throw CheckpointVersionError("unsupported inference-file version " + std::to_string(version));
  const std::uint64_t payload_size = header.u64();
  if (header.pos + payload_size + 4 != bytes.size())
    throw CheckpointCorruptError("inference file size mismatch: " + path);
  const std::string payload = bytes.substr(header.pos, payload_size);
  Reader tail(bytes);
  tail.pos = header.pos + payload_size;
  if (crc32(payload) != tail.u32())
    throw CheckpointCorruptError("inference file checksum mismatch: " + path);

  Reader r(payload);
  ParameterSet p;
  const std::int64_t it = r.i64();
  const std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = r.str();
    const std::uint32_t nd = r.u32();
    std::vector<int> shape(nd);
    for (auto& d : shape) d = static_cast<int>(r.i64());
    const std::int64_t count = shape_size(shape);
    std::vector<double> data(static_cast<std::size_t>(count));
    for (auto& v : data) {
      float f;
      r.raw(&f, 4);
      v = static_cast<double>(f);
    }
    p.add(name, Tensor(std::move(shape), std::move(data)));
  }
  p.freeze();
  p.set_iteration(it);
  return p;
}

}  // namespace cfea
