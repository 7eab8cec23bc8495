#include "cfea/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "cfea/data.hpp"
#include "cfea/error.hpp"
#include "cfea/png_io.hpp"
#include "cfea/rng.hpp"

namespace fs = std::filesystem;

namespace cfea {

void SynthConfig::validate() const {
  if (n_source < 1 || n_target < 0 || n_target_test < 0)
    throw ConfigError("SynthConfig: dataset counts must be positive (source >= 1)");
  if (image_size < 32) throw ConfigError("SynthConfig: image_size must be >= 32");
  if (!(disc_radius_lo > 0 && disc_radius_hi >= disc_radius_lo && disc_radius_hi < 0.5))
    throw ConfigError("SynthConfig: bad disc radius range");
  if (!(cup_ratio_lo > 0 && cup_ratio_hi >= cup_ratio_lo && cup_ratio_hi < 0.9))
    throw ConfigError("SynthConfig: bad cup ratio range");
  if (!(eccentricity >= 0 && eccentricity < 0.5)) throw ConfigError("SynthConfig: bad eccentricity");
}

namespace {

inline double clamp01(double v) { return std::min(std::max(v, 0.0), 1.0); }

inline double smoothstep(double e0, double e1, double x) {
  const double t = clamp01((x - e0) / (e1 - e0));
  return t * t * (3.0 - 2.0 * t);
}

// normalized squared ellipse coordinate: <1 inside
inline double ellipse_q(double r, double c, double cy, double cx, double ay, double ax) {
  const double dy = (r - cy) / ay;
  const double dx = (c - cx) / ax;
  return dy * dy + dx * dx;
}

// Rotates RGB around the gray axis; hue-preserving in luminance.
void hue_rotate(double& r, double& g, double& b, double degrees) {
  const double a = degrees * M_PI / 180.0;
  const double cosA = std::cos(a), sinA = std::sin(a);
  const double m[3][3] = {
      {cosA + (1.0 - cosA) / 3.0, (1.0 - cosA) / 3.0 - sinA / std::sqrt(3.0),
       (1.0 - cosA) / 3.0 + sinA / std::sqrt(3.0)},
      {(1.0 - cosA) / 3.0 + sinA / std::sqrt(3.0), cosA + (1.0 - cosA) / 3.0,
       (1.0 - cosA) / 3.0 - sinA / std::sqrt(3.0)},
      {(1.0 - cosA) / 3.0 - sinA / std::sqrt(3.0), (1.0 - cosA) / 3.0 + sinA / std::sqrt(3.0),
       cosA + (1.0 - cosA) / 3.0}};
  const double nr = m[0][0] * r + m[0][1] * g + m[0][2] * b;
  const double ng = m[1][0] * r + m[1][1] * g + m[1][2] * b;
  const double nb = m[2][0] * r + m[2][1] * g + m[2][2] * b;
  r = nr;
  g = ng;
  b = nb;
}

SynthSample render_sample(const SynthConfig& cfg, Rng& rng) {
  const int s = cfg.image_size;
  Tensor img({3, s, s});
  LabelMask mask(s, s);

  // Fundus-like palette with per-sample jitter.
  double bg[3] = {0.72 + rng.uniform(-0.08, 0.08), 0.42 + rng.uniform(-0.07, 0.07),
                  0.22 + rng.uniform(-0.05, 0.05)};
  double rim[3] = {0.93 + rng.uniform(-0.04, 0.04), 0.74 + rng.uniform(-0.05, 0.05),
                   0.50 + rng.uniform(-0.05, 0.05)};
  double cup[3] = {0.99, 0.90 + rng.uniform(-0.04, 0.04), 0.72 + rng.uniform(-0.05, 0.05)};

  // Disc geometry: semi-axes jittered around a base radius, center kept far
  // enough from the border that the disc stays whole.
  const double radius = s * rng.uniform(cfg.disc_radius_lo, cfg.disc_radius_hi);
  const double ay = radius * (1.0 + rng.uniform(-cfg.eccentricity, cfg.eccentricity));
  const double ax = radius * (1.0 + rng.uniform(-cfg.eccentricity, cfg.eccentricity));
  const double margin = std::max(ay, ax) + 3.0;
  const double cy = rng.uniform(margin, s - margin);
  const double cx = rng.uniform(margin, s - margin);

  // Cup strictly inside the disc: scaled semi-axes plus an offset bounded so
  // the cup boundary keeps >= 2 px clearance inside the disc boundary.
  const double ratio = rng.uniform(cfg.cup_ratio_lo, cfg.cup_ratio_hi);
  const double cay = ay * ratio, cax = ax * ratio;
  const double oy_max = std::max(0.0, (ay - cay) - 2.0);
  const double ox_max = std::max(0.0, (ax - cax) - 2.0);
  const double ccy = cy + rng.uniform(-oy_max, oy_max) * 0.5;
  const double ccx = cx + rng.uniform(-ox_max, ox_max) * 0.5;

  // Low-frequency background gradient.
  const double gdir = rng.uniform(0, 2 * M_PI);
  const double gamp = rng.uniform(0.02, 0.08);
  const double gy = std::sin(gdir), gx = std::cos(gdir);

  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c) {
      const double grad = gamp * ((r * gy + c * gx) / s - 0.5);
      const double qd = ellipse_q(r + 0.5, c + 0.5, cy, cx, ay, ax);
      const double qc = ellipse_q(r + 0.5, c + 0.5, ccy, ccx, cay, cax);
      // Soft photometric boundaries, hard mask from analytic membership.
      const double disc_alpha = 1.0 - smoothstep(0.92, 1.08, qd);
      const double cup_alpha = 1.0 - smoothstep(0.88, 1.12, qc);
      for (int ch = 0; ch < 3; ++ch) {
        double v = bg[ch] + grad;
        v = v * (1.0 - disc_alpha) + rim[ch] * disc_alpha;
        v = v * (1.0 - cup_alpha) + cup[ch] * cup_alpha;
        img.at3(ch, r, c) = v;
      }
      if (qc < 1.0)
        mask.set(r, c, kCup);
      else if (qd < 1.0)
        mask.set(r, c, kDiscRim);
    }

  // Vessel-like dark strokes: random walks that skirt the cup.
  const int n_vessels = static_cast<int>(rng.uniform_int(2, 4));
  for (int v = 0; v < n_vessels; ++v) {
    double py = rng.uniform(0, s), px = rng.uniform(0, s);
    double dir = rng.uniform(0, 2 * M_PI);
    const int steps = s * 2;
    for (int t = 0; t < steps; ++t) {
      dir += rng.uniform(-0.35, 0.35);
      py += std::sin(dir);
      px += std::cos(dir);
      if (py < 0 || py >= s || px < 0 || px >= s) break;
      const int ir = static_cast<int>(py), ic = static_cast<int>(px);
      for (int ch = 0; ch < 3; ++ch) {
        const double dark = ch == 0 ? 0.45 : 0.22;
        img.at3(ch, ir, ic) = img.at3(ch, ir, ic) * 0.45 + dark * 0.55;
      }
    }
  }

  // Sensor noise.
  for (std::int64_t i = 0; i < img.size(); ++i)
    img[i] = clamp01(img[i] + 0.015 * rng.normal());

  auto center = locate_center(mask);
  return {std::move(img), std::move(mask), center};
}

}  // namespace

Tensor apply_shift(const Tensor& image_chw, const ShiftProfile& shift, std::uint64_t seed) {
  Rng rng(seed);
  Tensor out = image_chw;
  const int h = out.dim(1), w = out.dim(2);
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  // Small per-image jitter keeps the target domain from being a single
  // deterministic remap of the source.
  const double jitter = rng.uniform(0.9, 1.1);
  const double delta = shift.brightness_delta * jitter;
  const double contrast = shift.contrast_factor;
  const double hue = shift.hue_rotation_deg * rng.uniform(0.9, 1.1);
  for (std::int64_t p = 0; p < plane; ++p) {
    double r = out[p], g = out[plane + p], b = out[2 * plane + p];
    hue_rotate(r, g, b, hue);
    r = (r - 0.5) * contrast + 0.5 + delta;
    g = (g - 0.5) * contrast + 0.5 + delta;
    b = (b - 0.5) * contrast + 0.5 + delta;
    out[p] = r;
    out[plane + p] = g;
    out[2 * plane + p] = b;
  }
  if (shift.noise_level > 0)
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] += shift.noise_level * rng.normal();
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = clamp01(out[i]);
  return out;
}

SynthOutput synth_generate(const SynthConfig& config) {
  config.validate();
  SynthOutput out;
  Rng src_rng(hash_combine(config.seed, 1));
  for (int i = 0; i < config.n_source; ++i) out.source.samples.push_back(render_sample(config, src_rng));
  Rng tgt_rng(hash_combine(config.seed, 2));
  for (int i = 0; i < config.n_target; ++i) {
    SynthSample smp = render_sample(config, tgt_rng);
    smp.image = apply_shift(smp.image, config.shift, hash_combine(config.seed, 1000 + i));
    out.target.samples.push_back(std::move(smp));
  }
  Rng test_rng(hash_combine(config.seed, 3));
  for (int i = 0; i < config.n_target_test; ++i) {
    SynthSample smp = render_sample(config, test_rng);
    smp.image = apply_shift(smp.image, config.shift, hash_combine(config.seed, 500000 + i));
    out.target_test.samples.push_back(std::move(smp));
  }
  return out;
}

namespace {

void write_split(const SynthDataset& ds, const std::string& root, const std::string& split,
                 const std::string& domain) {
  const fs::path dir = fs::path(root) / split;
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");
  std::vector<ManifestRecord> records;
  char name[32];
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    std::snprintf(name, sizeof name, "%04zu.png", i);
    const std::string img_path = (dir / "images" / name).string();
    const std::string mask_path = (dir / "masks" / name).string();
    write_image_png(img_path, ds.samples[i].image);
    write_mask_png(mask_path, ds.samples[i].mask);
    ManifestRecord rec;
    rec.image_path = img_path;
    rec.mask_path = mask_path;
    rec.domain = domain;
    rec.disc_center = ds.samples[i].disc_center;
    records.push_back(std::move(rec));
  }
  save_manifest((dir / "manifest.jsonl").string(), records);
}

}  // namespace

void write_synth_dataset(const SynthOutput& out, const std::string& root) {
  write_split(out.source, root, "source", "source");
  write_split(out.target, root, "target", "target");
  write_split(out.target_test, root, "target_test", "target");
}

}  // namespace cfea
