#include "cfea/data.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "cfea/error.hpp"
#include "cfea/png_io.hpp"
#include "cfea/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cfea {

std::vector<ManifestRecord> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<ManifestRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError("manifest " + path + " line " + std::to_string(lineno) + ": " + e.what());
    }
    ManifestRecord rec;
    rec.image_path = (base / j.at("image_path").get<std::string>()).string();
    if (j.contains("mask_path") && !j["mask_path"].is_null())
      rec.mask_path = (base / j["mask_path"].get<std::string>()).string();
    rec.domain = j.at("domain").get<std::string>();
    if (rec.domain != "source" && rec.domain != "target")
      throw IoError("manifest " + path + " line " + std::to_string(lineno) +
                    ": domain must be 'source' or 'target'");
    if (j.contains("disc_center") && !j["disc_center"].is_null()) {
      auto c = j["disc_center"];
      rec.disc_center = std::pair<int, int>(c.at(0).get<int>(), c.at(1).get<int>());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void save_manifest(const std::string& path, const std::vector<ManifestRecord>& records) {
  const fs::path base = fs::path(path).parent_path();
  std::ofstream out(path);
  if (!out) throw IoError("cannot create manifest: " + path);
  for (const auto& rec : records) {
    json j;
    j["image_path"] = fs::relative(rec.image_path, base).string();
    if (rec.mask_path) j["mask_path"] = fs::relative(*rec.mask_path, base).string();
    j["domain"] = rec.domain;
    if (rec.disc_center) j["disc_center"] = {rec.disc_center->first, rec.disc_center->second};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing manifest: " + path);
}

bool Dataset::labeled() const {
  if (samples.empty()) return false;
  for (const auto& s : samples)
    if (!s.mask) return false;
  return true;
}

std::pair<int, int> locate_center(const LabelMask& mask) {
  std::int64_t n = 0, rsum = 0, csum = 0;
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c)
      if (mask.at(r, c) == kDiscRim || mask.at(r, c) == kCup) {
        ++n;
        rsum += r;
        csum += c;
      }
  if (n == 0) throw InputError("locate_center: mask has no disc-region pixels");
  return {static_cast<int>(std::llround(static_cast<double>(rsum) / static_cast<double>(n))),
          static_cast<int>(std::llround(static_cast<double>(csum) / static_cast<double>(n)))};
}

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Edge-replicated crop of a crop x crop window centered at (cr, cc).
template <typename Get, typename Set>
void crop_window(int in_h, int in_w, int cr, int cc, int crop, Get get, Set set) {
  const int r0 = cr - crop / 2;
  const int c0 = cc - crop / 2;
  for (int r = 0; r < crop; ++r) {
    const int sr = clampi(r0 + r, 0, in_h - 1);
    for (int c = 0; c < crop; ++c) {
      const int sc = clampi(c0 + c, 0, in_w - 1);
      set(r, c, get(sr, sc));
    }
  }
}

Tensor resize_bilinear(const Tensor& chw, int out) {
  const int ch = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  Tensor dst({ch, out, out});
  const double sy = static_cast<double>(h) / out;
  const double sx = static_cast<double>(w) / out;
  for (int c = 0; c < ch; ++c)
    for (int r = 0; r < out; ++r) {
      const double fy = (r + 0.5) * sy - 0.5;
      const int y0 = clampi(static_cast<int>(std::floor(fy)), 0, h - 1);
      const int y1 = clampi(y0 + 1, 0, h - 1);
      const double wy = std::min(std::max(fy - y0, 0.0), 1.0);
      for (int col = 0; col < out; ++col) {
        const double fx = (col + 0.5) * sx - 0.5;
        const int x0 = clampi(static_cast<int>(std::floor(fx)), 0, w - 1);
        const int x1 = clampi(x0 + 1, 0, w - 1);
        const double wx = std::min(std::max(fx - x0, 0.0), 1.0);
        const double top = chw.at3(c, y0, x0) * (1 - wx) + chw.at3(c, y0, x1) * wx;
        const double bot = chw.at3(c, y1, x0) * (1 - wx) + chw.at3(c, y1, x1) * wx;
        dst.at3(c, r, col) = top * (1 - wy) + bot * wy;
      }
    }
  return dst;
}

LabelMask resize_nearest(const LabelMask& mask, int out) {
  const int h = mask.height(), w = mask.width();
  LabelMask dst(out, out);
  const double sy = static_cast<double>(h) / out;
  const double sx = static_cast<double>(w) / out;
  for (int r = 0; r < out; ++r) {
    const int sr = clampi(static_cast<int>(std::floor((r + 0.5) * sy)), 0, h - 1);
    for (int c = 0; c < out; ++c) {
      const int sc = clampi(static_cast<int>(std::floor((c + 0.5) * sx)), 0, w - 1);
      dst.set(r, c, mask.at(sr, sc));
    }
  }
  return dst;
}

}  // namespace

std::pair<ImageTensor, std::optional<LabelMask>> preprocess(const Tensor& image_chw,
                                                            const LabelMask* mask,
                                                            std::pair<int, int> center,
                                                            int crop_size, int out_size) {
  if (image_chw.ndim() != 3 || image_chw.dim(0) != 3)
    throw InputError("preprocess: image must be (3, H, W)");
  if (crop_size < 1 || out_size < 8) throw ConfigError("preprocess: bad crop/output size");
  const int h = image_chw.dim(1), w = image_chw.dim(2);
  const auto [cr, cc] = center;
  if (cr < 0 || cr >= h || cc < 0 || cc >= w)
    throw InputError("preprocess: center lies outside the image");
  if (mask && (mask->height() != h || mask->width() != w))
    throw InputError("preprocess: image and mask sizes differ");

  Tensor cropped({3, crop_size, crop_size});
  for (int c = 0; c < 3; ++c)
    crop_window(
        h, w, cr, cc, crop_size, [&](int r, int col) { return image_chw.at3(c, r, col); },
        [&](int r, int col, double v) { cropped.at3(c, r, col) = v; });
  Tensor resized = resize_bilinear(cropped, out_size);
  for (std::int64_t i = 0; i < resized.size(); ++i)
    resized[i] = std::min(std::max(resized[i], 0.0), 1.0);

  std::optional<LabelMask> out_mask;
  if (mask) {
    LabelMask cm(crop_size, crop_size);
    crop_window(
        h, w, cr, cc, crop_size, [&](int r, int col) { return mask->at(r, col); },
        [&](int r, int col, std::uint8_t v) { cm.set(r, col, v); });
    out_mask = resize_nearest(cm, out_size);
  }
  return {ImageTensor(std::move(resized)), std::move(out_mask)};
}

int effective_workers(int requested) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* cap = std::getenv("CFEA_NUM_WORKERS")) {
    const int c = std::atoi(cap);
    if (c > 0) n = std::min(n, c);
  }
  return std::max(1, n);
}

Dataset load_dataset(const std::string& manifest_path, const LoadOptions& options) {
  const auto records = load_manifest(manifest_path);
  if (records.empty()) throw IoError("manifest is empty: " + manifest_path);
  Dataset ds;
  ds.domain = options.expected_domain.empty() ? records.front().domain : options.expected_domain;
  for (const auto& rec : records) {
    if (!options.expected_domain.empty() && rec.domain != options.expected_domain)
      throw InputError("manifest " + manifest_path + ": record domain '" + rec.domain +
                       "' does not match expected '" + options.expected_domain + "'");
    if (options.with_masks && !rec.mask_path)
      throw InputError("manifest " + manifest_path + ": labeled load requires mask_path");
  }
  ds.samples.resize(records.size());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> warned_center{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= records.size()) return;
      try {
        const auto& rec = records[i];
        Tensor img = read_image_png(rec.image_path);
        std::optional<LabelMask> mask;
        if (options.with_masks) mask = read_mask_png(*rec.mask_path);
        std::pair<int, int> center;
        if (rec.disc_center) {
          center = *rec.disc_center;
        } else if (mask) {
          center = locate_center(*mask);
        } else {
          center = {img.dim(1) / 2, img.dim(2) / 2};
          if (!warned_center.exchange(true))
            std::fprintf(stderr,
                         "warning: no disc_center and no mask for %s; using image center\n",
                         rec.image_path.c_str());
        }
        auto [pimg, pmask] =
            preprocess(img, mask ? &*mask : nullptr, center, options.crop_size, options.out_size);
        ds.samples[i] = Sample{pimg.tensor(), std::move(pmask)};
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int workers = std::min<int>(effective_workers(options.num_workers),
                                    static_cast<int>(records.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return ds;
}

std::vector<int> batch_schedule(std::uint64_t seed, std::uint64_t domain_tag,
                                std::int64_t iteration, int batch_size, int dataset_size) {
  if (dataset_size <= 0) throw InputError("batch_schedule: empty dataset");
  if (batch_size <= 0) throw InputError("batch_schedule: batch_size must be positive");
  std::vector<int> out(static_cast<std::size_t>(batch_size));
  std::int64_t epoch = -1;
  std::vector<int> perm;
  for (int j = 0; j < batch_size; ++j) {
    const std::int64_t g = iteration * batch_size + j;
    const std::int64_t e = g / dataset_size;
    if (e != epoch) {
      epoch = e;
      perm.resize(static_cast<std::size_t>(dataset_size));
      for (int i = 0; i < dataset_size; ++i) perm[static_cast<std::size_t>(i)] = i;
      Rng rng(hash_combine(hash_combine(seed, domain_tag), static_cast<std::uint64_t>(e)));
      for (int i = dataset_size - 1; i > 0; --i)
        std::swap(perm[static_cast<std::size_t>(i)],
                  perm[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    }
    out[static_cast<std::size_t>(j)] = perm[static_cast<std::size_t>(g % dataset_size)];
  }
  return out;
}

namespace {

void fill_batch_images(Tensor& dst, const Dataset& ds, const std::vector<int>& idx, int size) {
  const std::int64_t stride = 3LL * size * size;
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const Tensor& img = ds.samples[static_cast<std::size_t>(idx[b])].image;
    if (img.dim(1) != size || img.dim(2) != size)
      throw InputError("make_batch: sample size differs from batch size contract");
    std::copy_n(img.data(), stride, dst.data() + static_cast<std::int64_t>(b) * stride);
  }
}

}  // namespace

Batch make_batch(const Dataset& source, const Dataset& target, std::uint64_t seed,
                 std::int64_t iteration, int batch_size) {
  if (source.samples.empty()) throw InputError("make_batch: source dataset is empty");
  const int size = source.samples.front().image.dim(1);
  static bool warned_replacement = false;
  if (batch_size > static_cast<int>(source.size()) && !warned_replacement) {
    warned_replacement = true;
    std::fprintf(stderr, "warning: batch_size exceeds dataset size; samples repeat within a batch\n");
  }

  Batch batch;
  const auto src_idx = batch_schedule(seed, /*domain_tag=*/0x5eed5011ce, iteration, batch_size,
                                      static_cast<int>(source.size()));
  batch.source_images = Tensor({batch_size, 3, size, size});
  batch.source_one_hot = Tensor({batch_size, 3, size, size});
  fill_batch_images(batch.source_images, source, src_idx, size);
  const std::int64_t stride = 3LL * size * size;
  for (std::size_t b = 0; b < src_idx.size(); ++b) {
    const auto& mask = source.samples[static_cast<std::size_t>(src_idx[b])].mask;
    if (!mask) throw InputError("make_batch: source sample is missing its mask");
    Tensor oh = one_hot(*mask);
    std::copy_n(oh.data(), stride, batch.source_one_hot.data() + static_cast<std::int64_t>(b) * stride);
  }

  if (!target.samples.empty()) {
    const auto tgt_idx = batch_schedule(seed, /*domain_tag=*/0x7a46e7, iteration, batch_size,
                                        static_cast<int>(target.size()));
    batch.target_images = Tensor({batch_size, 3, size, size});
    fill_batch_images(batch.target_images, target, tgt_idx, size);
  }
  return batch;
}

}  // namespace cfea
