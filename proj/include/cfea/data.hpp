#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfea/tensor.hpp"
#include "cfea/types.hpp"

namespace cfea {

// One JSON-lines manifest record. Paths are stored relative to the manifest
// file and resolved against its directory at load time.
struct ManifestRecord {
  std::string image_path;
  std::optional<std::string> mask_path;
  std::string domain;  // "source" or "target"
  std::optional<std::pair<int, int>> disc_center;  // (row, col)
};

std::vector<ManifestRecord> load_manifest(const std::string& path);
void save_manifest(const std::string& path, const std::vector<ManifestRecord>& records);

struct Sample {
  Tensor image;  // (3, S, S), [0, 1]
  std::optional<LabelMask> mask;
};

struct Dataset {
  std::string domain;
  std::vector<Sample> samples;
  std::size_t size() const { return samples.size(); }
  bool labeled() const;
};

// Disc-region centroid (labels 1 or 2), rounded to the nearest pixel.
std::pair<int, int> locate_center(const LabelMask& mask);

// Crops a crop_size square around center (edge-replicated where the window
// leaves the image) and resizes to out_size: bilinear for the image,
// nearest-neighbor for the mask.
std::pair<ImageTensor, std::optional<LabelMask>> preprocess(const Tensor& image_chw,
                                                            const LabelMask* mask,
                                                            std::pair<int, int> center,
                                                            int crop_size, int out_size);

struct LoadOptions {
  int crop_size = 600;
  int out_size = 128;
  bool with_masks = true;            // false: masks are never opened
  std::string expected_domain;       // "" accepts any
  int num_workers = 0;               // 0: auto (capped by CFEA_NUM_WORKERS)
};

// Loads and preprocesses every record of a manifest. Deterministic: sample i
// always comes from record i regardless of worker count.
Dataset load_dataset(const std::string& manifest_path, const LoadOptions& options);

// Effective data-loading parallelism (env CFEA_NUM_WORKERS caps it).
int effective_workers(int requested);

// Paired batch of preprocessed tensors.
struct Batch {
  Tensor source_images;  // (B, 3, S, S)
  Tensor source_one_hot; // (B, 3, S, S)
  Tensor target_images;  // (B, 3, S, S); empty in source-only runs
};

// Stateless batch schedule: sample indices for one iteration as a pure
// function of (seed, iteration). Each domain is reshuffled every epoch with
// a seed-derived permutation; the shorter dataset simply cycles.
std::vector<int> batch_schedule(std::uint64_t seed, std::uint64_t domain_tag,
                                std::int64_t iteration, int batch_size, int dataset_size);

Batch make_batch(const Dataset& source, const Dataset& target, std::uint64_t seed,
                 std::int64_t iteration, int batch_size);

}  // namespace cfea
