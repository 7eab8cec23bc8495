#pragma once

#include <string>
#include <vector>

#include "cfea/tensor.hpp"
#include "cfea/types.hpp"

namespace cfea {

// 8-bit PNG codecs. Images are RGB (color type 2), masks single-channel
// gray (color type 0) with raw label values {0,1,2}.

// Reads an RGB(A) or gray PNG into planar (3, H, W) in [0, 1].
Tensor read_image_png(const std::string& path);

// Reads a single-channel PNG of raw labels.
LabelMask read_mask_png(const std::string& path);

// Writes (3, H, W) values in [0, 1] as 8-bit RGB.
void write_image_png(const std::string& path, const Tensor& chw);

// Writes labels as 8-bit gray, one byte per pixel.
void write_mask_png(const std::string& path, const LabelMask& mask);

// Writes an arbitrary interleaved RGB8 buffer (used by the report chart).
void write_rgb8_png(const std::string& path, const std::vector<unsigned char>& rgb, int height,
                    int width);

// Every successful read is recorded here so tests can prove which files
// training touched. Thread-safe.
std::vector<std::string> png_read_log();
void clear_png_read_log();

}  // namespace cfea
