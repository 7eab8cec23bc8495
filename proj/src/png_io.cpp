#include "cfea/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>

#include "cfea/error.hpp"

namespace cfea {

namespace {

std::mutex g_log_mutex;
std::vector<std::string> g_read_log;

void record_read(const std::string& path) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_read_log.push_back(path);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngRead {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngRead() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWrite {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWrite() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

// Decodes any 8-bit PNG to interleaved RGB rows.
void decode_rgb8(const std::string& path, std::vector<unsigned char>& out, int& h, int& w) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open PNG file: " + path);
  PngRead ctx;
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw IoError("png_create_read_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw IoError("malformed PNG file: " + path);
  png_init_io(ctx.png, fp.get());
  png_read_info(ctx.png, ctx.info);

  png_set_expand(ctx.png);
  png_set_strip_16(ctx.png);
  png_set_strip_alpha(ctx.png);
  png_set_gray_to_rgb(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  w = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  h = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  if (png_get_channels(ctx.png, ctx.info) != 3)
    throw IoError("unexpected channel count after RGB expansion: " + path);

  out.resize(static_cast<std::size_t>(h) * w * 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int r = 0; r < h; ++r) rows[static_cast<std::size_t>(r)] = out.data() + static_cast<std::size_t>(r) * w * 3;
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
  record_read(path);
}

}  // namespace

Tensor read_image_png(const std::string& path) {
  std::vector<unsigned char> rgb;
  int h = 0, w = 0;
  decode_rgb8(path, rgb, h, w);
  Tensor t({3, h, w});
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  for (std::int64_t p = 0; p < plane; ++p)
    for (int c = 0; c < 3; ++c)
      t[c * plane + p] = static_cast<double>(rgb[static_cast<std::size_t>(p) * 3 + c]) / 255.0;
  return t;
}

LabelMask read_mask_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open PNG file: " + path);
  PngRead ctx;
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw IoError("png_create_read_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw IoError("malformed PNG file: " + path);
  png_init_io(ctx.png, fp.get());
  png_read_info(ctx.png, ctx.info);
  png_set_expand(ctx.png);
  png_set_strip_16(ctx.png);
  png_set_strip_alpha(ctx.png);
  png_set_rgb_to_gray(ctx.png, 1, -1, -1);
  png_read_update_info(ctx.png, ctx.info);
  const int w = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  const int h = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  std::vector<unsigned char> buf(static_cast<std::size_t>(h) * w);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int r = 0; r < h; ++r) rows[static_cast<std::size_t>(r)] = buf.data() + static_cast<std::size_t>(r) * w;
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
  record_read(path);
  return LabelMask(h, w, std::vector<std::uint8_t>(buf.begin(), buf.end()));
}

void write_rgb8_png(const std::string& path, const std::vector<unsigned char>& rgb, int height,
                    int width) {
  if (rgb.size() != static_cast<std::size_t>(height) * width * 3)
    throw InputError("write_rgb8_png: buffer size mismatch");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot create PNG file: " + path);
  PngWrite ctx;
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw IoError("png_create_write_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw IoError("PNG write failed: " + path);
  png_init_io(ctx.png, fp.get());
  png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  for (int r = 0; r < height; ++r)
    png_write_row(ctx.png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(r) * width * 3));
  png_write_end(ctx.png, nullptr);
}

void write_image_png(const std::string& path, const Tensor& chw) {
  if (chw.ndim() != 3 || chw.dim(0) != 3) throw InputError("write_image_png: expects (3, H, W)");
  const int h = chw.dim(1), w = chw.dim(2);
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  std::vector<unsigned char> rgb(static_cast<std::size_t>(plane) * 3);
  for (std::int64_t p = 0; p < plane; ++p)
    for (int c = 0; c < 3; ++c) {
      const double v = std::min(std::max(chw[c * plane + p], 0.0), 1.0);
      rgb[static_cast<std::size_t>(p) * 3 + c] =
          static_cast<unsigned char>(std::lround(v * 255.0));
    }
  write_rgb8_png(path, rgb, h, w);
}

void write_mask_png(const std::string& path, const LabelMask& mask) {
  const int h = mask.height(), w = mask.width();
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot create PNG file: " + path);
  PngWrite ctx;
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw IoError("png_create_write_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw IoError("PNG write failed: " + path);
  png_init_io(ctx.png, fp.get());
  png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  for (int r = 0; r < h; ++r)
    png_write_row(ctx.png, const_cast<png_bytep>(reinterpret_cast<const png_byte*>(
                               mask.labels().data() + static_cast<std::size_t>(r) * w)));
  png_write_end(ctx.png, nullptr);
}

std::vector<std::string> png_read_log() {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  return g_read_log;
}

void clear_png_read_log() {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_read_log.clear();
}

}  // namespace cfea
