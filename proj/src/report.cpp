#include "cfea/report.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "cfea/png_io.hpp"

namespace cfea {

std::string comparison_table(const EvalReport& a, const EvalReport& b, const std::string& label_a,
                             const std::string& label_b) {
  struct Row {
    const char* name;
    double va, vb;
    bool higher_is_better;
  };
  const Row rows[] = {{"Optic Cup", a.cup_dice, b.cup_dice, true},
                      {"Optic Disk", a.disc_dice, b.disc_dice, true},
                      {"CDR", a.cdr_mae, b.cdr_mae, false}};
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %12s %12s %10s %s\n", "Evaluation-Index",
                label_a.c_str(), label_b.c_str(), "diff", "");
  out << line;
  for (const auto& r : rows) {
    const double diff = r.vb - r.va;
    const bool improved = r.higher_is_better ? diff > 0 : diff < 0;
    const char* tag = diff == 0 ? "" : (improved ? "improved" : "worse");
    std::snprintf(line, sizeof line, "%-16s %12.4f %12.4f %+10.4f %s\n", r.name, r.va, r.vb, diff,
                  tag);
    out << line;
  }
  return out.str();
}

namespace {

// 5x7 bitmap glyphs, one byte per row, low 5 bits used.
const std::unordered_map<char, std::array<std::uint8_t, 7>>& glyphs() {
  static const std::unordered_map<char, std::array<std::uint8_t, 7>> g = {
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
      {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
      {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
      {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
      {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
      {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
      {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
      {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
      {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
      {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
      {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
      {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
      {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
      {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
      {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
      {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
      {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
      {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
      {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
      {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
      {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
      {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
      {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
      {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
      {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}},
      {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
      {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
      {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
      {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
  };
  return g;
}

struct Canvas {
  int h, w;
  std::vector<unsigned char> rgb;
  Canvas(int height, int width) : h(height), w(width), rgb(static_cast<std::size_t>(height) * width * 3, 255) {}
  void set(int r, int c, unsigned char cr, unsigned char cg, unsigned char cb) {
    if (r < 0 || r >= h || c < 0 || c >= w) return;
    const std::size_t i = (static_cast<std::size_t>(r) * w + c) * 3;
    rgb[i] = cr;
    rgb[i + 1] = cg;
    rgb[i + 2] = cb;
  }
  void fill_rect(int r0, int c0, int r1, int c1, unsigned char cr, unsigned char cg,
                 unsigned char cb) {
    for (int r = r0; r < r1; ++r)
      for (int c = c0; c < c1; ++c) set(r, c, cr, cg, cb);
  }
  void text(int r, int c, const std::string& s, int scale = 1) {
    int x = c;
    for (char raw : s) {
      const char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
      auto it = glyphs().find(ch);
      if (it != glyphs().end())
        for (int gr = 0; gr < 7; ++gr)
          for (int gc = 0; gc < 5; ++gc)
            if (it->second[static_cast<std::size_t>(gr)] & (1 << (4 - gc)))
              for (int sr = 0; sr < scale; ++sr)
                for (int sc = 0; sc < scale; ++sc)
                  set(r + gr * scale + sr, x + gc * scale + sc, 30, 30, 30);
      x += 6 * scale;
    }
  }
};

std::string fmt3(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

void write_comparison_chart(const std::string& path, const EvalReport& a, const EvalReport& b,
                            const std::string& label_a, const std::string& label_b) {
  const int H = 340, W = 560;
  Canvas cv(H, W);
  const int base = 290, top = 40;
  const int axis_x = 60;

  // Axis and ticks at 0, 0.5, 1.
  cv.fill_rect(base, axis_x, base + 2, W - 20, 60, 60, 60);
  cv.fill_rect(top - 10, axis_x - 2, base + 2, axis_x, 60, 60, 60);
  for (double tick : {0.0, 0.5, 1.0}) {
    const int y = base - static_cast<int>(tick * (base - top));
    cv.fill_rect(y, axis_x - 6, y + 1, axis_x, 60, 60, 60);
    cv.text(y - 3, 18, fmt3(tick).substr(0, 3));
  }

  struct Group {
    const char* name;
    double va, vb;
  };
  const Group groups[] = {{"CUP DICE", a.cup_dice, b.cup_dice},
                          {"DISC DICE", a.disc_dice, b.disc_dice},
                          {"CDR MAE", a.cdr_mae, b.cdr_mae}};
  const int group_w = 150, bar_w = 44;
  for (int gi = 0; gi < 3; ++gi) {
    const int gx = axis_x + 30 + gi * group_w;
    const double va = std::clamp(groups[gi].va, 0.0, 1.0);
    const double vb = std::clamp(groups[gi].vb, 0.0, 1.0);
    const int ha = static_cast<int>(va * (base - top));
    const int hb = static_cast<int>(vb * (base - top));
    cv.fill_rect(base - ha, gx, base, gx + bar_w, 70, 110, 180);
    cv.fill_rect(base - hb, gx + bar_w + 8, base, gx + 2 * bar_w + 8, 230, 140, 50);
    cv.text(base - ha - 12, gx, fmt3(groups[gi].va));
    cv.text(base - hb - 12, gx + bar_w + 8, fmt3(groups[gi].vb));
    cv.text(base + 10, gx + 10, groups[gi].name);
  }

  // Legend.
  cv.fill_rect(14, axis_x, 26, axis_x + 12, 70, 110, 180);
  cv.text(16, axis_x + 18, label_a);
  cv.fill_rect(14, axis_x + 200, 26, axis_x + 212, 230, 140, 50);
  cv.text(16, axis_x + 218, label_b);

  write_rgb8_png(path, cv.rgb, H, W);
}

}  // namespace cfea
