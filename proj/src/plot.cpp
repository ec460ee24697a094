#include "planrft/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <zlib.h>

namespace planrft {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kMarginLeft = 60;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 40;

struct Rgb {
  std::uint8_t r, g, b;
};

const Rgb kPalette[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40},
                        {148, 103, 189}, {140, 86, 75}};

struct Range {
  double lo = 0.0, hi = 1.0;
  void expand(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double map(double v, double a, double b) const {
    if (hi == lo) return (a + b) / 2.0;
    return a + (v - lo) / (hi - lo) * (b - a);
  }
};

std::pair<Range, Range> data_ranges(const std::vector<Series>& series) {
  Range rx{1e300, -1e300}, ry{1e300, -1e300};
  for (const Series& s : series) {
    for (double v : s.x) rx.expand(v);
    for (double v : s.y) ry.expand(v);
  }
  if (rx.lo > rx.hi) rx = {0, 1};
  if (ry.lo > ry.hi) ry = {0, 1};
  if (ry.lo == ry.hi) {
    ry.lo -= 0.5;
    ry.hi += 0.5;
  }
  if (rx.lo == rx.hi) {
    rx.lo -= 0.5;
    rx.hi += 0.5;
  }
  return {rx, ry};
}

// ---- SVG ----

std::string svg_color(const Rgb& c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<Series>& series) {
  auto [rx, ry] = data_ranges(series);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plot: " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";
  const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  out << "<line x1='" << x0 << "' y1='" << y0 << "' x2='" << x1 << "' y2='" << y0
      << "' stroke='black'/>\n";
  out << "<line x1='" << x0 << "' y1='" << y0 << "' x2='" << x0 << "' y2='" << y1
      << "' stroke='black'/>\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", ry.lo);
  out << "<text x='" << x0 - 6 << "' y='" << y0 << "' text-anchor='end' font-size='11'>" << buf
      << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", ry.hi);
  out << "<text x='" << x0 - 6 << "' y='" << y1 + 4 << "' text-anchor='end' font-size='11'>" << buf
      << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", rx.lo);
  out << "<text x='" << x0 << "' y='" << y0 + 16 << "' text-anchor='middle' font-size='11'>" << buf
      << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", rx.hi);
  out << "<text x='" << x1 << "' y='" << y0 + 16 << "' text-anchor='middle' font-size='11'>" << buf
      << "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const Rgb& c = kPalette[si % std::size(kPalette)];
    out << "<polyline fill='none' stroke='" << svg_color(c) << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << rx.map(s.x[i], x0, x1) << "," << ry.map(s.y[i], y0, y1) << " ";
    }
    out << "'/>\n";
    out << "<text x='" << x1 - 150 << "' y='" << y1 + 16 * (si + 1) << "' font-size='12' fill='"
        << svg_color(c) << "'>" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

void write_svg_bars(const std::string& path, const std::string& title,
                    const std::vector<Bar>& bars) {
  Range ry{0.0, 1e-300};
  for (const Bar& b : bars) ry.expand(b.value);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plot: " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";
  const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  out << "<line x1='" << x0 << "' y1='" << y0 << "' x2='" << x1 << "' y2='" << y0
      << "' stroke='black'/>\n";
  const double slot = (x1 - x0) / std::max<std::size_t>(1, bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const Rgb& c = kPalette[i % std::size(kPalette)];
    const double bx = x0 + slot * static_cast<double>(i) + slot * 0.15;
    const double bw = slot * 0.7;
    const double by = ry.map(bars[i].value, y0, y1);
    out << "<rect x='" << bx << "' y='" << by << "' width='" << bw << "' height='" << (y0 - by)
        << "' fill='" << svg_color(c) << "'/>\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", bars[i].value);
    out << "<text x='" << bx + bw / 2 << "' y='" << by - 4 << "' text-anchor='middle' font-size='11'>"
        << buf << "</text>\n";
    out << "<text x='" << bx + bw / 2 << "' y='" << y0 + 16 << "' text-anchor='middle' font-size='11'>"
        << bars[i].label << "</text>\n";
  }
  out << "</svg>\n";
}

// ---- PNG (RGB raster, zlib-deflated) ----

class Raster {
 public:
  Raster() : pixels_(static_cast<std::size_t>(kWidth) * kHeight * 3, 255) {}

  void set(int x, int y, const Rgb& c) {
    if (x < 0 || x >= kWidth || y < 0 || y >= kHeight) return;
    std::size_t i = (static_cast<std::size_t>(y) * kWidth + x) * 3;
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }

  void line(int x0, int y0, int x1, int y1, const Rgb& c) {
    int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      set(x0, y0, c);
      if (x0 == x1 && y0 == y1) break;
      int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void fill_rect(int x0, int y0, int x1, int y1, const Rgb& c) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y)
      for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) set(x, y, c);
  }

  void write_png(const std::string& path) const {
    std::vector<std::uint8_t> raw;
    raw.reserve((static_cast<std::size_t>(kWidth) * 3 + 1) * kHeight);
    for (int y = 0; y < kHeight; ++y) {
      raw.push_back(0);  // filter type none
      const std::uint8_t* row = pixels_.data() + static_cast<std::size_t>(y) * kWidth * 3;
      raw.insert(raw.end(), row, row + static_cast<std::size_t>(kWidth) * 3);
    }
    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
      throw std::runtime_error("png compression failed");
    comp.resize(comp_len);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write plot: " + path);
    const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.write(reinterpret_cast<const char*>(sig), 8);

    auto be32 = [](std::uint32_t v) {
      return std::array<std::uint8_t, 4>{static_cast<std::uint8_t>(v >> 24),
                                         static_cast<std::uint8_t>(v >> 16),
                                         static_cast<std::uint8_t>(v >> 8),
                                         static_cast<std::uint8_t>(v)};
    };
    auto chunk = [&](const char type[4], const std::vector<std::uint8_t>& data) {
      auto len = be32(static_cast<std::uint32_t>(data.size()));
      out.write(reinterpret_cast<const char*>(len.data()), 4);
      out.write(type, 4);
      if (!data.empty()) out.write(reinterpret_cast<const char*>(data.data()),
                                   static_cast<std::streamsize>(data.size()));
      uLong crc = crc32(0L, Z_NULL, 0);
      crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
      if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
      auto crc_be = be32(static_cast<std::uint32_t>(crc));
      out.write(reinterpret_cast<const char*>(crc_be.data()), 4);
    };

    std::vector<std::uint8_t> ihdr;
    auto push32 = [&](std::uint32_t v) {
      auto b = be32(v);
      ihdr.insert(ihdr.end(), b.begin(), b.end());
    };
    push32(kWidth);
    push32(kHeight);
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    chunk("IHDR", ihdr);
    chunk("IDAT", comp);
    chunk("IEND", {});
  }

 private:
  std::vector<std::uint8_t> pixels_;
};

void write_png_lines(const std::string& path, const std::vector<Series>& series) {
  auto [rx, ry] = data_ranges(series);
  Raster img;
  const Rgb black{0, 0, 0};
  img.line(kMarginLeft, kHeight - kMarginBottom, kWidth - kMarginRight, kHeight - kMarginBottom, black);
  img.line(kMarginLeft, kHeight - kMarginBottom, kMarginLeft, kMarginTop, black);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const Rgb& c = kPalette[si % std::size(kPalette)];
    for (std::size_t i = 1; i < s.x.size(); ++i) {
      int ax = static_cast<int>(rx.map(s.x[i - 1], kMarginLeft, kWidth - kMarginRight));
      int ay = static_cast<int>(ry.map(s.y[i - 1], kHeight - kMarginBottom, kMarginTop));
      int bx = static_cast<int>(rx.map(s.x[i], kMarginLeft, kWidth - kMarginRight));
      int by = static_cast<int>(ry.map(s.y[i], kHeight - kMarginBottom, kMarginTop));
      img.line(ax, ay, bx, by, c);
    }
  }
  img.write_png(path);
}

void write_png_bars(const std::string& path, const std::vector<Bar>& bars) {
  Range ry{0.0, 1e-300};
  for (const Bar& b : bars) ry.expand(b.value);
  Raster img;
  const Rgb black{0, 0, 0};
  img.line(kMarginLeft, kHeight - kMarginBottom, kWidth - kMarginRight, kHeight - kMarginBottom, black);
  const double slot =
      (kWidth - kMarginRight - kMarginLeft) / std::max<double>(1.0, static_cast<double>(bars.size()));
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const Rgb& c = kPalette[i % std::size(kPalette)];
    int bx0 = static_cast<int>(kMarginLeft + slot * static_cast<double>(i) + slot * 0.15);
    int bx1 = static_cast<int>(kMarginLeft + slot * static_cast<double>(i) + slot * 0.85);
    int by = static_cast<int>(ry.map(bars[i].value, kHeight - kMarginBottom, kMarginTop));
    img.fill_rect(bx0, by, bx1, kHeight - kMarginBottom - 1, c);
  }
  img.write_png(path);
}

void check_format(const std::string& format) {
  if (format != "svg" && format != "png")
    throw std::invalid_argument("plot format must be 'svg' or 'png'");
}

}  // namespace

void plot_lines(const std::string& path, const std::string& format, const std::string& title,
                const std::vector<Series>& series) {
  check_format(format);
  bool empty = series.empty() ||
               std::all_of(series.begin(), series.end(), [](const Series& s) { return s.x.empty(); });
  if (empty) {
    plot_placeholder(path, format, "no data");
    return;
  }
  if (format == "svg") {
    write_svg_lines(path, title, series);
  } else {
    write_png_lines(path, series);
  }
}

void plot_bars(const std::string& path, const std::string& format, const std::string& title,
               const std::vector<Bar>& bars) {
  check_format(format);
  if (bars.empty()) {
    plot_placeholder(path, format, "no data");
    return;
  }
  if (format == "svg") {
    write_svg_bars(path, title, bars);
  } else {
    write_png_bars(path, bars);
  }
}

void plot_placeholder(const std::string& path, const std::string& format,
                      const std::string& message) {
  check_format(format);
  if (format == "svg") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write plot: " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n<text x='" << kWidth / 2
        << "' y='" << kHeight / 2 << "' text-anchor='middle' font-size='20' fill='gray'>" << message
        << "</text>\n</svg>\n";
  } else {
    Raster img;
    const Rgb gray{128, 128, 128};
    // A crossed box stands in for the message in raster output.
    img.line(kMarginLeft, kMarginTop, kWidth - kMarginRight, kHeight - kMarginBottom, gray);
    img.line(kMarginLeft, kHeight - kMarginBottom, kWidth - kMarginRight, kMarginTop, gray);
    img.write_png(path);
  }
}

}  // namespace planrft
