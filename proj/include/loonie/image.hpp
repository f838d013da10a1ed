#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

namespace loonie {

// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Image8 {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;
};

// An image as a regression dataset: normalized coordinates and RGB targets.
struct PixelDataset {
  int height = 0;
  int width = 0;
  std::vector<float> coords;   // (row, col) pairs in [-1, 1], row-major
  std::vector<float> targets;  // RGB triples in [0, 1]

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
};

// Per-axis linspace over [-1, 1], row index first. An axis with a single
// point maps to -1.
inline std::vector<float> make_coord_grid(int height, int width) {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("make_coord_grid: dimensions must be positive");
  }
  const auto axis = [](int i, int n) {
    return n == 1 ? -1.0f : static_cast<float>(2.0 * i / (n - 1) - 1.0);
  };
  std::vector<float> coords;
  coords.reserve(2u * static_cast<std::size_t>(height) * width);
  for (int r = 0; r < height; ++r) {
    const float rv = axis(r, height);
    for (int c = 0; c < width; ++c) {
      coords.push_back(rv);
      coords.push_back(axis(c, width));
    }
  }
  return coords;
}

// Clip to [0, 1] (NaN renders as 0), then round half away from zero.
inline std::uint8_t quantize_u8(float v) {
  if (std::isnan(v)) v = 0.0f;
  v = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(v * 255.0f));
}

// PSNR in dB for unit-range signals; both sides are clipped to [0, 1] before
// comparison. Zero MSE returns +infinity.
inline double psnr(std::span<const float> reference, std::span<const float> reconstruction) {
  if (reference.size() != reconstruction.size()) {
    throw std::invalid_argument("psnr: length mismatch");
  }
  if (reference.empty()) throw std::invalid_argument("psnr: empty input");
  const auto clip = [](float v) {
    if (std::isnan(v)) return 0.0;
    return static_cast<double>(std::clamp(v, 0.0f, 1.0f));
  };
  double mse = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = clip(reference[i]) - clip(reconstruction[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(reference.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

namespace detail {

struct PngReadCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCtx() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCtx() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

}  // namespace detail

// 8-bit RGB or RGBA (alpha dropped) PNG.
inline Image8 load_png(const std::string& path) {
  detail::PngReadCtx ctx;
  ctx.fp = std::fopen(path.c_str(), "rb");
  if (!ctx.fp) throw std::runtime_error("load_image: cannot open " + path);
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (ctx.png) ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw std::runtime_error("load_image: libpng init failed");

  Image8 img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(ctx.png))) {
    throw std::runtime_error("load_image: corrupt or unreadable PNG: " + path);
  }
  png_init_io(ctx.png, ctx.fp);
  png_read_info(ctx.png, ctx.info);

  const png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
  const png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
  const int depth = png_get_bit_depth(ctx.png, ctx.info);
  const int color = png_get_color_type(ctx.png, ctx.info);
  if (width == 0 || height == 0) throw std::runtime_error("load_image: zero-dimension image: " + path);
  if (depth != 8 || (color != PNG_COLOR_TYPE_RGB && color != PNG_COLOR_TYPE_RGB_ALPHA)) {
    throw std::runtime_error("load_image: unsupported PNG format (need 8-bit RGB/RGBA): " + path);
  }
  if (color == PNG_COLOR_TYPE_RGB_ALPHA) png_set_strip_alpha(ctx.png);
  png_set_interlace_handling(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  img.height = static_cast<int>(height);
  img.width = static_cast<int>(width);
  img.pixels.resize(3u * width * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = img.pixels.data() + 3u * width * y;
  }
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
  return img;
}

inline void save_png(const Image8& img, const std::string& path) {
  if (img.height < 1 || img.width < 1 ||
      img.pixels.size() != 3u * static_cast<std::size_t>(img.height) * img.width) {
    throw std::invalid_argument("save_png: inconsistent image buffer");
  }
  detail::PngWriteCtx ctx;
  ctx.fp = std::fopen(path.c_str(), "wb");
  if (!ctx.fp) throw std::runtime_error("save_image: cannot open for writing: " + path);
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (ctx.png) ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw std::runtime_error("save_image: libpng init failed");

  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = const_cast<png_bytep>(img.pixels.data()) + 3u * static_cast<std::size_t>(img.width) * y;
  }
  if (setjmp(png_jmpbuf(ctx.png))) {
    throw std::runtime_error("save_image: PNG write failed: " + path);
  }
  png_init_io(ctx.png, ctx.fp);
  png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, nullptr);
}

// Binary PPM (P6), maxval 255.
inline Image8 load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_image: cannot open " + path);

  const auto next_token = [&in, &path]() -> std::string {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        while ((c = in.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (!std::isspace(c)) break;
    }
    if (c == EOF) throw std::runtime_error("load_image: truncated PPM header: " + path);
    tok.push_back(static_cast<char>(c));
    while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(c));
    return tok;  // the single delimiter after the token has been consumed
  };
  const auto next_int = [&](const char* what) -> long {
    const std::string tok = next_token();
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error(std::string("load_image: bad PPM ") + what + ": " + path);
    }
  };

  if (next_token() != "P6") throw std::runtime_error("load_image: unsupported format: " + path);
  const long width = next_int("width");
  const long height = next_int("height");
  const long maxval = next_int("maxval");
  if (width < 1 || height < 1) throw std::runtime_error("load_image: zero-dimension image: " + path);
  if (maxval != 255) throw std::runtime_error("load_image: PPM maxval must be 255: " + path);

  Image8 img;
  img.height = static_cast<int>(height);
  img.width = static_cast<int>(width);
  img.pixels.resize(3u * static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw std::runtime_error("load_image: truncated PPM payload: " + path);
  }
  return img;
}

// Dispatch on the file's magic bytes: PNG signature or "P6".
inline Image8 load_rgb8(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("load_image: cannot open " + path);
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == '\x89' && magic[1] == 'P') return load_png(path);
  if (magic[0] == 'P' && magic[1] == '6') return load_ppm(path);
  throw std::runtime_error("load_image: unsupported format: " + path);
}

inline PixelDataset dataset_from_image(const Image8& img) {
  PixelDataset ds;
  ds.height = img.height;
  ds.width = img.width;
  ds.coords = make_coord_grid(img.height, img.width);
  ds.targets.resize(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    ds.targets[i] = static_cast<float>(img.pixels[i]) / 255.0f;
  }
  return ds;
}

inline PixelDataset load_image(const std::string& path) {
  return dataset_from_image(load_rgb8(path));
}

// Clip, quantize to 8 bits and write a PNG.
inline void save_image(std::span<const float> predictions, int height, int width,
                       const std::string& path) {
  if (predictions.size() != 3u * static_cast<std::size_t>(height) * width) {
    throw std::invalid_argument("save_image: prediction length does not match dimensions");
  }
  Image8 img;
  img.height = height;
  img.width = width;
  img.pixels.resize(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    img.pixels[i] = quantize_u8(predictions[i]);
  }
  save_png(img, path);
}

}  // namespace loonie
