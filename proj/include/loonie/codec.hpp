#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "loonie/half.hpp"
#include "loonie/image.hpp"
#include "loonie/siren.hpp"
#include "loonie/trainer.hpp"

namespace loonie {

// .l0ne container, all little-endian:
//   offset  size              field
//   0       4                 magic "L0NE"
//   4       1                 version (1)
//   5       1                 precision bits (16)
//   6       4                 omega0, float32
//   10      4                 training image height, uint32
//   14      4                 training image width, uint32
//   18      1                 layer count L (affine layers)
//   19      2*(L+1)           dimension chain, uint16: input, widths..., output
//   ...     ceil(N/8)         mask, one bit per parameter in flat order,
//                             LSB-first within each byte
//   ...     2*popcount(mask)  binary16 payload of the masked-in parameters,
//                             in flat order
// A mask bit is set iff the half-precision cast of the effective parameter
// is nonzero, so the payload never stores zeros.
namespace l0ne {
constexpr char kMagic[4] = {'L', '0', 'N', 'E'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kPrecisionBits = 16;
}  // namespace l0ne

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xffu));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffu));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    const auto b = take(2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    const auto b = take(4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("decode: truncated model file");
    const auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode(const TrainedModel& model, int image_height,
                                        int image_width) {
  const SirenConfig& arch = model.arch;
  if (!arch.valid() || model.magnitudes.size() != param_count(arch) ||
      model.gates.size() != model.magnitudes.size()) {
    throw std::invalid_argument("encode: inconsistent model");
  }
  if (image_height < 1 || image_width < 1) throw std::invalid_argument("encode: bad image dims");
  if (arch.layer_count() > 255 || arch.input_dim > 0xffff || arch.output_dim > 0xffff ||
      arch.hidden_width > 0xffff) {
    throw std::invalid_argument("encode: architecture exceeds header field ranges");
  }

  const std::vector<float> effective = model.effective();
  std::vector<std::uint8_t> out;
  out.insert(out.end(), l0ne::kMagic, l0ne::kMagic + 4);
  out.push_back(l0ne::kVersion);
  out.push_back(l0ne::kPrecisionBits);
  detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(arch.omega0)));
  detail::put_u32(out, static_cast<std::uint32_t>(image_height));
  detail::put_u32(out, static_cast<std::uint32_t>(image_width));
  out.push_back(static_cast<std::uint8_t>(arch.layer_count()));
  detail::put_u16(out, static_cast<std::uint16_t>(arch.input_dim));
  for (int l = 0; l < arch.hidden_layers; ++l) {
    detail::put_u16(out, static_cast<std::uint16_t>(arch.hidden_width));
  }
  detail::put_u16(out, static_cast<std::uint16_t>(arch.output_dim));

  const std::size_t n = effective.size();
  std::vector<std::uint8_t> mask((n + 7) / 8, 0);
  std::vector<std::uint16_t> payload;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint16_t h = float_to_half_bits(effective[i]);
    if (!half_is_zero(h)) {
      mask[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
      payload.push_back(h);
    }
  }
  out.insert(out.end(), mask.begin(), mask.end());
  for (const std::uint16_t h : payload) detail::put_u16(out, h);
  return out;
}

struct DecodedModel {
  TrainedModel model;
  int height = 0;
  int width = 0;
};

// Rejects bad magic, version/precision mismatches and truncation; never
// returns a partial model. Half values are widened to float32 for all
// arithmetic after decoding.
inline DecodedModel decode(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes);
  const auto magic = in.take(4);
  if (!std::equal(magic.begin(), magic.end(), l0ne::kMagic)) {
    throw std::runtime_error("decode: bad magic, not a .l0ne file");
  }
  const std::uint8_t version = in.u8();
  if (version != l0ne::kVersion) throw std::runtime_error("decode: unsupported version");
  const std::uint8_t precision = in.u8();
  if (precision != l0ne::kPrecisionBits) throw std::runtime_error("decode: unsupported precision");

  const float omega0 = std::bit_cast<float>(in.u32());
  const std::uint32_t height = in.u32();
  const std::uint32_t width = in.u32();
  const int layers = in.u8();
  if (layers < 2) throw std::runtime_error("decode: need at least one hidden layer");

  std::vector<int> dims(static_cast<std::size_t>(layers) + 1);
  for (int& d : dims) d = in.u16();
  SirenConfig arch;
  arch.input_dim = dims.front();
  arch.output_dim = dims.back();
  arch.hidden_layers = layers - 1;
  arch.hidden_width = dims[1];
  arch.omega0 = omega0;
  for (int l = 1; l < layers; ++l) {
    if (dims[l] != arch.hidden_width) throw std::runtime_error("decode: non-uniform hidden widths");
  }
  if (!arch.valid() || height == 0 || width == 0) throw std::runtime_error("decode: bad header");

  const std::size_t n = param_count(arch);
  const auto mask = in.take((n + 7) / 8);
  std::size_t active = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i / 8] & (1u << (i % 8))) ++active;
  }
  // Trailing pad bits must be clear.
  for (std::size_t i = n; i < mask.size() * 8; ++i) {
    if (mask[i / 8] & (1u << (i % 8))) throw std::runtime_error("decode: bad mask padding");
  }

  TrainedModel model;
  model.arch = arch;
  model.magnitudes.assign(n, 0.0f);
  model.gates.assign(n, 0.0f);
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i / 8] & (1u << (i % 8))) {
      const std::uint16_t h = in.u16();
      if (half_is_zero(h)) throw std::runtime_error("decode: zero value under a set mask bit");
      model.magnitudes[i] = half_bits_to_float(h);
      model.gates[i] = 1.0f;
    }
  }
  if (in.remaining() != 0) throw std::runtime_error("decode: trailing bytes after payload");
  return {std::move(model), static_cast<int>(height), static_cast<int>(width)};
}

inline void write_model_file(const TrainedModel& model, int height, int width,
                             const std::string& path) {
  const std::vector<std::uint8_t> bytes = encode(model, height, width);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("encode: cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("encode: write failed: " + path);
}

inline DecodedModel read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("decode: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode(std::span<const std::uint8_t>(bytes));
}

// Render the model on an arbitrary grid (the network is resolution-free),
// clip to [0, 1] and quantize to 8 bits.
inline Image8 decompress_to_image(const TrainedModel& model, int height, int width) {
  const std::vector<float> grid = make_coord_grid(height, width);
  SirenParams<float> params{model.arch, model.effective()};
  const std::vector<float> preds = forward(params, std::span<const float>(grid));
  Image8 img;
  img.height = height;
  img.width = width;
  img.pixels.resize(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) img.pixels[i] = quantize_u8(preds[i]);
  return img;
}

// Payload bits are the published number; mask and header are bookkeeping.
struct FileBits {
  std::size_t payload_bits = 0;
  std::size_t total_bits = 0;
  double payload_bpp = 0.0;
  double total_bpp = 0.0;
};

inline FileBits file_bits(std::size_t file_bytes, std::size_t active_params,
                          std::size_t pixel_count) {
  FileBits fb;
  fb.payload_bits = 16u * active_params;
  fb.total_bits = 8u * file_bytes;
  fb.payload_bpp = static_cast<double>(fb.payload_bits) / static_cast<double>(pixel_count);
  fb.total_bpp = static_cast<double>(fb.total_bits) / static_cast<double>(pixel_count);
  return fb;
}

}  // namespace loonie
