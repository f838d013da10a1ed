#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

namespace loonie {

// IEEE 754 binary16 conversion with round-to-nearest-even, implemented at
// the bit level so storage is identical across platforms. Overflow goes to
// infinity, subnormals are kept, and float32 values below half the smallest
// half subnormal (2^-25) flush to signed zero.
inline std::uint16_t float_to_half_bits(float value) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
  const std::uint16_t sign = static_cast<std::uint16_t>((bits >> 16) & 0x8000u);
  const std::uint32_t exp = (bits >> 23) & 0xffu;
  const std::uint32_t man = bits & 0x007fffffu;

  if (exp == 0xffu) {  // inf / nan
    return static_cast<std::uint16_t>(sign | (man ? 0x7e00u : 0x7c00u));
  }
  if (exp == 0) return sign;  // float32 subnormals are far below half range

  const std::uint32_t sig = man | 0x00800000u;       // 24-bit significand
  const int half_exp = static_cast<int>(exp) - 127 + 15;

  if (half_exp >= 31) return static_cast<std::uint16_t>(sign | 0x7c00u);

  if (half_exp <= 0) {
    // Subnormal target: the result is sig * 2^(exp-150) in units of 2^-24.
    const int shift = 14 - half_exp;
    if (shift > 25) return sign;
    const std::uint32_t q = sig >> shift;
    const std::uint32_t rem = sig & ((1u << shift) - 1u);
    const std::uint32_t halfway = 1u << (shift - 1);
    std::uint32_t rounded = q;
    if (rem > halfway || (rem == halfway && (q & 1u))) ++rounded;
    // A round-up to 0x400 lands exactly on the smallest normal encoding.
    return static_cast<std::uint16_t>(sign | rounded);
  }

  // Normal target: round the 24-bit significand down to 11 bits.
  std::uint32_t q = sig >> 13;
  const std::uint32_t rem = sig & 0x1fffu;
  if (rem > 0x1000u || (rem == 0x1000u && (q & 1u))) ++q;
  // q in [0x400, 0x800]; 0x800 carries into the exponent, possibly to inf.
  const std::uint32_t out = (static_cast<std::uint32_t>(half_exp - 1) << 10) + q;
  return static_cast<std::uint16_t>(sign | out);
}

// Exact widening; every finite binary16 value is representable in float32.
inline float half_bits_to_float(std::uint16_t h) {
  const std::uint32_t exp = (h >> 10) & 0x1fu;
  const std::uint32_t man = h & 0x3ffu;
  const bool negative = (h & 0x8000u) != 0;
  if (exp == 0x1fu) {
    const std::uint32_t out =
        (static_cast<std::uint32_t>(h & 0x8000u) << 16) | 0x7f800000u | (man << 13);
    return std::bit_cast<float>(out);
  }
  float v;
  if (exp == 0) {
    v = std::ldexp(static_cast<float>(man), -24);
  } else {
    v = std::ldexp(static_cast<float>(man | 0x400u), static_cast<int>(exp) - 25);
  }
  return negative ? -v : v;
}

inline bool half_is_zero(std::uint16_t h) { return (h & 0x7fffu) == 0; }

// float32 -> binary16 -> float32; the value a decoder will see.
inline float cast_f16(float value) { return half_bits_to_float(float_to_half_bits(value)); }

}  // namespace loonie
