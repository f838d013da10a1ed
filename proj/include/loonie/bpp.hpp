#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "loonie/half.hpp"
#include "loonie/hard_concrete.hpp"
#include "loonie/siren.hpp"

namespace loonie {

// Bit accounting of a model against an image. bpp counts parameter payload
// bits only; headers and masks are reported separately by the codec.
struct BppReport {
  std::size_t active_params = 0;
  int bits_per_param = 16;
  std::size_t pixel_count = 0;
  double bpp = 0.0;
};

// Exact bits-per-pixel of the half-precision cast of the parameters. A
// parameter counts as active iff its binary16 cast is nonzero, so magnitudes
// that underflow half precision are inactive. Values are cast via float.
template <typename T>
BppReport casted_bpp(std::span<const T> effective_params, std::size_t pixel_count) {
  if (pixel_count == 0) throw std::invalid_argument("casted_bpp: pixel_count must be positive");
  std::size_t active = 0;
  for (const T v : effective_params) {
    if (!half_is_zero(float_to_half_bits(static_cast<float>(v)))) ++active;
  }
  return {active, 16, pixel_count,
          static_cast<double>(active) * 16.0 / static_cast<double>(pixel_count)};
}

// Differentiable surrogate: 16 * E[L0] / pixels, with the per-parameter bit
// width treated as the constant 16. Its gradient lives in psi only.
template <typename T>
double expected_bpp(const GateParams<T>& gates, std::size_t pixel_count) {
  if (pixel_count == 0) throw std::invalid_argument("expected_bpp: pixel_count must be positive");
  return 16.0 * expected_l0(std::span<const T>(gates.psi), gates.config) /
         static_cast<double>(pixel_count);
}

template <typename T>
std::vector<T> expected_bpp_grad(const GateParams<T>& gates, std::size_t pixel_count) {
  if (pixel_count == 0) throw std::invalid_argument("expected_bpp: pixel_count must be positive");
  const double scale = 16.0 / static_cast<double>(pixel_count);
  std::vector<T> grad(gates.psi.size());
  for (std::size_t i = 0; i < gates.psi.size(); ++i) {
    grad[i] = static_cast<T>(
        scale * static_cast<double>(prob_nonzero_grad(static_cast<double>(gates.psi[i]),
                                                      gates.config)));
  }
  return grad;
}

// Dense bits-per-pixel of an architecture.
inline double arch_bpp(const SirenConfig& cfg, int bits_per_param, std::size_t pixel_count) {
  if (!cfg.valid()) throw std::invalid_argument("arch_bpp: invalid config");
  if (pixel_count == 0) throw std::invalid_argument("arch_bpp: pixel_count must be positive");
  return static_cast<double>(param_count(cfg)) * bits_per_param / static_cast<double>(pixel_count);
}

}  // namespace loonie
