#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace loonie {

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// Stretched-and-clamped concrete distribution on [0, 1] with point masses at
// both ends. The trainable parameter everywhere is psi = log(location); the
// stretch (gamma, zeta) and temperature beta stay fixed.
struct HardConcreteConfig {
  double gamma = -0.1;
  double zeta = 1.1;
  double beta = 2.0 / 3.0;

  bool valid() const { return gamma < 0.0 && zeta > 1.0 && beta > 0.0 && beta < 1.0; }
  double stretch() const { return zeta - gamma; }
  double midpoint() const { return (gamma + zeta) / 2.0; }
  // Offset of the closed-form P[z != 0] = sigmoid(psi - beta*log(-gamma/zeta)).
  double nonzero_offset() const { return beta * std::log(-gamma / zeta); }
  // psi at or below which the median is exactly 0, and at or above which it
  // is exactly 1.
  double lower_saturation() const {
    const double t = -gamma / stretch();
    return beta * std::log(t / (1.0 - t));
  }
  double upper_saturation() const {
    const double t = (1.0 - gamma) / stretch();
    return beta * std::log(t / (1.0 - t));
  }
};

// Log-locations of one gate per network parameter, aligned to the flat
// parameter order of the gated model.
template <typename T>
struct GateParams {
  std::vector<T> psi;
  HardConcreteConfig config{};
};

namespace detail {

// gamma + s*(zeta-gamma), written around the midpoint so that s = 1/2 maps
// to exactly (gamma+zeta)/2 in floating point. The psi = 0 anchor of the
// median (= 0.5 for the default stretch) is exact this way.
template <typename T>
T stretch_around_midpoint(T s, const HardConcreteConfig& cfg) {
  return T(cfg.midpoint()) + (s - T(0.5)) * T(cfg.stretch());
}

}  // namespace detail

// One draw of the gate given a uniform variate u in (0, 1).
template <typename T>
T sample_gate(T psi, T u, const HardConcreteConfig& cfg = {}) {
  const T s = sigmoid((psi + std::log(u / (T(1) - u))) / T(cfg.beta));
  return std::clamp(detail::stretch_around_midpoint(s, cfg), T(0), T(1));
}

// Deterministic gate value used for training and decoding; saturates to
// exactly 0 or 1 outside (lower_saturation, upper_saturation).
template <typename T>
T gate_median(T psi, const HardConcreteConfig& cfg = {}) {
  const T s = sigmoid(psi / T(cfg.beta));
  return std::clamp(detail::stretch_around_midpoint(s, cfg), T(0), T(1));
}

// d(median)/d(psi); 0 on the saturated set, one-sided at its boundary.
template <typename T>
T gate_median_grad(T psi, const HardConcreteConfig& cfg = {}) {
  const T s = sigmoid(psi / T(cfg.beta));
  const T unclamped = detail::stretch_around_midpoint(s, cfg);
  if (unclamped <= T(0) || unclamped >= T(1)) return T(0);
  return T(cfg.stretch()) * s * (T(1) - s) / T(cfg.beta);
}

// Closed form P[z != 0]; smooth in psi everywhere.
template <typename T>
T prob_nonzero(T psi, const HardConcreteConfig& cfg = {}) {
  return sigmoid(psi - T(cfg.nonzero_offset()));
}

template <typename T>
T prob_nonzero_grad(T psi, const HardConcreteConfig& cfg = {}) {
  const T p = prob_nonzero(psi, cfg);
  return p * (T(1) - p);
}

// Expected number of active gates, the differentiable L0 surrogate.
template <typename T>
double expected_l0(std::span<const T> psi, const HardConcreteConfig& cfg = {}) {
  const double offset = cfg.nonzero_offset();
  double total = 0.0;
  for (const T p : psi) {
    total += sigmoid(static_cast<double>(p) - offset);
  }
  return total;
}

// Gate medians for a whole parameter vector.
template <typename T>
std::vector<T> gate_medians(const GateParams<T>& gates) {
  std::vector<T> medians(gates.psi.size());
  for (std::size_t i = 0; i < gates.psi.size(); ++i) {
    medians[i] = gate_median(gates.psi[i], gates.config);
  }
  return medians;
}

}  // namespace loonie
