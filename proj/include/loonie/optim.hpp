#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace loonie {

// Adam with bias correction and no weight decay.
template <typename T>
class Adam {
 public:
  Adam(std::size_t size, T step_size, T beta1 = T(0.9), T beta2 = T(0.99), T epsilon = T(1e-8))
      : step_size_(step_size), beta1_(beta1), beta2_(beta2), epsilon_(epsilon),
        m_(size, T(0)), v_(size, T(0)) {}

  void step(std::span<T> params, std::span<const T> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
      throw std::invalid_argument("Adam::step: shape mismatch");
    }
    ++t_;
    const T bc1 = T(1) - std::pow(beta1_, static_cast<T>(t_));
    const T bc2 = T(1) - std::pow(beta2_, static_cast<T>(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
      const T g = grads[i];
      m_[i] = beta1_ * m_[i] + (T(1) - beta1_) * g;
      v_[i] = beta2_ * v_[i] + (T(1) - beta2_) * g * g;
      const T m_hat = m_[i] / bc1;
      const T v_hat = v_[i] / bc2;
      params[i] -= step_size_ * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
  }

  std::uint64_t steps_taken() const { return t_; }

 private:
  T step_size_;
  T beta1_;
  T beta2_;
  T epsilon_;
  std::uint64_t t_ = 0;
  std::vector<T> m_;
  std::vector<T> v_;
};

// Projected gradient ascent on a single Lagrange multiplier, with the
// dual-restart rule: any feasible step resets the multiplier to zero.
class DualAscent {
 public:
  explicit DualAscent(double step_size, bool restarts = true, double initial = 0.0)
      : step_size_(step_size), restarts_(restarts), lambda_(initial) {
    if (initial < 0.0) throw std::invalid_argument("DualAscent: multiplier must be nonnegative");
  }

  // violation = constraint value minus its bound; positive means infeasible.
  void step(double violation) {
    if (restarts_ && violation <= 0.0) {
      lambda_ = 0.0;
      return;
    }
    lambda_ = std::max(0.0, lambda_ + step_size_ * violation);
  }

  double multiplier() const { return lambda_; }
  bool restarts_enabled() const { return restarts_; }

 private:
  double step_size_;
  bool restarts_;
  double lambda_;
};

}  // namespace loonie
