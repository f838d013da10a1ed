#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "loonie/rng.hpp"

namespace loonie {

// MLP with sine activations: every hidden layer computes sin(omega0*(Wx+b)),
// the output layer is affine. Predictions are not clipped here.
struct SirenConfig {
  int input_dim = 2;
  int output_dim = 3;
  int hidden_layers = 5;
  int hidden_width = 20;
  double omega0 = 30.0;

  bool valid() const {
    return input_dim >= 1 && output_dim >= 1 && hidden_layers >= 1 && hidden_width >= 1 &&
           omega0 > 0.0;
  }
  int layer_count() const { return hidden_layers + 1; }

  bool operator==(const SirenConfig&) const = default;
};

struct LayerShape {
  int in = 0;
  int out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;

  std::size_t end() const { return bias_offset + static_cast<std::size_t>(out); }
};

inline std::vector<LayerShape> layer_shapes(const SirenConfig& cfg) {
  std::vector<LayerShape> shapes(cfg.layer_count());
  std::size_t offset = 0;
  for (int l = 0; l < cfg.layer_count(); ++l) {
    const int in = (l == 0) ? cfg.input_dim : cfg.hidden_width;
    const int out = (l == cfg.layer_count() - 1) ? cfg.output_dim : cfg.hidden_width;
    shapes[l] = {in, out, offset, offset + static_cast<std::size_t>(in) * out};
    offset = shapes[l].end();
  }
  return shapes;
}

inline std::size_t param_count(const SirenConfig& cfg) { return layer_shapes(cfg).back().end(); }

// Network parameters in the canonical flat order: layers first to last, each
// layer's weight matrix row-major (out x in) followed by its bias vector.
// Gates, pruning masks and serialized payloads all index into this order.
template <typename T>
struct SirenParams {
  SirenConfig config;
  std::vector<T> values;
};

// Uniform initialization: first layer in [-s/fan_in, s/fan_in], later layers
// in [-s*sqrt(6/fan_in)/omega0, ...], biases following their layer's rule.
// Draws are consumed in flat parameter order, so a seed pins every value.
// magnitude_scale = 2 compensates gates that start at median 1/2.
template <typename T>
SirenParams<T> init_siren(const SirenConfig& cfg, std::uint64_t seed, double magnitude_scale = 1.0) {
  if (!cfg.valid()) throw std::invalid_argument("init_siren: invalid config");
  Rng rng(seed);
  SirenParams<T> params{cfg, std::vector<T>(param_count(cfg))};
  const auto shapes = layer_shapes(cfg);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const double fan_in = shapes[l].in;
    const double bound = (l == 0)
                             ? magnitude_scale / fan_in
                             : magnitude_scale * std::sqrt(6.0 / fan_in) / cfg.omega0;
    for (std::size_t k = shapes[l].weight_offset; k < shapes[l].end(); ++k) {
      params.values[k] = static_cast<T>(rng.uniform(-bound, bound));
    }
  }
  return params;
}

// Fixed-order 4-lane reduction; deterministic for a given build.
template <typename T>
inline T dot(const T* a, const T* b, std::size_t n) {
  T s0{}, s1{}, s2{}, s3{};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  T s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
inline T sum(const T* a, std::size_t n) {
  T s0{}, s1{}, s2{}, s3{};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i];
    s1 += a[i + 1];
    s2 += a[i + 2];
    s3 += a[i + 3];
  }
  T s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i];
  return s;
}

namespace detail {
// One call computes the activation and the factor the backward pass needs.
inline void sin_cos(float x, float& s, float& c) { ::sincosf(x, &s, &c); }
inline void sin_cos(double x, double& s, double& c) { ::sincos(x, &s, &c); }
}  // namespace detail

// Activations of one forward evaluation, retained for the backward pass.
// Valid for exactly one (params, coords) pair. Layer tensors are stored
// feature-major ([feature][pixel]) so the per-pixel loops are stride-1;
// predictions stay pixel-major. Reusing one cache across evaluations avoids
// reallocating the block tensors every step.
template <typename T>
struct ForwardCache {
  std::vector<std::vector<T>> inputs;   // inputs[l]: what layer l consumed (in x n)
  std::vector<std::vector<T>> cosines;  // cosines[l]: cos(omega0 * preact) of hidden layer l
  std::vector<T> predictions;           // n x output_dim
  std::vector<T> z;                     // pre-activation scratch
  std::size_t n = 0;
};

// Reusable buffers for loss_and_grad.
template <typename T>
struct SirenWorkspace {
  ForwardCache<T> cache;
  std::vector<T> d_pred;
  std::vector<T> delta;
  std::vector<T> next;
};

template <typename T>
void forward_block(const SirenParams<T>& params, const std::vector<LayerShape>& shapes,
                   std::span<const float> coords, ForwardCache<T>& cache) {
  const int layers = static_cast<int>(shapes.size());
  const std::size_t in_dim = static_cast<std::size_t>(shapes.front().in);
  const std::size_t n = coords.size() / in_dim;
  const T w0 = static_cast<T>(params.config.omega0);

  cache.n = n;
  cache.inputs.resize(layers);
  cache.cosines.resize(layers - 1);
  cache.inputs[0].resize(coords.size());
  for (std::size_t i = 0; i < in_dim; ++i) {
    T* dst = cache.inputs[0].data() + i * n;
    for (std::size_t p = 0; p < n; ++p) dst[p] = static_cast<T>(coords[p * in_dim + i]);
  }

  std::vector<T>& z = cache.z;
  for (int l = 0; l < layers; ++l) {
    const LayerShape& sh = shapes[l];
    const T* w = params.values.data() + sh.weight_offset;
    const T* b = params.values.data() + sh.bias_offset;
    const std::vector<T>& act = cache.inputs[l];
    z.resize(n * static_cast<std::size_t>(sh.out));
    for (int o = 0; o < sh.out; ++o) {
      T* zo = z.data() + static_cast<std::size_t>(o) * n;
      const T bias = b[o];
      for (std::size_t p = 0; p < n; ++p) zo[p] = bias;
      for (int i = 0; i < sh.in; ++i) {
        const T wi = w[static_cast<std::size_t>(o) * sh.in + i];
        const T* ai = act.data() + static_cast<std::size_t>(i) * n;
        for (std::size_t p = 0; p < n; ++p) zo[p] += wi * ai[p];
      }
    }
    if (l < layers - 1) {
      std::vector<T>& next = cache.inputs[l + 1];
      std::vector<T>& cosines = cache.cosines[l];
      next.resize(z.size());
      cosines.resize(z.size());
      for (std::size_t k = 0; k < z.size(); ++k) {
        detail::sin_cos(w0 * z[k], next[k], cosines[k]);
      }
    } else {
      cache.predictions.resize(z.size());
      for (int o = 0; o < sh.out; ++o) {
        const T* zo = z.data() + static_cast<std::size_t>(o) * n;
        for (std::size_t p = 0; p < n; ++p) cache.predictions[p * sh.out + o] = zo[p];
      }
    }
  }
}

// Accumulates d(loss)/d(params) into grad given d(loss)/d(predictions)
// (pixel-major). Reductions over pixels use the fixed 4-lane order above.
template <typename T>
void backward_block(const SirenParams<T>& params, const std::vector<LayerShape>& shapes,
                    SirenWorkspace<T>& ws, std::span<const T> d_predictions, std::span<T> grad) {
  const ForwardCache<T>& cache = ws.cache;
  const int layers = static_cast<int>(shapes.size());
  const std::size_t n = cache.n;
  const int out_dim = shapes.back().out;
  const T w0 = static_cast<T>(params.config.omega0);

  std::vector<T>& delta = ws.delta;
  delta.resize(n * static_cast<std::size_t>(out_dim));
  for (int o = 0; o < out_dim; ++o) {
    T* dst = delta.data() + static_cast<std::size_t>(o) * n;
    for (std::size_t p = 0; p < n; ++p) dst[p] = d_predictions[p * out_dim + o];
  }

  std::vector<T>& next = ws.next;
  for (int l = layers - 1; l >= 0; --l) {
    const LayerShape& sh = shapes[l];
    const std::vector<T>& act = cache.inputs[l];
    T* gw = grad.data() + sh.weight_offset;
    T* gb = grad.data() + sh.bias_offset;
    for (int o = 0; o < sh.out; ++o) {
      const T* d = delta.data() + static_cast<std::size_t>(o) * n;
      gb[o] += sum(d, n);
      for (int i = 0; i < sh.in; ++i) {
        gw[static_cast<std::size_t>(o) * sh.in + i] +=
            dot(d, act.data() + static_cast<std::size_t>(i) * n, n);
      }
    }
    if (l > 0) {
      const T* w = params.values.data() + sh.weight_offset;
      next.assign(n * static_cast<std::size_t>(sh.in), T(0));
      for (int o = 0; o < sh.out; ++o) {
        const T* d = delta.data() + static_cast<std::size_t>(o) * n;
        for (int i = 0; i < sh.in; ++i) {
          const T wi = w[static_cast<std::size_t>(o) * sh.in + i];
          T* ni = next.data() + static_cast<std::size_t>(i) * n;
          for (std::size_t p = 0; p < n; ++p) ni[p] += wi * d[p];
        }
      }
      const std::vector<T>& cosines = cache.cosines[l - 1];
      for (std::size_t k = 0; k < next.size(); ++k) next[k] *= w0 * cosines[k];
      delta.swap(next);
    }
  }
}

namespace detail {
constexpr std::size_t kPixelBlock = 4096;
}

// Evaluate the network on a flat coordinate array (input_dim per point).
template <typename T>
std::vector<T> forward(const SirenParams<T>& params, std::span<const float> coords,
                       SirenWorkspace<T>* workspace = nullptr) {
  const auto shapes = layer_shapes(params.config);
  if (params.values.size() != shapes.back().end()) {
    throw std::invalid_argument("forward: parameter count does not match config");
  }
  const std::size_t in_dim = static_cast<std::size_t>(params.config.input_dim);
  if (coords.size() % in_dim != 0) throw std::invalid_argument("forward: coordinate shape mismatch");
  const std::size_t n = coords.size() / in_dim;
  std::vector<T> predictions(n * params.config.output_dim);
  SirenWorkspace<T> local;
  ForwardCache<T>& cache = (workspace ? *workspace : local).cache;
  for (std::size_t start = 0; start < n; start += detail::kPixelBlock) {
    const std::size_t count = std::min(detail::kPixelBlock, n - start);
    forward_block(params, shapes, coords.subspan(start * in_dim, count * in_dim), cache);
    std::copy(cache.predictions.begin(), cache.predictions.end(),
              predictions.begin() + start * params.config.output_dim);
  }
  return predictions;
}

template <typename T>
struct LossGrad {
  double loss = 0.0;
  std::vector<T> grad;
};

// Mean squared error over pixels and channels, with its analytic gradient.
// Blocks of pixels are processed and reduced in file order, single threaded,
// so results are bit-reproducible for a given build.
template <typename T>
LossGrad<T> loss_and_grad(const SirenParams<T>& params, std::span<const float> coords,
                          std::span<const float> targets,
                          SirenWorkspace<T>* workspace = nullptr) {
  const auto shapes = layer_shapes(params.config);
  const std::size_t in_dim = static_cast<std::size_t>(params.config.input_dim);
  const std::size_t out_dim = static_cast<std::size_t>(params.config.output_dim);
  if (coords.empty() || coords.size() % in_dim != 0 ||
      coords.size() / in_dim != targets.size() / out_dim || targets.size() % out_dim != 0) {
    throw std::invalid_argument("loss_and_grad: dataset shape mismatch");
  }
  const std::size_t n = coords.size() / in_dim;
  const std::size_t value_count = n * out_dim;
  const T scale = T(2) / static_cast<T>(value_count);

  LossGrad<T> result;
  result.grad.assign(params.values.size(), T(0));
  double loss_acc = 0.0;

  SirenWorkspace<T> local;
  SirenWorkspace<T>& ws = workspace ? *workspace : local;
  for (std::size_t start = 0; start < n; start += detail::kPixelBlock) {
    const std::size_t count = std::min(detail::kPixelBlock, n - start);
    forward_block(params, shapes, coords.subspan(start * in_dim, count * in_dim), ws.cache);
    ws.d_pred.resize(count * out_dim);
    const float* y = targets.data() + start * out_dim;
    for (std::size_t k = 0; k < count * out_dim; ++k) {
      const T e = ws.cache.predictions[k] - static_cast<T>(y[k]);
      loss_acc += static_cast<double>(e) * static_cast<double>(e);
      ws.d_pred[k] = scale * e;
    }
    backward_block(params, shapes, ws, std::span<const T>(ws.d_pred), std::span<T>(result.grad));
  }
  result.loss = loss_acc / static_cast<double>(value_count);
  return result;
}

}  // namespace loonie
