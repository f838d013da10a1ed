#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "loonie/bpp.hpp"
#include "loonie/half.hpp"
#include "loonie/hard_concrete.hpp"
#include "loonie/image.hpp"
#include "loonie/optim.hpp"
#include "loonie/siren.hpp"

namespace loonie {

enum class Method { coin, loonie, mp };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::coin: return "coin";
    case Method::loonie: return "loonie";
    case Method::mp: return "mp";
  }
  return "?";
}

struct TrainConfig {
  Method method = Method::coin;
  SirenConfig arch{};
  int steps = 50'000;
  std::uint64_t seed = 0;
  double target_bpp = 0.0;  // required for loonie/mp; 0 disables the feasibility flag
  double eta_theta = 2e-4;  // Adam step size on magnitudes (1e-3 for loonie)
  double eta_psi = 7e-4;    // Adam step size on gate log-locations
  double eta_dual = 1e-3;   // gradient ascent step on the multiplier
  int eval_every = 100;
  bool restarts_enabled = true;
};

struct MetricsRecord {
  int step = 0;
  double loss = 0.0;
  double psnr_f32 = 0.0;
  // PSNR of the half-cast model rendered to 8 bits; exactly what decoding
  // the compressed artifact produces.
  double psnr_f16 = 0.0;
  double bpp = 0.0;           // exact half-cast bits per pixel
  double expected_bpp = 0.0;  // surrogate (equals bpp for gateless methods)
  double lambda = 0.0;
  bool feasible = true;
  double wall_ms = 0.0;
};

struct MetricsLog {
  std::vector<MetricsRecord> records;
  double best_psnr = -std::numeric_limits<double>::infinity();
  double best_feasible_psnr = -std::numeric_limits<double>::infinity();

  void add(const MetricsRecord& r) {
    records.push_back(r);
    best_psnr = std::max(best_psnr, r.psnr_f16);
    if (r.feasible) best_feasible_psnr = std::max(best_feasible_psnr, r.psnr_f16);
  }

  // Schema: one optional "# ..." comment line, a header, one row per eval.
  // Note the eval cadence is step 0 plus every eval_every-th step; pick
  // eval_every dividing steps when the final state must appear in the log.
  void write_csv(std::ostream& out, const std::string& config_comment = {}) const {
    if (!config_comment.empty()) out << "# " << config_comment << "\n";
    out << "step,loss,psnr_f32,psnr_f16,bpp,expected_bpp,lambda,feasible,wall_ms\n";
    char line[320];
    for (const MetricsRecord& r : records) {
      std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%.3f", r.step,
                    r.loss, r.psnr_f32, r.psnr_f16, r.bpp, r.expected_bpp, r.lambda,
                    r.feasible ? 1 : 0, r.wall_ms);
      out << line << "\n";
    }
  }
};

// A trained network: signed magnitudes plus per-parameter gates. Gates are
// all-ones for dense models, medians in [0,1] for gated ones, or a 0/1 mask
// after pruning. The model that gets stored is effective().
struct TrainedModel {
  SirenConfig arch{};
  std::vector<float> magnitudes;
  std::vector<float> gates;

  std::vector<float> effective() const {
    std::vector<float> out(magnitudes.size());
    for (std::size_t i = 0; i < magnitudes.size(); ++i) out[i] = magnitudes[i] * gates[i];
    return out;
  }
};

struct TrainResult {
  TrainedModel model;
  MetricsLog log;
};

namespace detail {

struct EvalStats {
  double loss = 0.0;
  double psnr_f32 = 0.0;
  double psnr_f16 = 0.0;
  double bpp = 0.0;
};

inline EvalStats eval_effective(const SirenConfig& arch, std::span<const float> effective,
                                const PixelDataset& data) {
  EvalStats stats;
  SirenParams<float> model{arch, std::vector<float>(effective.begin(), effective.end())};
  const std::vector<float> preds = forward(model, std::span<const float>(data.coords));

  double se = 0.0;
  for (std::size_t k = 0; k < preds.size(); ++k) {
    const double e = static_cast<double>(preds[k]) - static_cast<double>(data.targets[k]);
    se += e * e;
  }
  stats.loss = se / static_cast<double>(preds.size());
  stats.psnr_f32 = psnr(std::span<const float>(data.targets), std::span<const float>(preds));

  for (float& v : model.values) v = cast_f16(v);
  std::vector<float> preds16 = forward(model, std::span<const float>(data.coords));
  for (float& v : preds16) v = static_cast<float>(quantize_u8(v)) / 255.0f;
  stats.psnr_f16 = psnr(std::span<const float>(data.targets), std::span<const float>(preds16));

  stats.bpp = casted_bpp(effective, data.pixel_count()).bpp;
  return stats;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

// Full-batch Adam on the masked parameters. Gates must be exactly 0 or 1;
// gradients are multiplied by the mask every step, so zeroed entries have
// zero moments and stay exactly 0.
inline TrainResult run_masked(const SirenConfig& arch, std::vector<float> params,
                              std::vector<float> mask, const PixelDataset& data, int steps,
                              double step_size, int eval_every, double feasibility_target,
                              int step_offset, double wall_offset_ms) {
  if (params.size() != param_count(arch) || mask.size() != params.size()) {
    throw std::invalid_argument("train: parameter/mask shape mismatch");
  }
  if (steps < 1 || eval_every < 1) throw std::invalid_argument("train: bad step counts");
  for (const float g : mask) {
    if (g != 0.0f && g != 1.0f) throw std::invalid_argument("train: mask must be 0/1");
  }

  MetricsLog log;
  const auto start = std::chrono::steady_clock::now();
  const auto record_at = [&](int step) {
    const EvalStats stats = eval_effective(arch, std::span<const float>(params), data);
    MetricsRecord rec;
    rec.step = step_offset + step;
    rec.loss = stats.loss;
    rec.psnr_f32 = stats.psnr_f32;
    rec.psnr_f16 = stats.psnr_f16;
    rec.bpp = stats.bpp;
    rec.expected_bpp = stats.bpp;
    rec.lambda = 0.0;
    rec.feasible = feasibility_target <= 0.0 || stats.bpp <= feasibility_target;
    rec.wall_ms = wall_offset_ms + elapsed_ms(start);
    log.add(rec);
  };

  record_at(0);
  Adam<float> opt(params.size(), static_cast<float>(step_size));
  SirenParams<float> view{arch, {}};
  SirenWorkspace<float> ws;
  for (int t = 1; t <= steps; ++t) {
    view.values = params;
    LossGrad<float> lg = loss_and_grad(view, std::span<const float>(data.coords),
                                       std::span<const float>(data.targets), &ws);
    for (std::size_t i = 0; i < lg.grad.size(); ++i) lg.grad[i] *= mask[i];
    opt.step(std::span<float>(params), std::span<const float>(lg.grad));
    if (t % eval_every == 0) record_at(t);
  }
  return {TrainedModel{arch, std::move(params), std::move(mask)}, std::move(log)};
}

}  // namespace detail

// Dense baseline: full-batch Adam on the reconstruction loss, gates pinned
// at 1. target_bpp, if set, only drives the feasible flag in the log.
inline TrainResult train_coin(const TrainConfig& cfg, const PixelDataset& data) {
  if (!cfg.arch.valid()) throw std::invalid_argument("train_coin: invalid architecture");
  SirenParams<float> params = init_siren<float>(cfg.arch, cfg.seed, 1.0);
  std::vector<float> ones(params.values.size(), 1.0f);
  return detail::run_masked(cfg.arch, std::move(params.values), std::move(ones), data, cfg.steps,
                            cfg.eta_theta, cfg.eval_every, cfg.target_bpp, 0, 0.0);
}

template <typename T>
struct LagrangianGrad {
  double loss = 0.0;          // reconstruction term at the gate medians
  double expected_bpp = 0.0;  // proxy constraint value
  std::vector<T> grad_magnitudes;
  std::vector<T> grad_psi;
};

// Gradient of L(theta ⊙ median(psi)) + lambda * expected_bpp(psi).
// The loss reaches psi through the medians (zero wherever they saturate);
// the proxy term keeps saturated gates trainable. The proxy never touches
// the magnitudes.
template <typename T>
LagrangianGrad<T> lagrangian_grad(const SirenParams<T>& magnitudes, const GateParams<T>& gates,
                                  double lambda, std::span<const float> coords,
                                  std::span<const float> targets, std::size_t pixel_count,
                                  SirenWorkspace<T>* workspace = nullptr) {
  const std::size_t n = magnitudes.values.size();
  if (gates.psi.size() != n) throw std::invalid_argument("lagrangian_grad: gate count mismatch");

  SirenParams<T> effective{magnitudes.config, std::vector<T>(n)};
  std::vector<T> medians(n);
  std::vector<T> median_grads(n);
  for (std::size_t i = 0; i < n; ++i) {
    medians[i] = gate_median(gates.psi[i], gates.config);
    median_grads[i] = gate_median_grad(gates.psi[i], gates.config);
    effective.values[i] = magnitudes.values[i] * medians[i];
  }

  const LossGrad<T> lg = loss_and_grad(effective, coords, targets, workspace);
  const std::vector<T> proxy_grad = expected_bpp_grad(gates, pixel_count);

  LagrangianGrad<T> out;
  out.loss = lg.loss;
  out.expected_bpp = expected_bpp(gates, pixel_count);
  out.grad_magnitudes.resize(n);
  out.grad_psi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.grad_magnitudes[i] = lg.grad[i] * medians[i];
    out.grad_psi[i] = lg.grad[i] * magnitudes.values[i] * median_grads[i] +
                      static_cast<T>(lambda) * proxy_grad[i];
  }
  return out;
}

struct LoonieState {
  SirenParams<float> magnitudes;
  GateParams<float> gates;
  Adam<float> magnitude_opt;
  Adam<float> psi_opt;
  DualAscent dual;
  double target_bpp = 0.0;
  std::size_t pixel_count = 0;
  int step = 0;
  double last_loss = 0.0;
  double last_violation = 0.0;
  SirenWorkspace<float> workspace;
};

inline std::vector<float> effective_params(const LoonieState& st) {
  std::vector<float> out(st.magnitudes.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = st.magnitudes.values[i] * gate_median(st.gates.psi[i], st.gates.config);
  }
  return out;
}

namespace detail {
// Stream for gate initialization, derived from the run seed.
constexpr std::uint64_t kGateSeedSalt = 0x9e3779b97f4a7c15ull;
}  // namespace detail

// Magnitudes at twice the dense scale (the gates start at median 1/2), gate
// log-locations from Normal(0, 0.01^2) so the initial medians sit at 1/2.
inline LoonieState init_loonie(const TrainConfig& cfg, std::size_t pixel_count) {
  if (!cfg.arch.valid()) throw std::invalid_argument("train_loonie: invalid architecture");
  if (cfg.target_bpp <= 0.0) throw std::invalid_argument("train_loonie: target_bpp required");
  if (cfg.target_bpp >= arch_bpp(cfg.arch, 16, pixel_count)) {
    throw std::invalid_argument("train_loonie: target at or above the dense BPP is vacuous");
  }
  SirenParams<float> magnitudes = init_siren<float>(cfg.arch, cfg.seed, 2.0);
  const std::size_t n = magnitudes.values.size();

  GateParams<float> gates;
  gates.psi.resize(n);
  Rng rng(cfg.seed ^ detail::kGateSeedSalt);
  for (std::size_t i = 0; i < n; ++i) gates.psi[i] = static_cast<float>(rng.normal(0.0, 0.01));

  return LoonieState{std::move(magnitudes),
                     std::move(gates),
                     Adam<float>(n, static_cast<float>(cfg.eta_theta)),
                     Adam<float>(n, static_cast<float>(cfg.eta_psi)),
                     DualAscent(cfg.eta_dual, cfg.restarts_enabled),
                     cfg.target_bpp,
                     pixel_count};
}

// One simultaneous primal-dual step:
//   1) primal gradients at the current iterate (loss through the medians,
//      plus lambda times the expected-BPP proxy into psi only)
//   2) Adam updates on magnitudes and psi
//   3) exact violation = half-cast BPP of the post-update gated model - tau
//   4) dual ascent on that violation, with restarts
inline void loonie_step(LoonieState& st, const PixelDataset& data) {
  const LagrangianGrad<float> lg =
      lagrangian_grad<float>(st.magnitudes, st.gates, st.dual.multiplier(),
                             std::span<const float>(data.coords),
                             std::span<const float>(data.targets), st.pixel_count,
                             &st.workspace);
  st.magnitude_opt.step(std::span<float>(st.magnitudes.values),
                        std::span<const float>(lg.grad_magnitudes));
  st.psi_opt.step(std::span<float>(st.gates.psi), std::span<const float>(lg.grad_psi));

  const std::vector<float> effective = effective_params(st);
  st.last_violation =
      casted_bpp(std::span<const float>(effective), st.pixel_count).bpp - st.target_bpp;
  st.dual.step(st.last_violation);
  st.last_loss = lg.loss;
  ++st.step;
}

inline TrainResult train_loonie(const TrainConfig& cfg, const PixelDataset& data) {
  if (cfg.steps < 1 || cfg.eval_every < 1) throw std::invalid_argument("train_loonie: bad step counts");
  LoonieState st = init_loonie(cfg, data.pixel_count());

  MetricsLog log;
  const auto start = std::chrono::steady_clock::now();
  const auto record_at = [&](int step) {
    const std::vector<float> effective = effective_params(st);
    const detail::EvalStats stats =
        detail::eval_effective(cfg.arch, std::span<const float>(effective), data);
    MetricsRecord rec;
    rec.step = step;
    rec.loss = stats.loss;
    rec.psnr_f32 = stats.psnr_f32;
    rec.psnr_f16 = stats.psnr_f16;
    rec.bpp = stats.bpp;
    rec.expected_bpp = expected_bpp(st.gates, st.pixel_count);
    rec.lambda = st.dual.multiplier();
    rec.feasible = stats.bpp <= st.target_bpp;
    rec.wall_ms = detail::elapsed_ms(start);
    log.add(rec);
  };

  record_at(0);
  for (int t = 1; t <= cfg.steps; ++t) {
    loonie_step(st, data);
    if (t % cfg.eval_every == 0) record_at(t);
  }

  TrainedModel model{cfg.arch, std::move(st.magnitudes.values), gate_medians(st.gates)};
  return {std::move(model), std::move(log)};
}

// Keep-largest-|value| pruning. The first and last layers stay dense; the
// remaining budget spreads across every hidden weight matrix and bias vector
// at one keep fraction, floored per tensor, ties broken by lower flat index.
inline TrainedModel magnitude_prune(const TrainedModel& model, double target_bpp,
                                    std::size_t pixel_count) {
  const auto shapes = layer_shapes(model.arch);
  const std::size_t total = param_count(model.arch);
  if (model.magnitudes.size() != total || model.gates.size() != total) {
    throw std::invalid_argument("magnitude_prune: inconsistent model");
  }
  for (const float g : model.gates) {
    if (g != 1.0f) throw std::invalid_argument("magnitude_prune: model must be dense");
  }
  if (pixel_count == 0 || target_bpp <= 0.0) {
    throw std::invalid_argument("magnitude_prune: bad budget");
  }

  const std::size_t keep_budget =
      static_cast<std::size_t>(std::floor(target_bpp * static_cast<double>(pixel_count) / 16.0));
  const std::size_t first_count = shapes.front().end() - shapes.front().weight_offset;
  const std::size_t last_count = shapes.back().end() - shapes.back().weight_offset;
  const std::size_t dense_ends = first_count + last_count;
  if (keep_budget < dense_ends) {
    throw std::invalid_argument("magnitude_prune: budget below the dense first and last layers");
  }

  std::vector<float> mask(total, 1.0f);
  const std::size_t prunable_total = total - dense_ends;
  if (prunable_total > 0) {
    const double keep_fraction =
        static_cast<double>(keep_budget - dense_ends) / static_cast<double>(prunable_total);
    const auto prune_tensor = [&](std::size_t offset, std::size_t size) {
      const std::size_t keep = std::min(
          size, static_cast<std::size_t>(std::floor(keep_fraction * static_cast<double>(size))));
      if (keep >= size) return;
      std::vector<std::size_t> order(size);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const float ma = std::fabs(model.magnitudes[offset + a]);
        const float mb = std::fabs(model.magnitudes[offset + b]);
        if (ma != mb) return ma > mb;
        return a < b;
      });
      for (std::size_t k = keep; k < size; ++k) mask[offset + order[k]] = 0.0f;
    };
    for (std::size_t l = 1; l + 1 < shapes.size(); ++l) {
      const LayerShape& sh = shapes[l];
      prune_tensor(sh.weight_offset, static_cast<std::size_t>(sh.in) * sh.out);
      prune_tensor(sh.bias_offset, static_cast<std::size_t>(sh.out));
    }
  }
  return TrainedModel{model.arch, model.magnitudes, std::move(mask)};
}

// Adam on the surviving parameters only; masked entries stay exactly 0.
inline TrainResult finetune(const TrainedModel& model, const PixelDataset& data,
                            const TrainConfig& cfg, int step_offset = 0,
                            double wall_offset_ms = 0.0) {
  return detail::run_masked(model.arch, model.effective(), model.gates, data, cfg.steps,
                            cfg.eta_theta, cfg.eval_every, cfg.target_bpp, step_offset,
                            wall_offset_ms);
}

// Dense training, pruning to the budget, then fine-tuning for the same
// number of steps. The log covers both phases; steps in the second phase are
// offset by cfg.steps, starting with the immediately-after-pruning state.
inline TrainResult train_mp(const TrainConfig& cfg, const PixelDataset& data) {
  if (cfg.target_bpp <= 0.0) throw std::invalid_argument("train_mp: target_bpp required");
  TrainResult dense = train_coin(cfg, data);
  const TrainedModel pruned = magnitude_prune(dense.model, cfg.target_bpp, data.pixel_count());
  const double wall_off = dense.log.records.empty() ? 0.0 : dense.log.records.back().wall_ms;
  TrainResult tuned = finetune(pruned, data, cfg, cfg.steps, wall_off);

  MetricsLog merged;
  for (const MetricsRecord& r : dense.log.records) merged.add(r);
  for (const MetricsRecord& r : tuned.log.records) merged.add(r);
  return {std::move(tuned.model), std::move(merged)};
}

inline TrainResult train(const TrainConfig& cfg, const PixelDataset& data) {
  switch (cfg.method) {
    case Method::coin: return train_coin(cfg, data);
    case Method::loonie: return train_loonie(cfg, data);
    case Method::mp: return train_mp(cfg, data);
  }
  throw std::invalid_argument("train: unknown method");
}

}  // namespace loonie
