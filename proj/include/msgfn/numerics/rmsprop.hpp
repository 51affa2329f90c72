#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "msgfn/numerics/params.hpp"

namespace msgfn {

struct RmsPropConfig {
  double alpha = 0.99;
  double eps = 1e-8;
  /// Global-norm clip; <= 0 disables.
  double clip_norm = 0.0;
};

inline double global_norm(const Gradients& grads) {
  double s = 0.0;
  for (const auto& g : grads)
    for (double v : g.values()) s += v * v;
  return std::sqrt(s);
}

/// s <- alpha s + (1 - alpha) g^2;  p <- p - lr g / (sqrt(s) + eps).
/// lr_for(parameter) picks the rate, so policy and flow weights can differ.
inline void rmsprop_step(ParamStore& params, const Gradients& grads,
                         const std::function<double(const Parameter&)>& lr_for,
                         const RmsPropConfig& cfg = {}) {
  if (grads.size() != params.size()) throw DimensionError("rmsprop: gradient store mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads[i].all_finite())
      throw NonFiniteError("rmsprop: non-finite gradient for parameter " + params[i].name);
    if (grads[i].size() != params[i].value.size())
      throw DimensionError("rmsprop: gradient shape mismatch for " + params[i].name);
  }
  double clip = 1.0;
  if (cfg.clip_norm > 0) {
    const double norm = global_norm(grads);
    if (norm > cfg.clip_norm) clip = cfg.clip_norm / norm;
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    const double lr = lr_for(p);
    if (!(lr > 0)) throw std::invalid_argument("rmsprop: learning rate must be positive");
    auto value = p.value.values();
    auto acc = p.accumulator.values();
    auto g = grads[i].values();
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double gk = g[k] * clip;
      acc[k] = cfg.alpha * acc[k] + (1.0 - cfg.alpha) * gk * gk;
      value[k] -= lr * gk / (std::sqrt(acc[k]) + cfg.eps);
    }
  }
}

inline void rmsprop_step(ParamStore& params, const Gradients& grads, double lr,
                         const RmsPropConfig& cfg = {}) {
  rmsprop_step(params, grads, [lr](const Parameter&) { return lr; }, cfg);
}

}  // namespace msgfn
