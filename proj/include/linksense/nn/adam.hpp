// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "linksense/nn/tensor.hpp"

namespace linksense::nn {

// Training hyperparameters. Joint (agent) training defaults: loss weights
// 0.1/0.1, discount 0.9, lr 1e-4, batch 128; the classifier-only baselines
// default to lr 1e-3 with a 200-epoch cap.
struct HyperParams {
  double lambda1 = 0.1;   // REINFORCE term weight inside the agent loss
  double lambda2 = 0.1;   // agent loss weight inside the overall loss
  double discount = 0.9;  // psi
  double lr = 1e-4;       // alpha
  int batch_size = 128;   // n; also the Monte-Carlo sample count K
  double epsilon = 1e-8;
  int epochs = 30;
  double beta1 = 0.9;
  double beta2 = 0.999;

  void validate() const {
    if (discount < 0.0 || discount > 1.0)
      throw ConfigError("discount must be in [0,1]");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (lambda1 < 0.0 || lambda2 < 0.0)
      throw ConfigError("loss weights must be non-negative");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
  }

  static HyperParams joint_defaults() { return HyperParams{}; }
  static HyperParams supervised_defaults() {
    HyperParams h;
    h.lr = 1e-3;
    h.epochs = 200;
    return h;
  }
};

// One bias-corrected Adam update over a parameter set. Gradients are
// validated (NaN/Inf aborts before any state is touched) and zeroed after
// the step.
template <typename T>
void adam_step(const std::vector<Param<T>*>& params, int& step_counter,
               const HyperParams& hp) {
  for (Param<T>* p : params) {
    for (const T g : p->grad.data) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw NumericError("adam_step: non-finite gradient in " + p->name);
      }
    }
  }
  const int t = ++step_counter;
  const double bc1 = 1.0 - std::pow(hp.beta1, t);
  const double bc2 = 1.0 - std::pow(hp.beta2, t);
  for (Param<T>* p : params) {
    T* value = p->value.ptr();
    T* grad = p->grad.ptr();
    T* m = p->m.ptr();
    T* v = p->v.ptr();
    const std::size_t n = p->value.data.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = static_cast<double>(grad[i]);
      const double mi = hp.beta1 * static_cast<double>(m[i]) + (1.0 - hp.beta1) * g;
      const double vi = hp.beta2 * static_cast<double>(v[i]) + (1.0 - hp.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double m_hat = mi / bc1;
      const double v_hat = vi / bc2;
      value[i] = static_cast<T>(static_cast<double>(value[i]) -
                                hp.lr * m_hat / (std::sqrt(v_hat) + hp.epsilon));
      grad[i] = T(0);
    }
  }
}

}  // namespace linksense::nn
