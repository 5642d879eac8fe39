// SPDX-License-Identifier: Apache-2.0
#include "linksense/agent/losses.hpp"

#include <algorithm>
#include <cmath>

#include "linksense/common.hpp"

namespace linksense::agent {

double clamp_prob(double p) {
  return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

double reward(std::span<const double> p_t, std::span<const double> p_prev, int gt) {
  if (gt < 0 || gt >= static_cast<int>(p_t.size()) || p_prev.size() != p_t.size()) {
    throw DomainError("reward: ground-truth class " + std::to_string(gt) +
                      " out of range for " + std::to_string(p_t.size()) +
                      " classes");
  }
  return p_t[static_cast<std::size_t>(gt)] - p_prev[static_cast<std::size_t>(gt)];
}

std::vector<double> discounted_returns(std::span<const double> rewards, double psi,
                                       ReturnsMode mode) {
  if (psi < 0.0 || psi > 1.0) {
    throw DomainError("discounted_returns: psi must be in [0,1]");
  }
  const std::size_t n = rewards.size();
  std::vector<double> g(n, 0.0);
  if (n == 0) return g;
  if (mode == ReturnsMode::kTrailing) {
    // G_t = R_t + psi * G_{t-1}
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc = rewards[t] + psi * acc;
      g[t] = acc;
    }
  } else {
    double acc = 0.0;
    for (std::size_t t = n; t-- > 0;) {
      acc = rewards[t] + psi * acc;
      g[t] = acc;
    }
  }
  return g;
}

double log_prob_subset(std::span<const double> probs,
                       std::span<const std::uint8_t> mask) {
  if (probs.size() != mask.size()) {
    throw DomainError("log_prob_subset: probs/mask length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double u = clamp_prob(probs[i]);
    acc += mask[i] ? std::log(u) : std::log(1.0 - u);
  }
  return acc;
}

double log_prob_single(std::span<const double> probs, int link) {
  if (link < 0 || link >= static_cast<int>(probs.size())) {
    throw DomainError("log_prob_single: link index out of range");
  }
  return std::log(clamp_prob(probs[static_cast<std::size_t>(link)]));
}

namespace {

int single_link_index(const StepAction& step) {
  int chosen = -1;
  for (std::size_t i = 0; i < step.mask.size(); ++i) {
    if (step.mask[i]) {
      if (chosen >= 0) {
        throw DomainError("single-link trajectory step has multiple links set");
      }
      chosen = static_cast<int>(i);
    }
  }
  if (chosen < 0) throw DomainError("trajectory step has an empty mask");
  return chosen;
}

}  // namespace

double reinforce_loss(std::span<const TrajectoryView> batch) {
  if (batch.empty()) throw DomainError("reinforce_loss: empty batch");
  double acc = 0.0;
  for (const TrajectoryView& traj : batch) {
    if (traj.steps.size() != traj.returns.size()) {
      throw DomainError("reinforce_loss: steps/returns length mismatch");
    }
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const double lp =
          traj.single_link
              ? log_prob_single(traj.steps[t].probs, single_link_index(traj.steps[t]))
              : log_prob_subset(traj.steps[t].probs, traj.steps[t].mask);
      acc += lp * traj.returns[t];
    }
  }
  return -acc / static_cast<double>(batch.size());
}

std::vector<double> reinforce_loss_grad_step(const StepAction& step, double g_t,
                                             std::size_t batch_size,
                                             bool single_link) {
  const double scale = -g_t / static_cast<double>(batch_size);
  std::vector<double> grad(step.probs.size(), 0.0);
  if (single_link) {
    const int chosen = single_link_index(step);
    grad[static_cast<std::size_t>(chosen)] =
        scale / clamp_prob(step.probs[static_cast<std::size_t>(chosen)]);
    return grad;
  }
  for (std::size_t i = 0; i < step.probs.size(); ++i) {
    const double u = clamp_prob(step.probs[i]);
    grad[i] = step.mask[i] ? scale / u : -scale / (1.0 - u);
  }
  return grad;
}

double action_bce_loss(std::span<const StepAction> steps,
                       std::span<const std::uint8_t> true_mask) {
  if (steps.empty()) throw DomainError("action_bce_loss: no steps");
  const std::size_t links = true_mask.size();
  double acc = 0.0;
  for (const StepAction& step : steps) {
    if (step.probs.size() != links) {
      throw DomainError("action_bce_loss: probs/true mask length mismatch");
    }
    for (std::size_t i = 0; i < links; ++i) {
      const double u = clamp_prob(step.probs[i]);
      acc += true_mask[i] ? std::log(u) : std::log(1.0 - u);
    }
  }
  return -acc / static_cast<double>(links);
}

std::vector<double> action_bce_grad_step(const StepAction& step,
                                         std::span<const std::uint8_t> true_mask) {
  const std::size_t links = true_mask.size();
  if (step.probs.size() != links) {
    throw DomainError("action_bce_grad_step: probs/true mask length mismatch");
  }
  std::vector<double> grad(links, 0.0);
  for (std::size_t i = 0; i < links; ++i) {
    const double u = clamp_prob(step.probs[i]);
    grad[i] = true_mask[i] ? -1.0 / (static_cast<double>(links) * u)
                           : 1.0 / (static_cast<double>(links) * (1.0 - u));
  }
  return grad;
}

double agent_loss(double l_j, double l_u, double lambda1) {
  if (lambda1 < 0.0) throw DomainError("agent_loss: lambda1 must be >= 0");
  return lambda1 * l_j + l_u;
}

}  // namespace linksense::agent
