// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace linksense::agent {

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

double clamp_prob(double p);

// R_t = p_t[gt] - p_{t-1}[gt]. At t=0 the caller passes the uniform prior
// 1/C as p_prev.
double reward(std::span<const double> p_t, std::span<const double> p_prev, int gt);

// G_t = sum_{k=0..t} psi^k R_{t-k}: a recency-discounted accumulation of
// the rewards collected so far. The conventional forward-looking return is
// available for ablation.
enum class ReturnsMode { kTrailing, kForward };
std::vector<double> discounted_returns(std::span<const double> rewards, double psi,
                                       ReturnsMode mode = ReturnsMode::kTrailing);

// log pi of a link subset under independent per-link inclusion
// probabilities: sum_xi mask*log(u) + (1-mask)*log(1-u).
double log_prob_subset(std::span<const double> probs,
                       std::span<const std::uint8_t> mask);

// log pi of a single-link action under a softmax distribution.
double log_prob_single(std::span<const double> probs, int link);

// One step's (probs, mask) pair as recorded by an episode.
struct StepAction {
  std::vector<double> probs;
  std::vector<std::uint8_t> mask;
};

struct TrajectoryView {
  std::span<const StepAction> steps;
  std::span<const double> returns;
  bool single_link = false;
};

// L_J ~= -(1/K) sum_k sum_t log pi(u_{t,k}) G_{t,k}.
double reinforce_loss(std::span<const TrajectoryView> batch);

// d L_J / d u for one step of one trajectory inside a batch of size K;
// subset (independent Bernoulli) factorization.
std::vector<double> reinforce_loss_grad_step(const StepAction& step, double g_t,
                                             std::size_t batch_size,
                                             bool single_link);

// L_U = -(1/L) sum_xi sum_t [u_hat log u + (1-u_hat) log(1-u)] for one
// sample; the true mask is constant over steps.
double action_bce_loss(std::span<const StepAction> steps,
                       std::span<const std::uint8_t> true_mask);

// d L_U / d u for one step (caller divides by the batch size when
// averaging across samples).
std::vector<double> action_bce_grad_step(const StepAction& step,
                                         std::span<const std::uint8_t> true_mask);

// L_agent = lambda1 * L_J + L_U.
double agent_loss(double l_j, double l_u, double lambda1);

}  // namespace linksense::agent
