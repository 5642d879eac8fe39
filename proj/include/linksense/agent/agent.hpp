// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "linksense/agent/losses.hpp"
#include "linksense/nn/architectures.hpp"
#include "linksense/nn/network.hpp"

namespace linksense::agent {

enum class SelectMode { kSample, kGreedy };

// A link subset; the selection rules guarantee at least one member.
struct LinkGroup {
  std::vector<std::uint8_t> mask;

  int count() const {
    int n = 0;
    for (auto b : mask) n += b ? 1 : 0;
    return n;
  }
};

// Subset policy: independent Bernoulli draws (sample) or a 0.5 threshold
// (greedy). Single-link policy: categorical draw or argmax. An empty subset
// falls back to the single highest-probability link, ties to the lowest
// index.
LinkGroup select_action(std::span<const double> probs, SelectMode mode,
                        bool single_link, Rng* rng);

// The agent's three networks: observation trunk (Conv1D stack + pool),
// context stack (three 128-wide LSTMs) and the per-link policy head.
template <typename T>
struct AgentNets {
  nn::Network<T> obs;
  nn::Network<T> ctx;
  nn::Network<T> policy;
  bool single_link = false;
  int num_links = 0;
  int state_size = 0;  // flattened observation feature size

  std::vector<nn::Param<T>*> params() {
    std::vector<nn::Param<T>*> out;
    for (auto* p : obs.params()) out.push_back(p);
    for (auto* p : ctx.params()) out.push_back(p);
    for (auto* p : policy.params()) out.push_back(p);
    return out;
  }

  void zero_grads() {
    obs.zero_grads();
    ctx.zero_grads();
    policy.zero_grads();
  }
};

template <typename T>
AgentNets<T> build_agent_nets(int num_links, int window, bool single_link,
                              std::uint64_t init_seed) {
  AgentNets<T> nets;
  nets.num_links = num_links;
  nets.single_link = single_link;
  nets.obs = nn::build_observation_net<T>(2 * num_links, window, "agent.obs",
                                          init_seed);
  const std::vector<int> obs_out = nets.obs.output_shape();
  nets.state_size = obs_out[0] * obs_out[1];
  nets.ctx = nn::build_context_net<T>(nets.state_size, "agent.ctx", init_seed);
  nets.policy = nn::build_policy_head<T>(num_links, single_link, "agent.policy",
                                         init_seed);
  return nets;
}

// Per-sample input to an episode: one observation tensor per window
// ([2L][T_w], all links stacked) and one [2][R][R] image per (window, link).
struct EpisodeInput {
  std::span<const nn::Tensor<float>> obs_windows;
  std::span<const std::vector<nn::Tensor<float>>> images;  // [window][link]
  int gt = 0;

  int max_steps() const { return static_cast<int>(obs_windows.size()); }
};

struct Trajectory {
  enum class Termination { kStableMask, kMaxSteps };

  std::vector<StepAction> steps;                 // probs + selected mask
  std::vector<std::vector<double>> class_probs;  // p_t per step (train mode)
  std::vector<double> rewards;
  std::vector<double> returns;
  Termination termination = Termination::kMaxSteps;

  int length() const { return static_cast<int>(steps.size()); }
  const std::vector<std::uint8_t>& final_mask() const { return steps.back().mask; }
};

// Forward caches of one episode, retained for backpropagation through time.
template <typename T>
struct RolloutRecord {
  std::vector<nn::NetCache<T>> obs_caches;                     // per step
  std::vector<std::vector<nn::LstmStepCache<T>>> ctx_caches;   // [step][layer]
  std::vector<nn::NetCache<T>> policy_caches;                  // per step
};

// Runs the policy over the windows: observe -> context step -> policy ->
// select, terminating on two consecutive identical masks or at the last
// window. Classification is not involved; rewards are filled by
// run_episode.
Trajectory run_policy_rollout(AgentNets<float>& nets, const EpisodeInput& input,
                              SelectMode mode, Rng* rng,
                              RolloutRecord<float>* record);

struct EpisodeResult {
  Trajectory traj;
  std::vector<double> final_p;  // prediction at termination
  int terminal_step = 0;
};

// Full episode. Train mode samples actions and classifies the selected
// group at every step (the reward needs p_t); eval mode is greedy and
// classifies only at termination. terminal_caches, when given, receive the
// classifier caches of the terminal step's member links, in mask order.
EpisodeResult run_episode(AgentNets<float>& nets, nn::Network<float>& cnn,
                          const EpisodeInput& input, nn::Mode mode, Rng* rng,
                          double psi, RolloutRecord<float>* record,
                          std::vector<nn::NetCache<float>>* terminal_caches);

// Backpropagates per-step policy-output gradients (dL/du, already combining
// the REINFORCE and action-BCE terms) through policy head, context LSTMs and
// observation trunk, accumulating into the agent parameters.
void rollout_backward(AgentNets<float>& nets, const RolloutRecord<float>& record,
                      std::span<const std::vector<double>> d_probs);

}  // namespace linksense::agent
