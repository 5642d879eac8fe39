// SPDX-License-Identifier: Apache-2.0
#include "linksense/agent/agent.hpp"

#include <algorithm>

#include "linksense/classifier/classifier.hpp"

namespace linksense::agent {

LinkGroup select_action(std::span<const double> probs, SelectMode mode,
                        bool single_link, Rng* rng) {
  const std::size_t n = probs.size();
  if (n == 0) throw DomainError("select_action: empty probability vector");
  LinkGroup group;
  group.mask.assign(n, 0);

  auto argmax = [&]() {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (probs[i] > probs[best]) best = i;  // ties keep the lowest index
    }
    return best;
  };

  if (single_link) {
    std::size_t pick;
    if (mode == SelectMode::kGreedy) {
      pick = argmax();
    } else {
      if (!rng) throw DomainError("select_action: sampling requires an RNG");
      const double r = rng->uniform();
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += probs[i];
        if (r < acc) {
          pick = i;
          break;
        }
      }
    }
    group.mask[pick] = 1;
    return group;
  }

  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    bool take;
    if (mode == SelectMode::kGreedy) {
      take = probs[i] >= 0.5;
    } else {
      if (!rng) throw DomainError("select_action: sampling requires an RNG");
      take = rng->bernoulli(probs[i]);
    }
    if (take) {
      group.mask[i] = 1;
      any = true;
    }
  }
  if (!any) group.mask[argmax()] = 1;
  return group;
}

namespace {

// Collects the LSTM layers of the context network for step-wise use.
std::vector<nn::LstmLayer<float>*> lstm_layers(nn::Network<float>& ctx) {
  std::vector<nn::LstmLayer<float>*> out;
  for (std::size_t i = 0; i < ctx.num_layers(); ++i) {
    auto* l = dynamic_cast<nn::LstmLayer<float>*>(ctx.layer(i));
    if (!l) throw ShapeError("context network must contain only LSTM layers");
    out.push_back(l);
  }
  return out;
}

std::vector<const nn::Tensor<float>*> group_images(
    const EpisodeInput& input, int step, const std::vector<std::uint8_t>& mask) {
  std::vector<const nn::Tensor<float>*> imgs;
  const auto& window_images = input.images[static_cast<std::size_t>(step)];
  for (std::size_t l = 0; l < mask.size(); ++l) {
    if (mask[l]) imgs.push_back(&window_images[l]);
  }
  return imgs;
}

}  // namespace

Trajectory run_policy_rollout(AgentNets<float>& nets, const EpisodeInput& input,
                              SelectMode mode, Rng* rng,
                              RolloutRecord<float>* record) {
  const int max_steps = input.max_steps();
  if (max_steps < 1) {
    throw DomainError("run_policy_rollout: sample yields no analysis windows");
  }
  const bool want_caches = record != nullptr;
  const nn::Mode fwd_mode = want_caches ? nn::Mode::kTrain : nn::Mode::kEval;

  auto lstms = lstm_layers(nets.ctx);
  std::vector<nn::LstmLayer<float>::State> states;
  states.reserve(lstms.size());
  for (auto* l : lstms) states.push_back(l->zero_state());

  if (record) {
    record->obs_caches.clear();
    record->ctx_caches.clear();
    record->policy_caches.clear();
  }

  Trajectory traj;
  traj.termination = Trajectory::Termination::kMaxSteps;

  for (int t = 0; t < max_steps; ++t) {
    if (record) {
      record->obs_caches.emplace_back();
      record->ctx_caches.emplace_back(lstms.size());
      record->policy_caches.emplace_back();
    }

    // Observe: conv trunk over the stacked normalized streams.
    nn::Tensor<float> s = nets.obs.forward(
        input.obs_windows[static_cast<std::size_t>(t)], fwd_mode, rng,
        record ? &record->obs_caches.back() : nullptr);

    // Context: one step through each LSTM layer.
    std::vector<float> x(s.data.begin(), s.data.end());
    for (std::size_t li = 0; li < lstms.size(); ++li) {
      nn::LstmStepCache<float>* sc =
          record ? &record->ctx_caches.back()[li] : nullptr;
      lstms[li]->step_forward(x.data(), states[li], sc);
      x = states[li].h;
    }

    // Policy head on the top hidden state.
    nn::Tensor<float> h({static_cast<int>(x.size())});
    h.data = x;
    nn::Tensor<float> u = nets.policy.forward(
        h, fwd_mode, rng, record ? &record->policy_caches.back() : nullptr);

    StepAction step;
    step.probs.assign(u.data.begin(), u.data.end());
    LinkGroup group = select_action(step.probs, mode, nets.single_link, rng);
    step.mask = std::move(group.mask);
    traj.steps.push_back(std::move(step));

    if (t > 0 && traj.steps[static_cast<std::size_t>(t)].mask ==
                     traj.steps[static_cast<std::size_t>(t - 1)].mask) {
      traj.termination = Trajectory::Termination::kStableMask;
      break;
    }
  }
  return traj;
}

EpisodeResult run_episode(AgentNets<float>& nets, nn::Network<float>& cnn,
                          const EpisodeInput& input, nn::Mode mode, Rng* rng,
                          double psi, RolloutRecord<float>* record,
                          std::vector<nn::NetCache<float>>* terminal_caches) {
  const bool train = mode != nn::Mode::kEval;
  EpisodeResult result;
  result.traj = run_policy_rollout(
      nets, input, train ? SelectMode::kSample : SelectMode::kGreedy, rng, record);
  const int steps = result.traj.length();
  result.terminal_step = steps - 1;

  if (train) {
    // Per-step classification feeds the reward; only the terminal step's
    // caches are kept for the classifier backward pass. The prior at t=0 is
    // the uniform distribution.
    std::vector<double> p_prev(classifier::kClasses, 1.0 / classifier::kClasses);
    for (int t = 0; t < steps; ++t) {
      auto imgs = group_images(input, t, result.traj.steps[static_cast<std::size_t>(t)].mask);
      const bool last = t == steps - 1;
      std::vector<double> p = classifier::predict_group<float>(
          cnn, imgs, nn::Mode::kTrain, rng, last ? terminal_caches : nullptr);
      result.traj.rewards.push_back(reward(p, p_prev, input.gt));
      p_prev = p;
      result.traj.class_probs.push_back(std::move(p));
    }
    result.traj.returns = discounted_returns(result.traj.rewards, psi);
    result.final_p = result.traj.class_probs.back();
  } else {
    auto imgs = group_images(input, result.terminal_step,
                             result.traj.final_mask());
    result.final_p = classifier::predict_group<float>(cnn, imgs, nn::Mode::kEval,
                                                      nullptr, nullptr);
  }
  return result;
}

void rollout_backward(AgentNets<float>& nets, const RolloutRecord<float>& record,
                      std::span<const std::vector<double>> d_probs) {
  const int steps = static_cast<int>(record.policy_caches.size());
  if (static_cast<int>(d_probs.size()) != steps) {
    throw ShapeError("rollout_backward: gradient count does not match steps");
  }
  auto lstms = lstm_layers(nets.ctx);
  const std::size_t n_layers = lstms.size();

  // Recurrent carries per LSTM layer.
  std::vector<std::vector<float>> d_h(n_layers);
  std::vector<std::vector<float>> d_c(n_layers);
  for (std::size_t li = 0; li < n_layers; ++li) {
    d_h[li].assign(static_cast<std::size_t>(lstms[li]->hidden()), 0.0f);
    d_c[li].assign(static_cast<std::size_t>(lstms[li]->hidden()), 0.0f);
  }

  for (int t = steps - 1; t >= 0; --t) {
    // Policy head backward.
    nn::Tensor<float> d_u({static_cast<int>(d_probs[static_cast<std::size_t>(t)].size())});
    for (std::size_t i = 0; i < d_u.data.size(); ++i) {
      d_u.data[i] = static_cast<float>(d_probs[static_cast<std::size_t>(t)][i]);
    }
    nn::Tensor<float> d_h_top = nets.policy.backward(
        d_u, record.policy_caches[static_cast<std::size_t>(t)]);

    // Context BPTT, top layer downward.
    std::vector<float> d_from_above(d_h_top.data.begin(), d_h_top.data.end());
    for (std::size_t li = n_layers; li-- > 0;) {
      std::vector<float> total(d_from_above.size());
      for (std::size_t i = 0; i < total.size(); ++i) {
        total[i] = d_from_above[i] + d_h[li][i];
      }
      std::fill(d_h[li].begin(), d_h[li].end(), 0.0f);
      std::vector<float> d_x(static_cast<std::size_t>(lstms[li]->input_size()), 0.0f);
      lstms[li]->step_backward(record.ctx_caches[static_cast<std::size_t>(t)][li],
                               total.data(), d_c[li], d_x.data(), d_h[li].data());
      d_from_above = std::move(d_x);
    }

    // Observation trunk backward on this step's cache.
    const std::vector<int> obs_out_shape = nets.obs.output_shape();
    nn::Tensor<float> d_s(obs_out_shape);
    if (d_s.data.size() != d_from_above.size()) {
      throw ShapeError("rollout_backward: observation gradient size mismatch");
    }
    std::copy(d_from_above.begin(), d_from_above.end(), d_s.data.begin());
    (void)nets.obs.backward(d_s, record.obs_caches[static_cast<std::size_t>(t)]);
  }
}

}  // namespace linksense::agent
