// SPDX-License-Identifier: Apache-2.0
#include "linksense/harness/train.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "linksense/classifier/classifier.hpp"
#include "linksense/nn/adam.hpp"
#include "linksense/nn/checkpoint.hpp"
#include "linksense/parallel.hpp"

namespace linksense::harness {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kGradChunks = 4;
constexpr std::uint64_t kEpisodeRngTag = 0xe9150de5ULL;
constexpr std::uint64_t kShuffleTag = 0x511ff1e5ULL;
constexpr std::uint64_t kCase4Tag = 0xad0c4000ULL;
constexpr std::uint64_t kValTag = 0x7a11da7aULL;
constexpr std::uint64_t kAgentInitTag = 0xa6e97a11ULL;
constexpr std::uint64_t kCnnInitTag = 0xc1a551f1ULL;

int argmax(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

struct LossAccum {
  double lp = 0.0, lj = 0.0, lu = 0.0;
  int correct = 0;
  int count = 0;

  void merge(const LossAccum& other) {
    lp += other.lp;
    lj += other.lj;
    lu += other.lu;
    correct += other.correct;
    count += other.count;
  }
};

// Worker-side copy of the trainable networks.
struct Replica {
  std::optional<agent::AgentNets<float>> agent;
  nn::Network<float> cnn;
  LossAccum losses;

  void zero_grads() {
    if (agent) agent->zero_grads();
    cnn.zero_grads();
  }
};

std::vector<nn::Param<float>*> model_params(std::optional<agent::AgentNets<float>>& agent,
                                            nn::Network<float>& cnn) {
  std::vector<nn::Param<float>*> out;
  if (agent) {
    for (auto* p : agent->params()) out.push_back(p);
  }
  for (auto* p : cnn.params()) out.push_back(p);
  return out;
}

void sync_replica(Replica& replica, Replica& master) {
  if (master.agent) {
    nn::copy_params(replica.agent->obs, master.agent->obs);
    nn::copy_params(replica.agent->ctx, master.agent->ctx);
    nn::copy_params(replica.agent->policy, master.agent->policy);
  }
  nn::copy_params(replica.cnn, master.cnn);
  replica.zero_grads();
  replica.losses = LossAccum{};
}

void reduce_replica(Replica& master, Replica& replica) {
  if (master.agent) {
    nn::accumulate_grads(master.agent->obs, replica.agent->obs);
    nn::accumulate_grads(master.agent->ctx, replica.agent->ctx);
    nn::accumulate_grads(master.agent->policy, replica.agent->policy);
  }
  nn::accumulate_grads(master.cnn, replica.cnn);
  master.losses.merge(replica.losses);
}

Replica build_replica(const HarnessConfig& config, const FeatureSet& features,
                      int case_id, int cnn_id, std::uint64_t seed) {
  Replica r;
  if (case_uses_agent(case_id)) {
    r.agent = agent::build_agent_nets<float>(
        features.num_links, features.window_len,
        case_policy(case_id) == LinkPolicy::kAgentSingle,
        mix_seed(seed, kAgentInitTag, static_cast<std::uint64_t>(case_id)));
  }
  r.cnn = nn::build_network<float>(
      nn::cnn_arch(cnn_id), {2, config.image_side, config.image_side}, "classifier",
      mix_seed(seed, kCnnInitTag, static_cast<std::uint64_t>(cnn_id)));
  return r;
}

// One joint-training sample: episode, losses, gradients into the replica.
void joint_sample_pass(Replica& r, const HarnessConfig& config,
                       const SampleFeatures& sf, std::uint64_t episode_seed,
                       std::size_t batch_size, const nn::HyperParams& hp) {
  Rng rng(episode_seed);
  const agent::EpisodeInput input = sf.episode_input();
  agent::RolloutRecord<float> record;
  std::vector<nn::NetCache<float>> terminal_caches;
  agent::EpisodeResult ep =
      agent::run_episode(*r.agent, r.cnn, input, nn::Mode::kTrain, &rng,
                         hp.discount, &record, &terminal_caches);
  // Returns per the configured accumulation mode.
  ep.traj.returns = agent::discounted_returns(ep.traj.rewards, hp.discount,
                                              config.returns_mode);

  const std::size_t steps = ep.traj.steps.size();
  const bool single = r.agent->single_link;

  // Policy-output gradients: lambda2 * (lambda1 * d L_J + d L_U / K).
  std::vector<std::vector<double>> d_probs(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto d_j = agent::reinforce_loss_grad_step(
        ep.traj.steps[t], ep.traj.returns[t], batch_size, single);
    const auto d_u = agent::action_bce_grad_step(ep.traj.steps[t], sf.informative);
    std::vector<double> d(d_j.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] = config.lambda2 *
             (config.lambda1 * d_j[i] + d_u[i] / static_cast<double>(batch_size));
    }
    d_probs[t] = std::move(d);
  }
  agent::rollout_backward(*r.agent, record, d_probs);

  // Classifier gradient from the terminal prediction.
  const std::vector<double> d_mean =
      classifier::classification_loss_grad(ep.final_p, input.gt);
  const auto& final_mask = ep.traj.final_mask();
  int omega = 0;
  for (auto b : final_mask) omega += b ? 1 : 0;
  nn::Tensor<float> d_link({static_cast<int>(d_mean.size())});
  for (std::size_t i = 0; i < d_mean.size(); ++i) {
    d_link.data[i] = static_cast<float>(
        d_mean[i] / (static_cast<double>(omega) * static_cast<double>(batch_size)));
  }
  for (auto& cache : terminal_caches) {
    (void)r.cnn.backward(d_link, cache);
  }

  // Loss bookkeeping (batch means are formed by the caller).
  // Per-sample REINFORCE term; the caller's mean over the batch matches the
  // 1/K Monte-Carlo estimator.
  std::vector<agent::TrajectoryView> views(1);
  views[0] = agent::TrajectoryView{{ep.traj.steps.data(), steps},
                                   {ep.traj.returns.data(), steps},
                                   single};
  r.losses.lj += agent::reinforce_loss(views);
  r.losses.lu += agent::action_bce_loss(ep.traj.steps, sf.informative);
  r.losses.lp += classifier::classification_loss(ep.final_p, input.gt);
  r.losses.correct += argmax(ep.final_p) == input.gt ? 1 : 0;
  r.losses.count += 1;
}

// One supervised sample (cases 2..4): fixed mask, center window.
void supervised_sample_pass(Replica& r, const SampleFeatures& sf,
                            const std::vector<std::uint8_t>& mask, int window,
                            std::uint64_t dropout_seed, std::size_t batch_size) {
  Rng rng(dropout_seed);
  std::vector<const nn::Tensor<float>*> imgs;
  for (std::size_t l = 0; l < mask.size(); ++l) {
    if (mask[l]) imgs.push_back(&sf.images[static_cast<std::size_t>(window)][l]);
  }
  std::vector<nn::NetCache<float>> caches;
  const std::vector<double> p = classifier::predict_group<float>(
      r.cnn, imgs, nn::Mode::kTrain, &rng, &caches);
  const int gt = static_cast<int>(sf.activity);
  const std::vector<double> d_mean = classifier::classification_loss_grad(p, gt);
  nn::Tensor<float> d_link({static_cast<int>(d_mean.size())});
  for (std::size_t i = 0; i < d_mean.size(); ++i) {
    d_link.data[i] = static_cast<float>(d_mean[i] / (static_cast<double>(imgs.size()) *
                                                     static_cast<double>(batch_size)));
  }
  for (auto& cache : caches) (void)r.cnn.backward(d_link, cache);

  r.losses.lp += classifier::classification_loss(p, gt);
  r.losses.correct += argmax(p) == gt ? 1 : 0;
  r.losses.count += 1;
}

// Greedy evaluation of a slice of samples, used for the validation metric.
double quick_accuracy(Replica& master, const sim::Environment& env,
                      const FeatureSet& features,
                      std::span<const std::size_t> indices, int case_id,
                      std::uint64_t seed, int threads) {
  if (indices.empty()) return -1.0;
  const int wc = canonical_window(features);
  std::vector<int> correct(indices.size(), 0);
  parallel_for(indices.size(), static_cast<std::size_t>(threads), [&](std::size_t k) {
    const SampleFeatures& sf = features.samples[indices[k]];
    std::vector<double> p;
    if (case_uses_agent(case_id)) {
      const agent::EpisodeInput input = sf.episode_input();
      agent::EpisodeResult ep = agent::run_episode(
          *master.agent, master.cnn, input, nn::Mode::kEval, nullptr, 0.9, nullptr,
          nullptr);
      p = ep.final_p;
    } else {
      std::vector<std::uint8_t> mask;
      switch (case_policy(case_id)) {
        case LinkPolicy::kOrthogonalPair:
          mask = orthogonal_pair_mask(env, sf.location);
          break;
        case LinkPolicy::kAllLinks:
          mask = all_links_mask(features.num_links);
          break;
        case LinkPolicy::kRandomSingle: {
          Rng rng(mix_seed(seed, kCase4Tag, kValTag, k));
          mask = random_single_mask(features.num_links, rng);
          break;
        }
        default:
          break;
      }
      std::vector<const nn::Tensor<float>*> imgs;
      for (std::size_t l = 0; l < mask.size(); ++l) {
        if (mask[l]) imgs.push_back(&sf.images[static_cast<std::size_t>(wc)][l]);
      }
      p = classifier::predict_group<float>(master.cnn, imgs, nn::Mode::kEval,
                                           nullptr, nullptr);
    }
    correct[k] = argmax(p) == static_cast<int>(sf.activity) ? 1 : 0;
  });
  int n_correct = 0;
  for (int c : correct) n_correct += c;
  return static_cast<double>(n_correct) / static_cast<double>(indices.size());
}

void write_outputs(const std::filesystem::path& out_dir, Replica& master,
                   const TrainResult& result, const nn::HyperParams& hp,
                   TrainResult* mutable_result) {
  std::filesystem::create_directories(out_dir);
  const auto stem = out_dir / "checkpoint";
  nn::save_checkpoint(stem, model_params(master.agent, master.cnn));
  mutable_result->checkpoint_hash = nn::checkpoint_hash(stem);

  std::ofstream csv(out_dir / "loss.csv");
  csv << "epoch,loss,loss_p,loss_j,loss_u,train_accuracy,val_accuracy\n";
  for (const EpochStats& e : result.curve) {
    csv << e.epoch << "," << e.loss << "," << e.loss_p << "," << e.loss_j << ","
        << e.loss_u << "," << e.train_accuracy << "," << e.val_accuracy << "\n";
  }

  ordered_json summary;
  summary["case"] = result.case_id;
  summary["cnn"] = result.cnn_id;
  summary["seed"] = result.seed;
  summary["epochs_run"] = result.epochs_run;
  summary["optimizer_steps"] = result.optimizer_steps;
  summary["learning_rate"] = hp.lr;
  summary["batch_size"] = hp.batch_size;
  summary["lambda1"] = hp.lambda1;
  summary["lambda2"] = hp.lambda2;
  summary["discount"] = hp.discount;
  summary["checkpoint_hash"] = mutable_result->checkpoint_hash;
  std::ofstream sj(out_dir / "train_summary.json");
  sj << summary.dump(2) << "\n";
}

}  // namespace

int canonical_window(const FeatureSet& features) { return features.windows / 2; }

TrainResult train_case(const HarnessConfig& config, const sim::Environment& env,
                       const FeatureSet& train_features, const TrainOptions& options,
                       TrainedModel* model_out) {
  const int case_id = options.case_id;
  const int cnn_id = options.cnn_id;
  const nn::HyperParams hp = resolve_hyper(config, case_id);
  const int threads = options.threads > 0 ? options.threads : 1;
  if (train_features.samples.empty()) {
    throw DomainError("train: empty training feature set");
  }

  TrainResult result;
  result.case_id = case_id;
  result.cnn_id = cnn_id;
  result.seed = options.seed;

  // Master plus per-chunk replicas; replicas re-sync at each batch.
  Replica master = build_replica(config, train_features, case_id, cnn_id, options.seed);
  std::vector<Replica> replicas;
  for (std::size_t c = 0; c < kGradChunks; ++c) {
    replicas.push_back(
        build_replica(config, train_features, case_id, cnn_id, options.seed));
  }
  int adam_counter_agent = 0;
  int adam_counter_cnn = 0;

  // Validation split: trailing fraction of the set, excluded from updates
  // only when early stopping is active.
  std::vector<std::size_t> train_idx(train_features.samples.size());
  std::iota(train_idx.begin(), train_idx.end(), 0);
  std::vector<std::size_t> val_idx;
  if (config.early_stop && config.val_fraction > 0.0) {
    const auto val_n = static_cast<std::size_t>(
        static_cast<double>(train_idx.size()) * config.val_fraction);
    if (val_n > 0 && val_n < train_idx.size()) {
      val_idx.assign(train_idx.end() - static_cast<std::ptrdiff_t>(val_n),
                     train_idx.end());
      train_idx.resize(train_idx.size() - val_n);
    }
  }

  const int wc = canonical_window(train_features);
  const bool joint = case_uses_agent(case_id);

  // Snapshot for NaN recovery.
  Replica last_good = build_replica(config, train_features, case_id, cnn_id,
                                    options.seed);
  sync_replica(last_good, master);

  double best_val = -1.0;
  int epochs_since_best = 0;

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    // Deterministic shuffle.
    std::vector<std::size_t> order = train_idx;
    Rng shuffle_rng(mix_seed(options.seed, kShuffleTag,
                             static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = shuffle_rng.uniform_index(i);
      std::swap(order[i - 1], order[j]);
    }

    LossAccum epoch_losses;
    const std::size_t n = order.size();
    const auto batch = static_cast<std::size_t>(hp.batch_size);

    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      for (auto& r : replicas) sync_replica(r, master);

      try {
        parallel_chunks(count, kGradChunks, static_cast<std::size_t>(threads),
                        [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
          Replica& r = replicas[chunk];
          for (std::size_t i = lo; i < hi; ++i) {
            const std::size_t pos = start + i;
            const SampleFeatures& sf =
                train_features.samples[order[pos]];
            const std::uint64_t sample_seed =
                mix_seed(options.seed, kEpisodeRngTag,
                         static_cast<std::uint64_t>(epoch), pos);
            if (joint) {
              joint_sample_pass(r, config, sf, sample_seed, count, hp);
            } else {
              std::vector<std::uint8_t> mask;
              switch (case_policy(case_id)) {
                case LinkPolicy::kOrthogonalPair:
                  mask = orthogonal_pair_mask(env, sf.location);
                  break;
                case LinkPolicy::kAllLinks:
                  mask = all_links_mask(train_features.num_links);
                  break;
                case LinkPolicy::kRandomSingle: {
                  Rng rng(mix_seed(options.seed, kCase4Tag,
                                   static_cast<std::uint64_t>(epoch), pos));
                  mask = random_single_mask(train_features.num_links, rng);
                  break;
                }
                default:
                  throw ConfigError("unexpected policy in supervised pass");
              }
              supervised_sample_pass(r, sf, mask, wc, sample_seed, count);
            }
          }
        });

        master.zero_grads();
        for (auto& r : replicas) reduce_replica(master, r);
        if (joint) {
          auto agent_params = master.agent->params();
          nn::adam_step(agent_params, adam_counter_agent, hp);
        }
        auto cnn_params = master.cnn.params();
        nn::adam_step(cnn_params, adam_counter_cnn, hp);
        ++result.optimizer_steps;
      } catch (const NumericError&) {
        // Roll back to the last epoch boundary and surface the failure.
        if (!options.out_dir.empty()) {
          std::filesystem::create_directories(options.out_dir);
          nn::save_checkpoint(options.out_dir / "checkpoint",
                              model_params(last_good.agent, last_good.cnn));
        }
        throw;
      }
      epoch_losses = [&] {
        LossAccum merged = epoch_losses;
        for (auto& r : replicas) merged.merge(r.losses);
        return merged;
      }();
    }

    EpochStats stats;
    stats.epoch = epoch;
    const double inv = epoch_losses.count > 0 ? 1.0 / epoch_losses.count : 0.0;
    stats.loss_p = epoch_losses.lp * inv;
    stats.loss_j = epoch_losses.lj * inv;
    stats.loss_u = epoch_losses.lu * inv;
    const double l_agent = agent::agent_loss(stats.loss_j, stats.loss_u, config.lambda1);
    stats.loss = classifier::overall_loss(stats.loss_p, joint ? l_agent : 0.0,
                                          joint ? config.lambda2 : 0.0);
    stats.train_accuracy =
        epoch_losses.count > 0
            ? static_cast<double>(epoch_losses.correct) / epoch_losses.count
            : 0.0;
    if (!val_idx.empty()) {
      stats.val_accuracy = quick_accuracy(master, env, train_features, val_idx,
                                          case_id, options.seed, threads);
    }
    result.curve.push_back(stats);
    result.epochs_run = epoch + 1;

    sync_replica(last_good, master);

    if (!val_idx.empty()) {
      if (stats.val_accuracy > best_val + 1e-9) {
        best_val = stats.val_accuracy;
        epochs_since_best = 0;
      } else if (++epochs_since_best >= config.early_stop_patience) {
        break;
      }
    }
  }

  if (!options.out_dir.empty()) {
    write_outputs(options.out_dir, master, result, hp, &result);
  }
  if (model_out) {
    model_out->has_agent = joint;
    model_out->agent = std::move(master.agent);
    model_out->cnn = std::move(master.cnn);
  }
  return result;
}

TrainedModel load_model(const std::filesystem::path& model_dir,
                        const HarnessConfig& config, const sim::Environment& env,
                        int case_id, int cnn_id, const FeatureSet& features) {
  (void)env;
  TrainedModel model;
  model.has_agent = case_uses_agent(case_id);
  Replica r = build_replica(config, features, case_id, cnn_id, 0);
  if (model.has_agent) model.agent = std::move(r.agent);
  model.cnn = std::move(r.cnn);
  std::vector<nn::Param<float>*> params = model_params(model.agent, model.cnn);
  nn::load_checkpoint(model_dir / "checkpoint", params);
  return model;
}

}  // namespace linksense::harness
