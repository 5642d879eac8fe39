// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "linksense/agent/losses.hpp"
#include "linksense/nn/network.hpp"

namespace linksense::classifier {

inline constexpr int kClasses = 5;

// Per-link class distribution from the link's two-channel spectrum image.
template <typename T>
std::vector<double> predict_link(nn::Network<T>& cnn, const nn::Tensor<T>& image,
                                 nn::Mode mode, Rng* rng,
                                 nn::NetCache<T>* cache) {
  const nn::Tensor<T> out = cnn.forward(image, mode, rng, cache);
  std::vector<double> p(out.data.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(out.data[i]);
  return p;
}

// Mean of the member distributions; stays a distribution. Caches, when
// requested, are filled per member link in the order given.
template <typename T>
std::vector<double> predict_group(nn::Network<T>& cnn,
                                  std::span<const nn::Tensor<T>* const> images,
                                  nn::Mode mode, Rng* rng,
                                  std::vector<nn::NetCache<T>>* caches) {
  if (images.empty()) {
    throw DomainError("predict_group: link group must be non-empty");
  }
  if (caches) caches->assign(images.size(), nn::NetCache<T>{});
  std::vector<double> mean;
  for (std::size_t i = 0; i < images.size(); ++i) {
    nn::NetCache<T>* c = caches ? &(*caches)[i] : nullptr;
    const std::vector<double> p = predict_link(cnn, *images[i], mode, rng, c);
    if (mean.empty()) {
      mean = p;
    } else {
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k];
    }
  }
  for (double& v : mean) v /= static_cast<double>(images.size());
  return mean;
}

// L_P = -(1/C) sum_delta p_hat_delta log(p_delta), probabilities clamped
// before the log. With a one-hot target this is -log(p_gt)/C.
double classification_loss(std::span<const double> p,
                           std::span<const double> p_hat);
double classification_loss(std::span<const double> p, int gt);

// d L_P / d p for a one-hot target.
std::vector<double> classification_loss_grad(std::span<const double> p, int gt);

// Loss = L_P + lambda2 * L_agent.
double overall_loss(double l_p, double l_agent, double lambda2);

}  // namespace linksense::classifier
