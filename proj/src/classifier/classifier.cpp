// SPDX-License-Identifier: Apache-2.0
#include "linksense/classifier/classifier.hpp"

#include <cmath>

namespace linksense::classifier {

double classification_loss(std::span<const double> p,
                           std::span<const double> p_hat) {
  if (p.size() != p_hat.size() || p.empty()) {
    throw DomainError("classification_loss: distribution size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p_hat[i] * std::log(agent::clamp_prob(p[i]));
  }
  return -acc / static_cast<double>(p.size());
}

double classification_loss(std::span<const double> p, int gt) {
  if (gt < 0 || gt >= static_cast<int>(p.size())) {
    throw DomainError("classification_loss: class " + std::to_string(gt) +
                      " out of range");
  }
  std::vector<double> one_hot(p.size(), 0.0);
  one_hot[static_cast<std::size_t>(gt)] = 1.0;
  return classification_loss(p, one_hot);
}

std::vector<double> classification_loss_grad(std::span<const double> p, int gt) {
  if (gt < 0 || gt >= static_cast<int>(p.size())) {
    throw DomainError("classification_loss_grad: class out of range");
  }
  std::vector<double> grad(p.size(), 0.0);
  const double u = agent::clamp_prob(p[static_cast<std::size_t>(gt)]);
  grad[static_cast<std::size_t>(gt)] = -1.0 / (static_cast<double>(p.size()) * u);
  return grad;
}

double overall_loss(double l_p, double l_agent, double lambda2) {
  if (lambda2 < 0.0) throw DomainError("overall_loss: lambda2 must be >= 0");
  return l_p + lambda2 * l_agent;
}

}  // namespace linksense::classifier
