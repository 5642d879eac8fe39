// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "linksense/nn/network.hpp"

namespace linksense::nn {

// Central-finite-difference validation of the analytic gradients, float64.
//
// The loss is a fixed pseudo-random linear functional of the network output
// (generic enough to exercise every Jacobian, smooth so finite differences
// behave). Dropout masks are sampled once and replayed for every
// perturbation. For tensors larger than max_per_tensor a deterministic
// strided subset of entries is probed; analytic gradients are still produced
// by a full backward pass.
struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;

  struct PerParam {
    std::string name;
    double rel_error;
  };
  std::vector<PerParam> per_param;
};

GradCheckResult grad_check(Network<double>& net, const Tensor<double>& input,
                           std::uint64_t seed, int max_per_tensor = 24,
                           double step = 1e-5);

// As above but with a caller-supplied loss head on the network output.
GradCheckResult grad_check_with_loss(
    Network<double>& net, const Tensor<double>& input,
    const std::function<double(const Tensor<double>&)>& loss_value,
    const std::function<Tensor<double>(const Tensor<double>&)>& loss_grad,
    int max_per_tensor = 24, double step = 1e-5);

}  // namespace linksense::nn
