// SPDX-License-Identifier: Apache-2.0
#include "linksense/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace linksense::nn {

namespace {

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

}  // namespace

GradCheckResult grad_check_with_loss(
    Network<double>& net, const Tensor<double>& input,
    const std::function<double(const Tensor<double>&)>& loss_value,
    const std::function<Tensor<double>(const Tensor<double>&)>& loss_grad,
    int max_per_tensor, double step) {
  // Forward in train mode samples the dropout masks; the same cache is then
  // replayed so every finite-difference evaluation sees identical masks.
  Rng rng(0x6ead5eedULL);
  NetCache<double> cache;
  Tensor<double> out = net.forward(input, Mode::kTrain, &rng, &cache);

  net.zero_grads();
  Tensor<double> d_out = loss_grad(out);
  (void)net.backward(d_out, cache);

  // Snapshot the analytic gradients before poking parameters.
  std::vector<std::vector<double>> analytic;
  auto params = net.params();
  analytic.reserve(params.size());
  for (Param<double>* p : params) analytic.push_back(p->grad.data);

  auto eval_loss = [&]() {
    NetCache<double> replay = cache;  // reuse masks, refresh activations
    Tensor<double> y = net.forward(input, Mode::kTrainReplay, nullptr, &replay);
    return loss_value(y);
  };

  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Param<double>* p = params[pi];
    const std::size_t n = p->value.data.size();
    const std::size_t probes = std::min<std::size_t>(
        n, static_cast<std::size_t>(std::max(max_per_tensor, 1)));
    double worst = 0.0;
    for (std::size_t j = 0; j < probes; ++j) {
      const std::size_t idx = j * n / probes;
      const double saved = p->value.data[idx];
      p->value.data[idx] = saved + step;
      const double up = eval_loss();
      p->value.data[idx] = saved - step;
      const double down = eval_loss();
      p->value.data[idx] = saved;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, rel_error(analytic[pi][idx], numeric));
    }
    result.per_param.push_back({p->name, worst});
    if (worst > result.max_rel_error) {
      result.max_rel_error = worst;
      result.worst_param = p->name;
    }
  }
  net.zero_grads();
  return result;
}

GradCheckResult grad_check(Network<double>& net, const Tensor<double>& input,
                           std::uint64_t seed, int max_per_tensor, double step) {
  // Fixed pseudo-random weighting of the output entries.
  const std::vector<int> out_shape = net.output_shape();
  std::size_t out_count = 1;
  for (int d : out_shape) out_count *= static_cast<std::size_t>(d);
  std::vector<double> weights(out_count);
  Rng wrng(mix_seed(seed, 0x10552e5ULL));
  for (double& w : weights) w = wrng.uniform(-1.0, 1.0);

  auto loss_value = [weights](const Tensor<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) acc += weights[i] * y.data[i];
    return acc;
  };
  auto loss_grad = [weights](const Tensor<double>& y) {
    Tensor<double> g(y.shape);
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] = weights[i];
    return g;
  };
  return grad_check_with_loss(net, input, loss_value, loss_grad, max_per_tensor,
                              step);
}

}  // namespace linksense::nn
