// SPDX-License-Identifier: Apache-2.0
#include "linksense/harness/gradcheck_cmd.hpp"

#include <sstream>

#include "linksense/nn/architectures.hpp"
#include "linksense/nn/grad_check.hpp"

namespace linksense::harness {

namespace {

using nn::Activation;
using nn::Network;
using nn::Tensor;

Tensor<double> random_input(const std::vector<int>& shape, std::uint64_t seed) {
  Tensor<double> t(shape);
  Rng rng(mix_seed(seed, 0x129707ULL));
  for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

void check(GradCheckSummary& summary, const std::string& target,
           Network<double>& net, const Tensor<double>& input, std::uint64_t seed) {
  nn::GradCheckResult r = nn::grad_check(net, input, seed);
  GradCheckEntry e;
  e.target = target;
  e.max_rel_error = r.max_rel_error;
  e.worst_param = r.worst_param;
  e.pass = r.max_rel_error < summary.tolerance;
  summary.all_pass = summary.all_pass && e.pass;
  summary.entries.push_back(std::move(e));
}

}  // namespace

GradCheckSummary run_grad_checks(std::uint64_t seed) {
  GradCheckSummary summary;

  // Isolated layer kinds, each wrapped in a one-layer network.
  {
    Network<double> net("conv1d", {3, 40});
    Rng rng(mix_seed(seed, 1));
    auto l = std::make_unique<nn::Conv1dLayer<double>>("conv1d.l", 3, 4, 5, 2,
                                                       Activation::kRelu);
    l->init(rng);
    net.add(std::move(l));
    check(summary, "layer/conv1d", net, random_input({3, 40}, seed + 1), seed);
  }
  {
    Network<double> net("conv2d", {2, 12, 12});
    Rng rng(mix_seed(seed, 2));
    auto l = std::make_unique<nn::Conv2dLayer<double>>("conv2d.l", 2, 3, 5, 2,
                                                       Activation::kTanh);
    l->init(rng);
    net.add(std::move(l));
    check(summary, "layer/conv2d", net, random_input({2, 12, 12}, seed + 2), seed);
  }
  {
    Network<double> net("maxpool1d", {3, 17});
    net.add(std::make_unique<nn::MaxPool1dLayer<double>>(2, 2));
    check(summary, "layer/maxpool1d", net, random_input({3, 17}, seed + 3), seed);
  }
  {
    Network<double> net("maxpool2d", {2, 9, 9});
    net.add(std::make_unique<nn::MaxPool2dLayer<double>>(2, 2));
    check(summary, "layer/maxpool2d", net, random_input({2, 9, 9}, seed + 4), seed);
  }
  {
    Network<double> net("dense", {24});
    Rng rng(mix_seed(seed, 5));
    auto l = std::make_unique<nn::DenseLayer<double>>("dense.l", 24, 7,
                                                      Activation::kSigmoid);
    l->init(rng);
    net.add(std::move(l));
    check(summary, "layer/dense-sigmoid", net, random_input({24}, seed + 5), seed);
  }
  {
    Network<double> net("dense-softmax", {16});
    Rng rng(mix_seed(seed, 6));
    auto l = std::make_unique<nn::DenseLayer<double>>("dense.l", 16, 5,
                                                      Activation::kSoftmax);
    l->init(rng);
    net.add(std::move(l));
    check(summary, "layer/dense-softmax", net, random_input({16}, seed + 6), seed);
  }
  {
    Network<double> net("dropout", {30});
    net.add(std::make_unique<nn::DropoutLayer<double>>(0.4));
    check(summary, "layer/dropout", net, random_input({30}, seed + 7), seed);
  }
  {
    // Backpropagation through time over a short sequence.
    Network<double> net("lstm", {3, 6});
    Rng rng(mix_seed(seed, 8));
    auto l = std::make_unique<nn::LstmLayer<double>>("lstm.l", 6, 5);
    l->init(rng);
    net.add(std::move(l));
    check(summary, "layer/lstm-t3", net, random_input({3, 6}, seed + 8), seed);
  }

  // Full architectures at reduced input sizes.
  {
    auto net = nn::build_network<double>(nn::ArchId::kMixedCnnLstm, {4, 64},
                                         "mixed", seed + 10);
    check(summary, "arch/mixed-cnn-lstm", net, random_input({4, 64}, seed + 10), seed);
  }
  const nn::ArchId cnn_ids[] = {nn::ArchId::kCnn1, nn::ArchId::kCnn2,
                                nn::ArchId::kCnn3, nn::ArchId::kCnn4};
  const char* cnn_names[] = {"arch/cnn1", "arch/cnn2", "arch/cnn3", "arch/cnn4"};
  for (int i = 0; i < 4; ++i) {
    auto net = nn::build_network<double>(cnn_ids[i], {2, 16, 16}, "cnn",
                                         seed + 20 + static_cast<std::uint64_t>(i));
    check(summary, cnn_names[i], net,
          random_input({2, 16, 16}, seed + 20 + static_cast<std::uint64_t>(i)),
          seed);
  }
  {
    auto net = nn::build_policy_head<double>(4, false, "policy", seed + 30);
    check(summary, "arch/policy-head", net, random_input({128}, seed + 30), seed);
  }
  {
    auto net = nn::build_policy_head<double>(4, true, "policy-sm", seed + 31);
    check(summary, "arch/policy-head-softmax", net, random_input({128}, seed + 31),
          seed);
  }
  return summary;
}

std::string format_grad_checks(const GradCheckSummary& summary) {
  std::ostringstream out;
  for (const auto& e : summary.entries) {
    out << (e.pass ? "PASS" : "FAIL") << "  " << e.target
        << "  max_rel_error=" << e.max_rel_error;
    if (!e.worst_param.empty()) out << "  worst=" << e.worst_param;
    out << "\n";
  }
  out << (summary.all_pass ? "PASS" : "FAIL")
      << "  gradient suite (tolerance " << summary.tolerance << ")\n";
  return out.str();
}

}  // namespace linksense::harness
