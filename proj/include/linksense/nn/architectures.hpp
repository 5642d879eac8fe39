// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "linksense/nn/network.hpp"

namespace linksense::nn {

// The fixed network zoo. MixedCnnLstm is the agent trunk (four Conv1D
// stages, a max pool, three 128-wide LSTM layers); Cnn1..Cnn4 are the
// classification networks in increasing depth; the policy heads map the
// 128-dim context vector to per-link probabilities.
enum class ArchId {
  kMixedCnnLstm,
  kCnn1,
  kCnn2,
  kCnn3,
  kCnn4,
  kPolicyHead,
  kPolicyHeadSoftmax,
};

inline const char* arch_name(ArchId id) {
  switch (id) {
    case ArchId::kMixedCnnLstm: return "mixed-cnn-lstm";
    case ArchId::kCnn1: return "cnn1";
    case ArchId::kCnn2: return "cnn2";
    case ArchId::kCnn3: return "cnn3";
    case ArchId::kCnn4: return "cnn4";
    case ArchId::kPolicyHead: return "policy-head";
    case ArchId::kPolicyHeadSoftmax: return "policy-head-softmax";
  }
  return "?";
}

inline ArchId cnn_arch(int cnn_id) {
  switch (cnn_id) {
    case 1: return ArchId::kCnn1;
    case 2: return ArchId::kCnn2;
    case 3: return ArchId::kCnn3;
    case 4: return ArchId::kCnn4;
    default:
      throw ConfigError("cnn id must be in 1..4, got " + std::to_string(cnn_id));
  }
}

inline constexpr int kLstmHidden = 128;
inline constexpr int kNumClasses = 5;

namespace detail_arch {

// Appends a layer and advances the composed shape through it.
template <typename T, typename L>
void add_layer(Network<T>& net, std::vector<int>& shape, std::unique_ptr<L> layer) {
  shape = layer->output_shape(shape);
  net.add(std::move(layer));
}

template <typename T>
void add_conv1d(Network<T>& net, std::vector<int>& shape, const std::string& name,
                int out_ch, int kernel, int stride, Activation act, Rng& rng) {
  auto l = std::make_unique<Conv1dLayer<T>>(net.name() + "." + name, shape[0],
                                            out_ch, kernel, stride, act);
  l->init(rng);
  add_layer(net, shape, std::move(l));
}

template <typename T>
void add_conv2d(Network<T>& net, std::vector<int>& shape, const std::string& name,
                int out_ch, int kernel, int stride, Activation act, Rng& rng) {
  auto l = std::make_unique<Conv2dLayer<T>>(net.name() + "." + name, shape[0],
                                            out_ch, kernel, stride, act);
  l->init(rng);
  add_layer(net, shape, std::move(l));
}

template <typename T>
void add_dense(Network<T>& net, std::vector<int>& shape, const std::string& name,
               int out, Activation act, Rng& rng) {
  std::size_t flat = 1;
  for (int d : shape) flat *= static_cast<std::size_t>(d);
  auto l = std::make_unique<DenseLayer<T>>(net.name() + "." + name,
                                           static_cast<int>(flat), out, act);
  l->init(rng);
  add_layer(net, shape, std::move(l));
}

// flatten=true folds the incoming tensor into one step of C*L features
// (conv stack -> LSTM boundary); otherwise the input is a [T][D] sequence.
template <typename T>
void add_lstm(Network<T>& net, std::vector<int>& shape, const std::string& name,
              int hidden, bool flatten, Rng& rng) {
  int input_size;
  if (flatten) {
    std::size_t flat = 1;
    for (int d : shape) flat *= static_cast<std::size_t>(d);
    input_size = static_cast<int>(flat);
  } else {
    if (shape.size() != 2) {
      throw ShapeError("lstm: expected a [T][D] sequence, got " + shape_str(shape));
    }
    input_size = shape[1];
  }
  auto l = std::make_unique<LstmLayer<T>>(net.name() + "." + name, input_size, hidden);
  l->init(rng);
  if (flatten) shape = {1, input_size};
  add_layer(net, shape, std::move(l));
}

}  // namespace detail_arch

// Observation trunk of the mixed network: the four Conv1D stages plus the
// max pool. Input [channels][window]; output [64][~window/32].
template <typename T>
Network<T> build_observation_net(int in_channels, int window, const std::string& name,
                                 std::uint64_t init_seed) {
  using namespace detail_arch;
  Rng rng(mix_seed(init_seed, 0x0b5e7a7eULL));
  Network<T> net(name, {in_channels, window});
  std::vector<int> shape = net.input_shape();
  add_conv1d(net, shape, "conv1", 8, 20, 2, Activation::kRelu, rng);
  add_conv1d(net, shape, "conv2", 16, 20, 2, Activation::kRelu, rng);
  add_conv1d(net, shape, "conv3", 32, 20, 2, Activation::kRelu, rng);
  add_conv1d(net, shape, "conv4", 64, 20, 2, Activation::kRelu, rng);
  add_layer(net, shape, std::make_unique<MaxPool1dLayer<T>>(2, 2));
  return net;
}

// Context stack: three 128-wide LSTM layers stepping once per episode step.
template <typename T>
Network<T> build_context_net(int state_size, const std::string& name,
                             std::uint64_t init_seed) {
  using namespace detail_arch;
  Rng rng(mix_seed(init_seed, 0xc0917e87ULL));
  Network<T> net(name, {1, state_size});
  std::vector<int> shape = net.input_shape();
  add_lstm(net, shape, "lstm1", kLstmHidden, false, rng);
  add_lstm(net, shape, "lstm2", kLstmHidden, false, rng);
  add_lstm(net, shape, "lstm3", kLstmHidden, false, rng);
  return net;
}

template <typename T>
Network<T> build_policy_head(int num_links, bool softmax, const std::string& name,
                             std::uint64_t init_seed) {
  using namespace detail_arch;
  Rng rng(mix_seed(init_seed, 0x901c4eaULL));
  Network<T> net(name, {kLstmHidden});
  std::vector<int> shape = net.input_shape();
  add_dense(net, shape, "fc",  num_links,
            softmax ? Activation::kSoftmax : Activation::kSigmoid, rng);
  return net;
}

// Builds one of the fixed architectures for the given input shape.
//   kMixedCnnLstm: input [channels][window]
//   kCnn1..kCnn4:  input [2][side][side]
//   policy heads:  input [128]; head_width is the link count
template <typename T>
Network<T> build_network(ArchId id, const std::vector<int>& input_shape,
                         const std::string& name, std::uint64_t init_seed,
                         int head_width = 0) {
  using namespace detail_arch;
  Rng rng(mix_seed(init_seed, static_cast<std::uint64_t>(id) + 0xa2c4ULL));
  Network<T> net(name, input_shape);
  std::vector<int> shape = input_shape;

  auto require_rank = [&](int rank) {
    if (static_cast<int>(input_shape.size()) != rank) {
      throw ShapeError(std::string(arch_name(id)) + ": expected rank-" +
                       std::to_string(rank) + " input, got " +
                       shape_str(input_shape));
    }
  };

  switch (id) {
    case ArchId::kMixedCnnLstm: {
      require_rank(2);
      add_conv1d(net, shape, "conv1", 8, 20, 2, Activation::kRelu, rng);
      add_conv1d(net, shape, "conv2", 16, 20, 2, Activation::kRelu, rng);
      add_conv1d(net, shape, "conv3", 32, 20, 2, Activation::kRelu, rng);
      add_conv1d(net, shape, "conv4", 64, 20, 2, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<MaxPool1dLayer<T>>(2, 2));
      add_lstm(net, shape, "lstm1", kLstmHidden, true, rng);
      add_lstm(net, shape, "lstm2", kLstmHidden, false, rng);
      add_lstm(net, shape, "lstm3", kLstmHidden, false, rng);
      break;
    }
    case ArchId::kCnn1: {
      require_rank(3);
      add_conv2d(net, shape, "conv1", 16, 5, 2, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.3));
      add_layer(net, shape, std::make_unique<MaxPool2dLayer<T>>(2, 2));
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.5));
      add_dense(net, shape, "fc1", kNumClasses, Activation::kSoftmax, rng);
      break;
    }
    case ArchId::kCnn2: {
      require_rank(3);
      add_conv2d(net, shape, "conv1", 16, 5, 2, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<MaxPool2dLayer<T>>(2, 2));
      add_conv2d(net, shape, "conv2", 32, 5, 2, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.3));
      add_layer(net, shape, std::make_unique<MaxPool2dLayer<T>>(2, 2));
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.5));
      add_dense(net, shape, "fc1", kNumClasses, Activation::kSoftmax, rng);
      break;
    }
    case ArchId::kCnn3: {
      require_rank(3);
      add_conv2d(net, shape, "conv1", 16, 5, 2, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<MaxPool2dLayer<T>>(2, 2));
      add_conv2d(net, shape, "conv2", 32, 5, 2, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.3));
      add_layer(net, shape, std::make_unique<MaxPool2dLayer<T>>(2, 2));
      add_conv2d(net, shape, "conv3", 64, 5, 2, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.3));
      add_layer(net, shape, std::make_unique<MaxPool2dLayer<T>>(2, 2));
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.5));
      add_dense(net, shape, "fc1", kNumClasses, Activation::kSoftmax, rng);
      break;
    }
    case ArchId::kCnn4: {
      require_rank(3);
      add_conv2d(net, shape, "conv1", 16, 5, 2, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<MaxPool2dLayer<T>>(2, 2));
      add_conv2d(net, shape, "conv2", 32, 5, 2, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.3));
      add_layer(net, shape, std::make_unique<MaxPool2dLayer<T>>(2, 2));
      add_conv2d(net, shape, "conv3", 64, 5, 2, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.3));
      add_layer(net, shape, std::make_unique<MaxPool2dLayer<T>>(2, 2));
      add_conv2d(net, shape, "conv4", 64, 5, 2, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.3));
      add_layer(net, shape, std::make_unique<MaxPool2dLayer<T>>(2, 2));
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.5));
      add_dense(net, shape, "fc1", 400, Activation::kRelu, rng);
      add_layer(net, shape, std::make_unique<DropoutLayer<T>>(0.5));
      add_dense(net, shape, "fc2", kNumClasses, Activation::kSoftmax, rng);
      break;
    }
    case ArchId::kPolicyHead:
    case ArchId::kPolicyHeadSoftmax: {
      require_rank(1);
      if (input_shape[0] != kLstmHidden) {
        throw ShapeError("policy head expects a 128-dim context vector, got " +
                         shape_str(input_shape));
      }
      if (head_width < 1) {
        throw ConfigError("policy head needs head_width = number of links");
      }
      add_dense(net, shape, "fc", head_width,
                id == ArchId::kPolicyHeadSoftmax ? Activation::kSoftmax
                                                 : Activation::kSigmoid,
                rng);
      break;
    }
  }

  (void)net.output_shape();  // fail fast with a shape trace if wiring broke
  return net;
}

}  // namespace linksense::nn
