// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "linksense/nn/layers.hpp"

namespace linksense::nn {

template <typename T>
struct NetCache {
  std::vector<LayerCache<T>> layers;
};

// An ordered layer stack with externally-owned forward caches, so that
// eval-mode forwards can run concurrently on an immutable network and a
// training episode can hold one cache per time step.
template <typename T>
class Network {
 public:
  Network() = default;
  Network(std::string name, std::vector<int> input_shape)
      : name_(std::move(name)), input_shape_(std::move(input_shape)) {}

  void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

  const std::string& name() const { return name_; }
  const std::vector<int>& input_shape() const { return input_shape_; }
  std::size_t num_layers() const { return layers_.size(); }
  Layer<T>* layer(std::size_t i) { return layers_[i].get(); }
  const Layer<T>* layer(std::size_t i) const { return layers_[i].get(); }

  // Composed output shape; errors carry the per-layer shape trace.
  std::vector<int> output_shape() const {
    std::vector<int> shape = input_shape_;
    std::string trace = shape_str(shape);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      try {
        shape = layers_[i]->output_shape(shape);
      } catch (const ShapeError& e) {
        throw ShapeError(name_ + ": layer " + std::to_string(i + 1) + " (" +
                         layers_[i]->kind() + "): " + e.what() +
                         "; shape trace " + trace);
      }
      trace += " -> " + shape_str(shape);
    }
    return shape;
  }

  Tensor<T> forward(const Tensor<T>& input, Mode mode, Rng* rng,
                    NetCache<T>* cache) const {
    if (cache && mode == Mode::kTrainReplay) {
      // Replay keeps the cache contents (dropout masks) from the recorded
      // train-mode forward.
      if (cache->layers.size() != layers_.size()) {
        throw ShapeError(name_ + ": replay forward without a recorded cache");
      }
    } else if (cache) {
      cache->layers.assign(layers_.size(), LayerCache<T>{});
    }
    Tensor<T> cur = input;
    Tensor<T> next;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      LayerCache<T>* lc = cache ? &cache->layers[i] : nullptr;
      try {
        layers_[i]->forward(cur, next, mode, rng, lc);
      } catch (const ShapeError& e) {
        throw ShapeError(name_ + ": layer " + std::to_string(i + 1) + " (" +
                         layers_[i]->kind() + "): " + e.what());
      }
      cur = std::move(next);
      next = Tensor<T>{};
    }
    return cur;
  }

  // Backward through the cached forward; accumulates parameter gradients and
  // returns the gradient at the network input.
  Tensor<T> backward(const Tensor<T>& d_output, const NetCache<T>& cache) {
    if (cache.layers.size() != layers_.size()) {
      throw ShapeError(name_ + ": backward without a matching forward cache");
    }
    Tensor<T> d = d_output;
    Tensor<T> d_prev;
    for (std::size_t i = layers_.size(); i-- > 0;) {
      layers_[i]->backward(d, cache.layers[i], d_prev);
      d = std::move(d_prev);
      d_prev = Tensor<T>{};
    }
    return d;
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    for (auto& l : layers_) {
      for (Param<T>* p : l->params()) out.push_back(p);
    }
    return out;
  }

  std::size_t num_params() {
    std::size_t n = 0;
    for (Param<T>* p : params()) n += p->value.count();
    return n;
  }

  void zero_grads() {
    for (Param<T>* p : params()) p->grad.zero();
  }

  int& adam_step() { return adam_step_; }

 private:
  std::string name_;
  std::vector<int> input_shape_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  int adam_step_ = 0;
};

// Copies parameter values between two structurally identical networks.
template <typename T>
void copy_params(Network<T>& dst, Network<T>& src) {
  auto d = dst.params();
  auto s = src.params();
  if (d.size() != s.size()) {
    throw ShapeError("copy_params: networks have different parameter lists");
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i]->value.shape != s[i]->value.shape) {
      throw ShapeError("copy_params: shape mismatch at " + d[i]->name);
    }
    d[i]->value.data = s[i]->value.data;
  }
}

// dst.grad += src.grad, in parameter order.
template <typename T>
void accumulate_grads(Network<T>& dst, Network<T>& src) {
  auto d = dst.params();
  auto s = src.params();
  if (d.size() != s.size()) {
    throw ShapeError("accumulate_grads: networks have different parameter lists");
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d[i]->grad.data.size(); ++j) {
      d[i]->grad.data[j] += s[i]->grad.data[j];
    }
  }
}

}  // namespace linksense::nn
