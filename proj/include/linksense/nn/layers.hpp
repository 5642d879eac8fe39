// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "linksense/nn/tensor.hpp"
#include "linksense/rng.hpp"

namespace linksense::nn {

enum class Activation { kNone, kRelu, kTanh, kSigmoid, kSoftmax };

enum class Mode {
  kEval,         // deterministic, no caches required
  kTrain,        // caches activations, samples dropout
  kTrainReplay,  // caches activations, replays dropout masks from the cache
};

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kNone: return "none";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftmax: return "softmax";
  }
  return "?";
}

template <typename T>
struct LstmStepCache {
  std::vector<T> x, h_prev, c_prev, gate_i, gate_f, gate_g, gate_o, c_tanh;
};

template <typename T>
struct LayerCache {
  std::vector<int> in_shape;
  Tensor<T> input;                  // conv/dense/lstm
  Tensor<T> post;                   // post-activation output
  std::vector<std::int32_t> argmax; // max pooling
  Tensor<T> mask;                   // dropout keep/scale mask
  std::vector<LstmStepCache<T>> steps;
};

namespace detail {

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) {
    return T(1) / (T(1) + std::exp(-x));
  }
  const T e = std::exp(x);
  return e / (T(1) + e);
}

// In-place activation over a flat buffer; softmax treats the buffer as one
// distribution and is log-sum-exp stabilized.
template <typename T>
void apply_activation(Activation act, T* x, std::size_t n) {
  switch (act) {
    case Activation::kNone:
      return;
    case Activation::kRelu:
      for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > T(0) ? x[i] : T(0);
      return;
    case Activation::kTanh:
      for (std::size_t i = 0; i < n; ++i) x[i] = std::tanh(x[i]);
      return;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) x[i] = stable_sigmoid(x[i]);
      return;
    case Activation::kSoftmax: {
      T peak = x[0];
      for (std::size_t i = 1; i < n; ++i) peak = std::max(peak, x[i]);
      T sum = T(0);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::exp(x[i] - peak);
        sum += x[i];
      }
      for (std::size_t i = 0; i < n; ++i) x[i] /= sum;
      return;
    }
  }
}

// d_pre = d_post * act'(pre), expressed through the post-activation values.
template <typename T>
void activation_backward(Activation act, const T* post, const T* d_post, T* d_pre,
                         std::size_t n) {
  switch (act) {
    case Activation::kNone:
      std::copy(d_post, d_post + n, d_pre);
      return;
    case Activation::kRelu:
      for (std::size_t i = 0; i < n; ++i) {
        d_pre[i] = post[i] > T(0) ? d_post[i] : T(0);
      }
      return;
    case Activation::kTanh:
      for (std::size_t i = 0; i < n; ++i) {
        d_pre[i] = d_post[i] * (T(1) - post[i] * post[i]);
      }
      return;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        d_pre[i] = d_post[i] * post[i] * (T(1) - post[i]);
      }
      return;
    case Activation::kSoftmax: {
      T dot = T(0);
      for (std::size_t i = 0; i < n; ++i) dot += post[i] * d_post[i];
      for (std::size_t i = 0; i < n; ++i) {
        d_pre[i] = post[i] * (d_post[i] - dot);
      }
      return;
    }
  }
}

inline int same_out_len(int len, int stride) { return (len + stride - 1) / stride; }

inline int same_pad_begin(int len, int kernel, int stride) {
  const int out = same_out_len(len, stride);
  const int total = std::max((out - 1) * stride + kernel - len, 0);
  return total / 2;
}

}  // namespace detail

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
  virtual void forward(const Tensor<T>& in, Tensor<T>& out, Mode mode, Rng* rng,
                       LayerCache<T>* cache) const = 0;
  virtual void backward(const Tensor<T>& d_out, const LayerCache<T>& cache,
                        Tensor<T>& d_in) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
};

// ---------------------------------------------------------------------------
// Dense (fully connected). Flattens whatever it is given.
template <typename T>
class DenseLayer final : public Layer<T> {
 public:
  DenseLayer(std::string name, int in_features, int out_features, Activation act)
      : act_(act),
        in_(in_features),
        out_(out_features),
        weight_(name + ".W", {out_features, in_features}),
        bias_(name + ".b", {out_features}) {}

  void init(Rng& rng) {
    const T bound = std::sqrt(T(6) / T(in_));
    for (T& w : weight_.value.data) w = static_cast<T>(rng.uniform(-bound, bound));
    bias_.value.zero();
  }

  std::string kind() const override {
    return "dense(" + std::to_string(out_) + "," + activation_name(act_) + ")";
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    std::size_t n = 1;
    for (int d : in) n *= static_cast<std::size_t>(d);
    if (n != static_cast<std::size_t>(in_)) {
      throw ShapeError("dense: input " + shape_str(in) + " does not flatten to " +
                       std::to_string(in_));
    }
    return {out_};
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, Mode mode, Rng*,
               LayerCache<T>* cache) const override {
    (void)output_shape(in.shape);
    out.shape = {out_};
    out.data.assign(static_cast<std::size_t>(out_), T{});
    const T* x = in.ptr();
    const T* w = weight_.value.ptr();
    for (int o = 0; o < out_; ++o) {
      T acc = bias_.value.data[static_cast<std::size_t>(o)];
      const T* wr = w + static_cast<std::size_t>(o) * in_;
      for (int i = 0; i < in_; ++i) acc += wr[i] * x[i];
      out.data[static_cast<std::size_t>(o)] = acc;
    }
    detail::apply_activation(act_, out.ptr(), out.data.size());
    if (mode != Mode::kEval && cache) {
      cache->in_shape = in.shape;
      cache->input = in;
      cache->post = out;
    }
  }

  void backward(const Tensor<T>& d_out, const LayerCache<T>& cache,
                Tensor<T>& d_in) override {
    std::vector<T> d_pre(static_cast<std::size_t>(out_));
    detail::activation_backward(act_, cache.post.ptr(), d_out.ptr(), d_pre.data(),
                                d_pre.size());
    d_in.shape = cache.in_shape;
    d_in.data.assign(static_cast<std::size_t>(in_), T{});
    const T* x = cache.input.ptr();
    T* dw = weight_.grad.ptr();
    const T* w = weight_.value.ptr();
    for (int o = 0; o < out_; ++o) {
      const T g = d_pre[static_cast<std::size_t>(o)];
      bias_.grad.data[static_cast<std::size_t>(o)] += g;
      T* dwr = dw + static_cast<std::size_t>(o) * in_;
      const T* wr = w + static_cast<std::size_t>(o) * in_;
      T* di = d_in.ptr();
      for (int i = 0; i < in_; ++i) {
        dwr[i] += g * x[i];
        di[i] += g * wr[i];
      }
    }
  }

  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }

  int out_features() const { return out_; }
  Activation activation() const { return act_; }
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  Activation act_;
  int in_, out_;
  Param<T> weight_, bias_;
};

// ---------------------------------------------------------------------------
// Conv1D over [channels][length], stride >= 1, TF-style SAME padding.
template <typename T>
class Conv1dLayer final : public Layer<T> {
 public:
  Conv1dLayer(std::string name, int in_ch, int out_ch, int kernel, int stride,
              Activation act)
      : act_(act),
        in_ch_(in_ch),
        out_ch_(out_ch),
        kernel_(kernel),
        stride_(stride),
        weight_(name + ".W", {out_ch, in_ch, kernel}),
        bias_(name + ".b", {out_ch}) {}

  void init(Rng& rng) {
    const T bound = std::sqrt(T(6) / T(in_ch_ * kernel_));
    for (T& w : weight_.value.data) w = static_cast<T>(rng.uniform(-bound, bound));
    bias_.value.zero();
  }

  std::string kind() const override {
    return "conv1d(" + std::to_string(kernel_) + "x1(" + std::to_string(out_ch_) +
           "),s" + std::to_string(stride_) + "," + activation_name(act_) + ")";
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 2 || in[0] != in_ch_ || in[1] < 1) {
      throw ShapeError("conv1d: expected [" + std::to_string(in_ch_) +
                       "][L], got " + shape_str(in));
    }
    return {out_ch_, detail::same_out_len(in[1], stride_)};
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, Mode mode, Rng*,
               LayerCache<T>* cache) const override {
    const auto out_shape = output_shape(in.shape);
    const int len = in.shape[1];
    const int out_len = out_shape[1];
    const int pad = detail::same_pad_begin(len, kernel_, stride_);
    out.shape = out_shape;
    out.data.assign(static_cast<std::size_t>(out_ch_) * out_len, T{});
    for (int oc = 0; oc < out_ch_; ++oc) {
      T* orow = out.ptr() + static_cast<std::size_t>(oc) * out_len;
      const T bval = bias_.value.data[static_cast<std::size_t>(oc)];
      for (int ol = 0; ol < out_len; ++ol) orow[ol] = bval;
      for (int ic = 0; ic < in_ch_; ++ic) {
        const T* irow = in.ptr() + static_cast<std::size_t>(ic) * len;
        const T* wrow = weight_.value.ptr() +
                        (static_cast<std::size_t>(oc) * in_ch_ + ic) * kernel_;
        for (int k = 0; k < kernel_; ++k) {
          const T w = wrow[k];
          if (w == T(0)) continue;
          const int base = k - pad;
          // output positions with in-range input index ol*stride + base
          int ol0 = 0;
          if (base < 0) ol0 = (-base + stride_ - 1) / stride_;
          int ol1 = out_len;
          if (base < len) {
            ol1 = std::min(out_len, (len - base + stride_ - 1) / stride_);
          } else {
            ol1 = 0;
          }
          const T* src = irow + static_cast<std::ptrdiff_t>(ol0) * stride_ + base;
          for (int ol = ol0; ol < ol1; ++ol, src += stride_) {
            orow[ol] += w * *src;
          }
        }
      }
    }
    detail::apply_activation(act_, out.ptr(), out.data.size());
    if (mode != Mode::kEval && cache) {
      cache->in_shape = in.shape;
      cache->input = in;
      cache->post = out;
    }
  }

  void backward(const Tensor<T>& d_out, const LayerCache<T>& cache,
                Tensor<T>& d_in) override {
    const int len = cache.in_shape[1];
    const int out_len = d_out.shape[1];
    const int pad = detail::same_pad_begin(len, kernel_, stride_);
    std::vector<T> d_pre(d_out.data.size());
    detail::activation_backward(act_, cache.post.ptr(), d_out.ptr(), d_pre.data(),
                                d_pre.size());
    d_in.shape = cache.in_shape;
    d_in.data.assign(static_cast<std::size_t>(in_ch_) * len, T{});
    for (int oc = 0; oc < out_ch_; ++oc) {
      const T* gr = d_pre.data() + static_cast<std::size_t>(oc) * out_len;
      T gsum = T(0);
      for (int ol = 0; ol < out_len; ++ol) gsum += gr[ol];
      bias_.grad.data[static_cast<std::size_t>(oc)] += gsum;
      for (int ic = 0; ic < in_ch_; ++ic) {
        const T* irow = cache.input.ptr() + static_cast<std::size_t>(ic) * len;
        T* dirow = d_in.ptr() + static_cast<std::size_t>(ic) * len;
        const std::size_t wbase = (static_cast<std::size_t>(oc) * in_ch_ + ic) * kernel_;
        const T* wrow = weight_.value.ptr() + wbase;
        T* dwrow = weight_.grad.ptr() + wbase;
        for (int k = 0; k < kernel_; ++k) {
          const int base = k - pad;
          int ol0 = 0;
          if (base < 0) ol0 = (-base + stride_ - 1) / stride_;
          int ol1 = out_len;
          if (base < len) {
            ol1 = std::min(out_len, (len - base + stride_ - 1) / stride_);
          } else {
            ol1 = 0;
          }
          const T w = wrow[k];
          T dw = T(0);
          const T* src = irow + static_cast<std::ptrdiff_t>(ol0) * stride_ + base;
          T* dst = dirow + static_cast<std::ptrdiff_t>(ol0) * stride_ + base;
          for (int ol = ol0; ol < ol1; ++ol, src += stride_, dst += stride_) {
            dw += gr[ol] * *src;
            *dst += gr[ol] * w;
          }
          dwrow[k] += dw;
        }
      }
    }
  }

  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }

 private:
  Activation act_;
  int in_ch_, out_ch_, kernel_, stride_;
  Param<T> weight_, bias_;
};

// ---------------------------------------------------------------------------
// Conv2D over [channels][height][width], square kernel, SAME padding.
template <typename T>
class Conv2dLayer final : public Layer<T> {
 public:
  Conv2dLayer(std::string name, int in_ch, int out_ch, int kernel, int stride,
              Activation act)
      : act_(act),
        in_ch_(in_ch),
        out_ch_(out_ch),
        kernel_(kernel),
        stride_(stride),
        weight_(name + ".W", {out_ch, in_ch, kernel, kernel}),
        bias_(name + ".b", {out_ch}) {}

  void init(Rng& rng) {
    const T bound = std::sqrt(T(6) / T(in_ch_ * kernel_ * kernel_));
    for (T& w : weight_.value.data) w = static_cast<T>(rng.uniform(-bound, bound));
    bias_.value.zero();
  }

  std::string kind() const override {
    return "conv2d(" + std::to_string(kernel_) + "x" + std::to_string(kernel_) +
           "(" + std::to_string(out_ch_) + "),s" + std::to_string(stride_) + "," +
           activation_name(act_) + ")";
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 3 || in[0] != in_ch_ || in[1] < 1 || in[2] < 1) {
      throw ShapeError("conv2d: expected [" + std::to_string(in_ch_) +
                       "][H][W], got " + shape_str(in));
    }
    return {out_ch_, detail::same_out_len(in[1], stride_),
            detail::same_out_len(in[2], stride_)};
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, Mode mode, Rng*,
               LayerCache<T>* cache) const override {
    const auto out_shape = output_shape(in.shape);
    const int h = in.shape[1], w = in.shape[2];
    const int oh = out_shape[1], ow = out_shape[2];
    const int pad_y = detail::same_pad_begin(h, kernel_, stride_);
    const int pad_x = detail::same_pad_begin(w, kernel_, stride_);
    out.shape = out_shape;
    out.data.assign(static_cast<std::size_t>(out_ch_) * oh * ow, T{});
    for (int oc = 0; oc < out_ch_; ++oc) {
      T* oplane = out.ptr() + static_cast<std::size_t>(oc) * oh * ow;
      const T bval = bias_.value.data[static_cast<std::size_t>(oc)];
      for (int i = 0; i < oh * ow; ++i) oplane[i] = bval;
      for (int ic = 0; ic < in_ch_; ++ic) {
        const T* iplane = in.ptr() + static_cast<std::size_t>(ic) * h * w;
        const T* wk = weight_.value.ptr() +
                      (static_cast<std::size_t>(oc) * in_ch_ + ic) * kernel_ * kernel_;
        for (int ky = 0; ky < kernel_; ++ky) {
          const int by = ky - pad_y;
          int oy0 = by < 0 ? (-by + stride_ - 1) / stride_ : 0;
          int oy1 = by < h ? std::min(oh, (h - by + stride_ - 1) / stride_) : 0;
          for (int kx = 0; kx < kernel_; ++kx) {
            const T wv = wk[ky * kernel_ + kx];
            if (wv == T(0)) continue;
            const int bx = kx - pad_x;
            int ox0 = bx < 0 ? (-bx + stride_ - 1) / stride_ : 0;
            int ox1 = bx < w ? std::min(ow, (w - bx + stride_ - 1) / stride_) : 0;
            for (int oy = oy0; oy < oy1; ++oy) {
              const T* irow = iplane + static_cast<std::size_t>(oy * stride_ + by) * w;
              T* orow = oplane + static_cast<std::size_t>(oy) * ow;
              const T* src = irow + static_cast<std::ptrdiff_t>(ox0) * stride_ + bx;
              for (int ox = ox0; ox < ox1; ++ox, src += stride_) {
                orow[ox] += wv * *src;
              }
            }
          }
        }
      }
    }
    detail::apply_activation(act_, out.ptr(), out.data.size());
    if (mode != Mode::kEval && cache) {
      cache->in_shape = in.shape;
      cache->input = in;
      cache->post = out;
    }
  }

  void backward(const Tensor<T>& d_out, const LayerCache<T>& cache,
                Tensor<T>& d_in) override {
    const int h = cache.in_shape[1], w = cache.in_shape[2];
    const int oh = d_out.shape[1], ow = d_out.shape[2];
    const int pad_y = detail::same_pad_begin(h, kernel_, stride_);
    const int pad_x = detail::same_pad_begin(w, kernel_, stride_);
    std::vector<T> d_pre(d_out.data.size());
    detail::activation_backward(act_, cache.post.ptr(), d_out.ptr(), d_pre.data(),
                                d_pre.size());
    d_in.shape = cache.in_shape;
    d_in.data.assign(static_cast<std::size_t>(in_ch_) * h * w, T{});
    for (int oc = 0; oc < out_ch_; ++oc) {
      const T* gplane = d_pre.data() + static_cast<std::size_t>(oc) * oh * ow;
      T gsum = T(0);
      for (int i = 0; i < oh * ow; ++i) gsum += gplane[i];
      bias_.grad.data[static_cast<std::size_t>(oc)] += gsum;
      for (int ic = 0; ic < in_ch_; ++ic) {
        const T* iplane = cache.input.ptr() + static_cast<std::size_t>(ic) * h * w;
        T* diplane = d_in.ptr() + static_cast<std::size_t>(ic) * h * w;
        const std::size_t wbase =
            (static_cast<std::size_t>(oc) * in_ch_ + ic) * kernel_ * kernel_;
        const T* wk = weight_.value.ptr() + wbase;
        T* dwk = weight_.grad.ptr() + wbase;
        for (int ky = 0; ky < kernel_; ++ky) {
          const int by = ky - pad_y;
          int oy0 = by < 0 ? (-by + stride_ - 1) / stride_ : 0;
          int oy1 = by < h ? std::min(oh, (h - by + stride_ - 1) / stride_) : 0;
          for (int kx = 0; kx < kernel_; ++kx) {
            const int bx = kx - pad_x;
            int ox0 = bx < 0 ? (-bx + stride_ - 1) / stride_ : 0;
            int ox1 = bx < w ? std::min(ow, (w - bx + stride_ - 1) / stride_) : 0;
            const T wv = wk[ky * kernel_ + kx];
            T dw = T(0);
            for (int oy = oy0; oy < oy1; ++oy) {
              const T* irow = iplane + static_cast<std::size_t>(oy * stride_ + by) * w;
              T* dirow = diplane + static_cast<std::size_t>(oy * stride_ + by) * w;
              const T* grow = gplane + static_cast<std::size_t>(oy) * ow;
              const T* src = irow + static_cast<std::ptrdiff_t>(ox0) * stride_ + bx;
              T* dst = dirow + static_cast<std::ptrdiff_t>(ox0) * stride_ + bx;
              for (int ox = ox0; ox < ox1; ++ox, src += stride_, dst += stride_) {
                dw += grow[ox] * *src;
                *dst += grow[ox] * wv;
              }
            }
            dwk[ky * kernel_ + kx] += dw;
          }
        }
      }
    }
  }

  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }

 private:
  Activation act_;
  int in_ch_, out_ch_, kernel_, stride_;
  Param<T> weight_, bias_;
};

// ---------------------------------------------------------------------------
// Max pooling, ceil semantics (trailing partial windows allowed).
template <typename T>
class MaxPool1dLayer final : public Layer<T> {
 public:
  MaxPool1dLayer(int kernel, int stride) : kernel_(kernel), stride_(stride) {}

  std::string kind() const override {
    return "maxpool1d(" + std::to_string(kernel_) + ",s" + std::to_string(stride_) + ")";
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 2 || in[0] < 1 || in[1] < 1) {
      throw ShapeError("maxpool1d: expected [C][L], got " + shape_str(in));
    }
    return {in[0], detail::same_out_len(in[1], stride_)};
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, Mode mode, Rng*,
               LayerCache<T>* cache) const override {
    const auto os = output_shape(in.shape);
    const int ch = in.shape[0], len = in.shape[1], out_len = os[1];
    out.shape = os;
    out.data.assign(static_cast<std::size_t>(ch) * out_len, T{});
    std::vector<std::int32_t> arg(out.data.size());
    for (int c = 0; c < ch; ++c) {
      const T* irow = in.ptr() + static_cast<std::size_t>(c) * len;
      T* orow = out.ptr() + static_cast<std::size_t>(c) * out_len;
      std::int32_t* arow = arg.data() + static_cast<std::size_t>(c) * out_len;
      for (int ol = 0; ol < out_len; ++ol) {
        const int lo = ol * stride_;
        const int hi = std::min(lo + kernel_, len);
        int best = lo;
        for (int i = lo + 1; i < hi; ++i) {
          if (irow[i] > irow[best]) best = i;
        }
        orow[ol] = irow[best];
        arow[ol] = best;
      }
    }
    if (mode != Mode::kEval && cache) {
      cache->in_shape = in.shape;
      cache->argmax = std::move(arg);
    }
  }

  void backward(const Tensor<T>& d_out, const LayerCache<T>& cache,
                Tensor<T>& d_in) override {
    const int ch = cache.in_shape[0], len = cache.in_shape[1];
    const int out_len = d_out.shape[1];
    d_in.shape = cache.in_shape;
    d_in.data.assign(static_cast<std::size_t>(ch) * len, T{});
    for (int c = 0; c < ch; ++c) {
      const T* grow = d_out.ptr() + static_cast<std::size_t>(c) * out_len;
      const std::int32_t* arow = cache.argmax.data() + static_cast<std::size_t>(c) * out_len;
      T* dirow = d_in.ptr() + static_cast<std::size_t>(c) * len;
      for (int ol = 0; ol < out_len; ++ol) dirow[arow[ol]] += grow[ol];
    }
  }

 private:
  int kernel_, stride_;
};

template <typename T>
class MaxPool2dLayer final : public Layer<T> {
 public:
  MaxPool2dLayer(int kernel, int stride) : kernel_(kernel), stride_(stride) {}

  std::string kind() const override {
    return "maxpool2d(" + std::to_string(kernel_) + "x" + std::to_string(kernel_) +
           ",s" + std::to_string(stride_) + ")";
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 3 || in[0] < 1 || in[1] < 1 || in[2] < 1) {
      throw ShapeError("maxpool2d: expected [C][H][W], got " + shape_str(in));
    }
    return {in[0], detail::same_out_len(in[1], stride_),
            detail::same_out_len(in[2], stride_)};
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, Mode mode, Rng*,
               LayerCache<T>* cache) const override {
    const auto os = output_shape(in.shape);
    const int ch = in.shape[0], h = in.shape[1], w = in.shape[2];
    const int oh = os[1], ow = os[2];
    out.shape = os;
    out.data.assign(static_cast<std::size_t>(ch) * oh * ow, T{});
    std::vector<std::int32_t> arg(out.data.size());
    for (int c = 0; c < ch; ++c) {
      const T* iplane = in.ptr() + static_cast<std::size_t>(c) * h * w;
      T* oplane = out.ptr() + static_cast<std::size_t>(c) * oh * ow;
      std::int32_t* aplane = arg.data() + static_cast<std::size_t>(c) * oh * ow;
      for (int oy = 0; oy < oh; ++oy) {
        const int y0 = oy * stride_;
        const int y1 = std::min(y0 + kernel_, h);
        for (int ox = 0; ox < ow; ++ox) {
          const int x0 = ox * stride_;
          const int x1 = std::min(x0 + kernel_, w);
          int best = y0 * w + x0;
          for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
              if (iplane[y * w + x] > iplane[best]) best = y * w + x;
            }
          }
          oplane[oy * ow + ox] = iplane[best];
          aplane[oy * ow + ox] = best;
        }
      }
    }
    if (mode != Mode::kEval && cache) {
      cache->in_shape = in.shape;
      cache->argmax = std::move(arg);
    }
  }

  void backward(const Tensor<T>& d_out, const LayerCache<T>& cache,
                Tensor<T>& d_in) override {
    const int ch = cache.in_shape[0], h = cache.in_shape[1], w = cache.in_shape[2];
    const int oh = d_out.shape[1], ow = d_out.shape[2];
    d_in.shape = cache.in_shape;
    d_in.data.assign(static_cast<std::size_t>(ch) * h * w, T{});
    for (int c = 0; c < ch; ++c) {
      const T* gplane = d_out.ptr() + static_cast<std::size_t>(c) * oh * ow;
      const std::int32_t* aplane = cache.argmax.data() + static_cast<std::size_t>(c) * oh * ow;
      T* diplane = d_in.ptr() + static_cast<std::size_t>(c) * h * w;
      for (int i = 0; i < oh * ow; ++i) diplane[aplane[i]] += gplane[i];
    }
  }

 private:
  int kernel_, stride_;
};

// ---------------------------------------------------------------------------
// Inverted dropout: identity in eval, scaled keep-mask in train.
template <typename T>
class DropoutLayer final : public Layer<T> {
 public:
  explicit DropoutLayer(double rate) : rate_(rate) {
    if (rate < 0.0 || rate >= 1.0) {
      throw ConfigError("dropout rate must be in [0, 1)");
    }
  }

  std::string kind() const override { return "dropout(" + std::to_string(rate_) + ")"; }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    return in;
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, Mode mode, Rng* rng,
               LayerCache<T>* cache) const override {
    out = in;
    if (mode == Mode::kEval || rate_ == 0.0) return;
    if (mode == Mode::kTrain) {
      if (!rng) throw ShapeError("dropout: train-mode forward requires an RNG");
      const double keep = 1.0 - rate_;
      const T scale = static_cast<T>(1.0 / keep);
      if (cache) {
        cache->in_shape = in.shape;
        cache->mask.shape = in.shape;
        cache->mask.data.assign(in.data.size(), T{});
        for (std::size_t i = 0; i < in.data.size(); ++i) {
          const T m = rng->bernoulli(keep) ? scale : T(0);
          cache->mask.data[i] = m;
          out.data[i] = in.data[i] * m;
        }
      } else {
        // Cacheless train forward (no backward will follow); the RNG draw
        // sequence is identical either way.
        for (std::size_t i = 0; i < in.data.size(); ++i) {
          out.data[i] = in.data[i] * (rng->bernoulli(keep) ? scale : T(0));
        }
      }
      return;
    }
    // kTrainReplay reuses the mask recorded by the train-mode forward.
    if (!cache || cache->mask.data.size() != in.data.size()) {
      throw ShapeError("dropout: replay mask missing or mismatched");
    }
    for (std::size_t i = 0; i < in.data.size(); ++i) {
      out.data[i] = in.data[i] * cache->mask.data[i];
    }
  }

  void backward(const Tensor<T>& d_out, const LayerCache<T>& cache,
                Tensor<T>& d_in) override {
    d_in = d_out;
    if (rate_ == 0.0 || cache.mask.data.empty()) return;
    for (std::size_t i = 0; i < d_in.data.size(); ++i) {
      d_in.data[i] *= cache.mask.data[i];
    }
  }

  double rate() const { return rate_; }

 private:
  double rate_;
};

// ---------------------------------------------------------------------------
// LSTM over a [T][D] sequence, returning the full [T][H] hidden sequence.
// A [C][L] or [D] input is treated as a single step of C*L (or D) features.
// Gate order i, f, g, o; forget-gate bias initialized to 1.
template <typename T>
class LstmLayer final : public Layer<T> {
 public:
  struct State {
    std::vector<T> h, c;
  };

  LstmLayer(std::string name, int input_size, int hidden)
      : input_(input_size),
        hidden_(hidden),
        wx_(name + ".Wx", {4 * hidden, input_size}),
        wh_(name + ".Wh", {4 * hidden, hidden}),
        bias_(name + ".b", {4 * hidden}) {}

  void init(Rng& rng) {
    const T bx = std::sqrt(T(6) / T(input_ + hidden_));
    for (T& w : wx_.value.data) w = static_cast<T>(rng.uniform(-bx, bx));
    const T bh = std::sqrt(T(6) / T(2 * hidden_));
    for (T& w : wh_.value.data) w = static_cast<T>(rng.uniform(-bh, bh));
    bias_.value.zero();
    for (int i = hidden_; i < 2 * hidden_; ++i) {
      bias_.value.data[static_cast<std::size_t>(i)] = T(1);  // forget gate
    }
  }

  std::string kind() const override { return "lstm(" + std::to_string(hidden_) + ")"; }

  int hidden() const { return hidden_; }
  int input_size() const { return input_; }

  State zero_state() const {
    return State{std::vector<T>(static_cast<std::size_t>(hidden_), T{}),
                 std::vector<T>(static_cast<std::size_t>(hidden_), T{})};
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    const int steps = seq_steps(in);
    return {steps, hidden_};
  }

  // One recurrent step; x must hold input_size values.
  void step_forward(const T* x, State& state, LstmStepCache<T>* cache) const {
    std::vector<T> z(static_cast<std::size_t>(4 * hidden_));
    const T* wx = wx_.value.ptr();
    const T* wh = wh_.value.ptr();
    for (int r = 0; r < 4 * hidden_; ++r) {
      T acc = bias_.value.data[static_cast<std::size_t>(r)];
      const T* wxr = wx + static_cast<std::size_t>(r) * input_;
      for (int i = 0; i < input_; ++i) acc += wxr[i] * x[i];
      const T* whr = wh + static_cast<std::size_t>(r) * hidden_;
      for (int i = 0; i < hidden_; ++i) acc += whr[i] * state.h[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(r)] = acc;
    }
    if (cache) {
      cache->x.assign(x, x + input_);
      cache->h_prev = state.h;
      cache->c_prev = state.c;
    }
    std::vector<T> gi(static_cast<std::size_t>(hidden_)), gf(static_cast<std::size_t>(hidden_)),
        gg(static_cast<std::size_t>(hidden_)), go(static_cast<std::size_t>(hidden_));
    for (int i = 0; i < hidden_; ++i) {
      gi[static_cast<std::size_t>(i)] = detail::stable_sigmoid(z[static_cast<std::size_t>(i)]);
      gf[static_cast<std::size_t>(i)] =
          detail::stable_sigmoid(z[static_cast<std::size_t>(hidden_ + i)]);
      gg[static_cast<std::size_t>(i)] = std::tanh(z[static_cast<std::size_t>(2 * hidden_ + i)]);
      go[static_cast<std::size_t>(i)] =
          detail::stable_sigmoid(z[static_cast<std::size_t>(3 * hidden_ + i)]);
    }
    for (int i = 0; i < hidden_; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      state.c[ii] = gf[ii] * state.c[ii] + gi[ii] * gg[ii];
    }
    std::vector<T> ct(static_cast<std::size_t>(hidden_));
    for (int i = 0; i < hidden_; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      ct[ii] = std::tanh(state.c[ii]);
      state.h[ii] = go[ii] * ct[ii];
    }
    if (cache) {
      cache->gate_i = std::move(gi);
      cache->gate_f = std::move(gf);
      cache->gate_g = std::move(gg);
      cache->gate_o = std::move(go);
      cache->c_tanh = std::move(ct);
    }
  }

  // Backward for one step. d_h: total gradient on h_t (upstream + recurrent);
  // d_c_carry: gradient carried from step t+1's cell path, updated in place
  // to the t-1 carry. d_x / d_h_prev receive this step's input gradients.
  void step_backward(const LstmStepCache<T>& cache, const T* d_h,
                     std::vector<T>& d_c_carry, T* d_x, T* d_h_prev) {
    const int h = hidden_;
    std::vector<T> dz(static_cast<std::size_t>(4 * h));
    for (int i = 0; i < h; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      const T dho = d_h[i];
      const T d_o = dho * cache.c_tanh[ii];
      T d_c = dho * cache.gate_o[ii] * (T(1) - cache.c_tanh[ii] * cache.c_tanh[ii]) +
              d_c_carry[ii];
      const T d_i = d_c * cache.gate_g[ii];
      const T d_g = d_c * cache.gate_i[ii];
      const T d_f = d_c * cache.c_prev[ii];
      d_c_carry[ii] = d_c * cache.gate_f[ii];
      dz[ii] = d_i * cache.gate_i[ii] * (T(1) - cache.gate_i[ii]);
      dz[static_cast<std::size_t>(h + i)] = d_f * cache.gate_f[ii] * (T(1) - cache.gate_f[ii]);
      dz[static_cast<std::size_t>(2 * h + i)] = d_g * (T(1) - cache.gate_g[ii] * cache.gate_g[ii]);
      dz[static_cast<std::size_t>(3 * h + i)] = d_o * cache.gate_o[ii] * (T(1) - cache.gate_o[ii]);
    }
    const T* wx = wx_.value.ptr();
    const T* wh = wh_.value.ptr();
    T* dwx = wx_.grad.ptr();
    T* dwh = wh_.grad.ptr();
    for (int r = 0; r < 4 * h; ++r) {
      const T g = dz[static_cast<std::size_t>(r)];
      bias_.grad.data[static_cast<std::size_t>(r)] += g;
      if (g == T(0)) continue;
      T* dwxr = dwx + static_cast<std::size_t>(r) * input_;
      const T* wxr = wx + static_cast<std::size_t>(r) * input_;
      for (int i = 0; i < input_; ++i) {
        dwxr[i] += g * cache.x[static_cast<std::size_t>(i)];
        d_x[i] += g * wxr[i];
      }
      T* dwhr = dwh + static_cast<std::size_t>(r) * hidden_;
      const T* whr = wh + static_cast<std::size_t>(r) * hidden_;
      for (int i = 0; i < hidden_; ++i) {
        dwhr[i] += g * cache.h_prev[static_cast<std::size_t>(i)];
        d_h_prev[i] += g * whr[i];
      }
    }
  }

  void forward(const Tensor<T>& in, Tensor<T>& out, Mode mode, Rng*,
               LayerCache<T>* cache) const override {
    const int steps = seq_steps(in.shape);
    out.shape = {steps, hidden_};
    out.data.assign(static_cast<std::size_t>(steps) * hidden_, T{});
    State st = zero_state();
    if (mode != Mode::kEval && cache) {
      cache->in_shape = in.shape;
      cache->steps.assign(static_cast<std::size_t>(steps), LstmStepCache<T>{});
    }
    for (int t = 0; t < steps; ++t) {
      LstmStepCache<T>* sc =
          (mode != Mode::kEval && cache) ? &cache->steps[static_cast<std::size_t>(t)] : nullptr;
      step_forward(in.ptr() + static_cast<std::size_t>(t) * input_, st, sc);
      std::copy(st.h.begin(), st.h.end(),
                out.ptr() + static_cast<std::size_t>(t) * hidden_);
    }
  }

  void backward(const Tensor<T>& d_out, const LayerCache<T>& cache,
                Tensor<T>& d_in) override {
    const int steps = static_cast<int>(cache.steps.size());
    d_in.shape = cache.in_shape;
    d_in.data.assign(static_cast<std::size_t>(steps) * input_, T{});
    std::vector<T> d_h(static_cast<std::size_t>(hidden_), T{});
    std::vector<T> d_c(static_cast<std::size_t>(hidden_), T{});
    std::vector<T> d_h_total(static_cast<std::size_t>(hidden_));
    for (int t = steps - 1; t >= 0; --t) {
      for (int i = 0; i < hidden_; ++i) {
        d_h_total[static_cast<std::size_t>(i)] =
            d_out.data[static_cast<std::size_t>(t) * hidden_ + i] +
            d_h[static_cast<std::size_t>(i)];
      }
      std::fill(d_h.begin(), d_h.end(), T{});
      step_backward(cache.steps[static_cast<std::size_t>(t)], d_h_total.data(), d_c,
                    d_in.ptr() + static_cast<std::size_t>(t) * input_, d_h.data());
    }
  }

  std::vector<Param<T>*> params() override { return {&wx_, &wh_, &bias_}; }

 private:
  int seq_steps(const std::vector<int>& in) const {
    if (in.size() == 2 && in[1] == input_) return in[0];
    std::size_t n = 1;
    for (int d : in) n *= static_cast<std::size_t>(d);
    if (n == static_cast<std::size_t>(input_)) return 1;  // single flattened step
    throw ShapeError("lstm: input " + shape_str(in) + " incompatible with width " +
                     std::to_string(input_));
  }

  int input_, hidden_;
  Param<T> wx_, wh_, bias_;
};

}  // namespace linksense::nn
