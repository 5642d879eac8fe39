// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "linksense/nn/adam.hpp"
#include "linksense/nn/architectures.hpp"
#include "linksense/nn/checkpoint.hpp"
#include "linksense/nn/grad_check.hpp"

using namespace linksense;
using namespace linksense::nn;

namespace {

Tensor<double> random_tensor(const std::vector<int>& shape, std::uint64_t seed) {
  Tensor<double> t(shape);
  Rng rng(seed);
  for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

}  // namespace

TEST_CASE("architectures: layer counts and head shapes") {
  auto cnn1 = build_network<float>(ArchId::kCnn1, {2, 32, 32}, "c1", 1);
  CHECK(cnn1.num_layers() == 5);
  CHECK(cnn1.output_shape() == std::vector<int>{5});
  auto* head1 = dynamic_cast<DenseLayer<float>*>(cnn1.layer(4));
  REQUIRE(head1 != nullptr);
  CHECK(head1->out_features() == 5);
  CHECK(head1->activation() == Activation::kSoftmax);

  auto cnn2 = build_network<float>(ArchId::kCnn2, {2, 32, 32}, "c2", 1);
  CHECK(cnn2.num_layers() == 7);
  CHECK(cnn2.output_shape() == std::vector<int>{5});

  auto cnn3 = build_network<float>(ArchId::kCnn3, {2, 32, 32}, "c3", 1);
  CHECK(cnn3.num_layers() == 10);
  CHECK(cnn3.output_shape() == std::vector<int>{5});

  auto cnn4 = build_network<float>(ArchId::kCnn4, {2, 32, 32}, "c4", 1);
  CHECK(cnn4.num_layers() == 15);
  CHECK(cnn4.output_shape() == std::vector<int>{5});
  auto* fc1 = dynamic_cast<DenseLayer<float>*>(cnn4.layer(12));
  REQUIRE(fc1 != nullptr);
  CHECK(fc1->out_features() == 400);
  CHECK(fc1->activation() == Activation::kRelu);
  auto* fc2 = dynamic_cast<DenseLayer<float>*>(cnn4.layer(14));
  REQUIRE(fc2 != nullptr);
  CHECK(fc2->out_features() == 5);
  CHECK(fc2->activation() == Activation::kSoftmax);

  auto mixed = build_network<float>(ArchId::kMixedCnnLstm, {8, 256}, "m", 1);
  CHECK(mixed.num_layers() == 8);
  CHECK(mixed.output_shape() == std::vector<int>{1, 128});

  auto policy = build_network<float>(ArchId::kPolicyHead, {128}, "p", 1, 4);
  CHECK(policy.output_shape() == std::vector<int>{4});
  auto policy_sm = build_network<float>(ArchId::kPolicyHeadSoftmax, {128}, "ps", 1, 4);
  CHECK(policy_sm.output_shape() == std::vector<int>{4});
}

TEST_CASE("architectures: construction errors carry a shape trace") {
  try {
    auto bad = build_network<float>(ArchId::kCnn1, {32, 32}, "bad", 1);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    CHECK(what.find("rank-3") != std::string::npos);
    CHECK(what.find("[32x32]") != std::string::npos);
  }
  CHECK_THROWS_AS(build_network<float>(ArchId::kPolicyHead, {128}, "p", 1, 0),
                  ConfigError);
  CHECK_THROWS_AS(build_network<float>(ArchId::kMixedCnnLstm, {8}, "m", 1),
                  ShapeError);
}

TEST_CASE("forward: zero dense + relu maps to zero; softmax of zeros is uniform") {
  Network<float> net("t", {3});
  net.add(std::make_unique<DenseLayer<float>>("t.fc", 3, 4, Activation::kRelu));
  Tensor<float> x({3});
  x.data = {1.0f, -2.0f, 0.5f};
  const Tensor<float> y = net.forward(x, Mode::kEval, nullptr, nullptr);
  for (float v : y.data) CHECK(v == 0.0f);

  Network<float> sm("s", {5});
  sm.add(std::make_unique<DenseLayer<float>>("s.fc", 5, 5, Activation::kSoftmax));
  Tensor<float> z({5});
  const Tensor<float> p = sm.forward(z, Mode::kEval, nullptr, nullptr);
  for (float v : p.data) CHECK(v == doctest::Approx(0.2f));
}

TEST_CASE("forward: sigmoid output strictly inside (0,1); softmax sums to one") {
  auto head = build_policy_head<float>(4, false, "ph", 3);
  Tensor<float> h({128});
  Rng rng(4);
  for (float& v : h.data) v = static_cast<float>(rng.uniform(-2.0, 2.0));
  const Tensor<float> u = head.forward(h, Mode::kEval, nullptr, nullptr);
  for (float v : u.data) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }

  auto cnn = build_network<float>(ArchId::kCnn1, {2, 16, 16}, "c", 9);
  Tensor<float> img({2, 16, 16});
  for (float& v : img.data) v = static_cast<float>(rng.uniform(0.0, 1.0));
  const Tensor<float> p = cnn.forward(img, Mode::kEval, nullptr, nullptr);
  double sum = 0.0;
  for (float v : p.data) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("numerical safety: extreme logits produce no NaN") {
  Network<double> sm("s", {4});
  auto dense = std::make_unique<DenseLayer<double>>("s.fc", 4, 4, Activation::kSoftmax);
  // Identity weights scaled so logits reach +-1e4.
  for (int i = 0; i < 4; ++i) dense->weight().value.data[static_cast<std::size_t>(i * 4 + i)] = 1.0;
  sm.add(std::move(dense));
  Tensor<double> x({4});
  x.data = {1e4, -1e4, 5e3, 0.0};
  const Tensor<double> p = sm.forward(x, Mode::kEval, nullptr, nullptr);
  double sum = 0.0;
  for (double v : p.data) {
    CHECK(std::isfinite(v));
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  Network<double> sg("g", {2});
  auto d2 = std::make_unique<DenseLayer<double>>("g.fc", 2, 2, Activation::kSigmoid);
  d2->weight().value.data = {1.0, 0.0, 0.0, 1.0};
  sg.add(std::move(d2));
  Tensor<double> z({2});
  z.data = {1e4, -1e4};
  const Tensor<double> s = sg.forward(z, Mode::kEval, nullptr, nullptr);
  CHECK(std::isfinite(s.data[0]));
  CHECK(std::isfinite(s.data[1]));
  CHECK(s.data[0] == doctest::Approx(1.0));
  CHECK(s.data[1] == doctest::Approx(0.0));
}

TEST_CASE("shape errors name the failing layer") {
  auto cnn = build_network<float>(ArchId::kCnn1, {2, 16, 16}, "clf", 9);
  Tensor<float> wrong({3, 16, 16});
  try {
    (void)cnn.forward(wrong, Mode::kEval, nullptr, nullptr);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  Param<float> p("w", {4});
  p.value.data = {1.0f, -2.0f, 0.5f, 3.0f};
  const auto before = p.value.data;
  std::vector<Param<float>*> params = {&p};
  int step = 0;
  HyperParams hp;
  adam_step(params, step, hp);
  CHECK(p.value.data == before);
  CHECK(step == 1);
}

TEST_CASE("adam: first step moves by ~lr * sign(gradient)") {
  Param<double> p("w", {3});
  p.value.data = {0.0, 0.0, 0.0};
  p.grad.data = {10.0, -0.5, 2.0};  // |g| >> eps
  std::vector<Param<double>*> params = {&p};
  int step = 0;
  HyperParams hp;
  hp.lr = 1e-3;
  adam_step(params, step, hp);
  CHECK(p.value.data[0] == doctest::Approx(-1e-3).epsilon(1e-6));
  CHECK(p.value.data[1] == doctest::Approx(1e-3).epsilon(1e-6));
  CHECK(p.value.data[2] == doctest::Approx(-1e-3).epsilon(1e-6));
  // Gradients zeroed afterwards.
  for (double g : p.grad.data) CHECK(g == 0.0);
}

TEST_CASE("adam: two steps differ from one double-sized step") {
  auto run = [](int n_steps, double g) {
    Param<double> p("w", {1});
    std::vector<Param<double>*> params = {&p};
    int step = 0;
    HyperParams hp;
    hp.lr = 0.01;
    for (int i = 0; i < n_steps; ++i) {
      p.grad.data[0] = g;
      adam_step(params, step, hp);
    }
    return p.value.data[0];
  };
  const double twice = run(2, 1.0);
  const double once_double = run(1, 2.0);
  CHECK(twice != once_double);
}

TEST_CASE("adam: NaN gradient aborts with the parameter name") {
  Param<float> p("layer9.W", {2});
  p.grad.data = {0.0f, std::nanf("")};
  std::vector<Param<float>*> params = {&p};
  int step = 0;
  HyperParams hp;
  try {
    adam_step(params, step, hp);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer9.W") != std::string::npos);
  }
  CHECK(step == 0);
}

TEST_CASE("dropout: eval is RNG independent; train expectation matches eval") {
  DropoutLayer<float> drop(0.4);
  Tensor<float> x({100});
  for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = 1.0f;

  Tensor<float> out;
  drop.forward(x, out, Mode::kEval, nullptr, nullptr);
  CHECK(out.data == x.data);

  // 10k Monte-Carlo draws; the grand mean concentrates around 1 with
  // std sqrt(rate/(1-rate) / (draws * n)).
  Rng rng(2024);
  double grand = 0.0;
  const int draws = 10000;
  LayerCache<float> cache;
  for (int d = 0; d < draws; ++d) {
    drop.forward(x, out, Mode::kTrain, &rng, &cache);
    for (float v : out.data) grand += v;
  }
  grand /= static_cast<double>(draws) * static_cast<double>(x.data.size());
  const double std_mean =
      std::sqrt((0.4 / 0.6) / (static_cast<double>(draws) * x.data.size()));
  CHECK(std::abs(grand - 1.0) < 3.0 * std_mean);
}

TEST_CASE("gradients: dense closed form") {
  // Single dense layer, squared-error head: dL/dW = 2*(Wx+b-y) x^T.
  const int in = 6, out = 3;
  Network<double> net("d", {in});
  auto dense = std::make_unique<DenseLayer<double>>("d.fc", in, out, Activation::kNone);
  Rng rng(11);
  dense->init(rng);
  auto* dense_ptr = dense.get();
  net.add(std::move(dense));

  const Tensor<double> x = random_tensor({in}, 12);
  const Tensor<double> target = random_tensor({out}, 13);

  NetCache<double> cache;
  const Tensor<double> y = net.forward(x, Mode::kTrain, nullptr, &cache);
  Tensor<double> d_out({out});
  for (int o = 0; o < out; ++o) {
    d_out.data[static_cast<std::size_t>(o)] =
        2.0 * (y.data[static_cast<std::size_t>(o)] - target.data[static_cast<std::size_t>(o)]);
  }
  net.zero_grads();
  (void)net.backward(d_out, cache);

  for (int o = 0; o < out; ++o) {
    for (int i = 0; i < in; ++i) {
      const double expect = 2.0 *
                            (y.data[static_cast<std::size_t>(o)] -
                             target.data[static_cast<std::size_t>(o)]) *
                            x.data[static_cast<std::size_t>(i)];
      CHECK(dense_ptr->weight().grad.data[static_cast<std::size_t>(o * in + i)] ==
            doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradients: grad_check is deterministic") {
  auto net1 = build_network<double>(ArchId::kCnn1, {2, 8, 8}, "g", 5);
  auto net2 = build_network<double>(ArchId::kCnn1, {2, 8, 8}, "g", 5);
  const Tensor<double> in = random_tensor({2, 8, 8}, 6);
  const auto r1 = grad_check(net1, in, 42);
  const auto r2 = grad_check(net2, in, 42);
  CHECK(r1.max_rel_error == r2.max_rel_error);
  CHECK(r1.max_rel_error < 1e-4);
}

namespace {

// Deliberately corrupted LSTM wrapper: sign-flips the input-weight
// gradients. Negative control for the gradient checker.
class SignFlippedLstm final : public Layer<double> {
 public:
  SignFlippedLstm(int input, int hidden) : inner_("faulty.lstm", input, hidden) {
    Rng rng(3);
    inner_.init(rng);
  }
  std::string kind() const override { return inner_.kind(); }
  std::vector<int> output_shape(const std::vector<int>& in) const override {
    return inner_.output_shape(in);
  }
  void forward(const Tensor<double>& in, Tensor<double>& out, Mode mode, Rng* rng,
               LayerCache<double>* cache) const override {
    inner_.forward(in, out, mode, rng, cache);
  }
  void backward(const Tensor<double>& d_out, const LayerCache<double>& cache,
                Tensor<double>& d_in) override {
    inner_.backward(d_out, cache, d_in);
    Param<double>* wx = inner_.params()[0];
    for (double& g : wx->grad.data) g = -g;
  }
  std::vector<Param<double>*> params() override { return inner_.params(); }

 private:
  LstmLayer<double> inner_;
};

}  // namespace

TEST_CASE("gradients: injected sign flip is caught and named") {
  Network<double> net("faulty", {3, 4});
  net.add(std::make_unique<SignFlippedLstm>(4, 3));
  const Tensor<double> in = random_tensor({3, 4}, 8);
  const auto r = grad_check(net, in, 42);
  CHECK(r.max_rel_error > 1e-4);
  CHECK(r.worst_param.find("lstm") != std::string::npos);
  CHECK(r.worst_param.find("Wx") != std::string::npos);
}

TEST_CASE("lstm: hidden state stays inside (-1, 1)") {
  LstmLayer<float> lstm("l", 6, 8);
  Rng rng(9);
  lstm.init(rng);
  auto state = lstm.zero_state();
  std::vector<float> x(6);
  for (int t = 0; t < 20; ++t) {
    for (float& v : x) v = static_cast<float>(rng.uniform(-5.0, 5.0));
    lstm.step_forward(x.data(), state, nullptr);
    for (float h : state.h) {
      CHECK(h > -1.0f);
      CHECK(h < 1.0f);
    }
  }
}

TEST_CASE("lstm: sequence forward equals repeated steps") {
  LstmLayer<float> lstm("l", 4, 5);
  Rng rng(10);
  lstm.init(rng);
  Tensor<float> seq({3, 4});
  for (float& v : seq.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  Tensor<float> out;
  lstm.forward(seq, out, Mode::kEval, nullptr, nullptr);

  auto state = lstm.zero_state();
  for (int t = 0; t < 3; ++t) {
    lstm.step_forward(seq.ptr() + static_cast<std::size_t>(t) * 4, state, nullptr);
    for (int i = 0; i < 5; ++i) {
      CHECK(out.data[static_cast<std::size_t>(t) * 5 + i] ==
            doctest::Approx(state.h[static_cast<std::size_t>(i)]).epsilon(1e-6));
    }
  }
}

TEST_CASE("checkpoint: round trip is bit exact") {
  auto net = build_network<float>(ArchId::kCnn2, {2, 16, 16}, "clf", 31);
  const auto dir = std::filesystem::temp_directory_path() / "linksense_ckpt_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  auto params = net.params();
  save_checkpoint(dir / "checkpoint", params);
  const std::uint64_t h1 = checkpoint_hash(dir / "checkpoint");

  auto net2 = build_network<float>(ArchId::kCnn2, {2, 16, 16}, "clf", 99);
  auto params2 = net2.params();
  load_checkpoint(dir / "checkpoint", params2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    CHECK(params[i]->value.data == params2[i]->value.data);
  }
  save_checkpoint(dir / "checkpoint2", params2);
  CHECK(checkpoint_hash(dir / "checkpoint2") == h1);

  // Wrong-architecture load fails by name/shape.
  auto net3 = build_network<float>(ArchId::kCnn1, {2, 16, 16}, "clf", 7);
  auto params3 = net3.params();
  CHECK_THROWS_AS(load_checkpoint(dir / "checkpoint", params3), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("training trajectory is deterministic for a fixed seed") {
  auto run = [] {
    auto net = build_network<float>(ArchId::kCnn1, {2, 8, 8}, "clf", 17);
    HyperParams hp;
    hp.lr = 1e-3;
    int step = 0;
    Rng data_rng(55);
    Rng dropout_rng(66);
    for (int iter = 0; iter < 10; ++iter) {
      Tensor<float> x({2, 8, 8});
      for (float& v : x.data) v = static_cast<float>(data_rng.uniform(0.0, 1.0));
      NetCache<float> cache;
      const Tensor<float> p = net.forward(x, Mode::kTrain, &dropout_rng, &cache);
      Tensor<float> d({5});
      d.data[static_cast<std::size_t>(iter % 5)] = -1.0f / std::max(p.data[static_cast<std::size_t>(iter % 5)], 1e-7f);
      (void)net.backward(d, cache);
      auto params = net.params();
      adam_step(params, step, hp);
    }
    std::vector<float> flat;
    for (auto* p : net.params()) {
      flat.insert(flat.end(), p->value.data.begin(), p->value.data.end());
    }
    return flat;
  };
  CHECK(run() == run());
}
