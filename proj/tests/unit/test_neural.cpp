#include <cmath>
#include <fstream>
#include <stdexcept>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/gradient_suite.hpp"
#include "tiyuntsong/neural.hpp"

using namespace tiyuntsong;
using namespace tiyuntsong::nn;
using testing::random_tensor;

namespace {

Sequential single(Layer layer) {
  std::vector<Layer> l;
  l.push_back(std::move(layer));
  return Sequential(std::move(l));
}

Sequential small_stack(Rng& rng) {
  std::vector<Layer> l;
  l.emplace_back(Dense(5, 4, rng));
  l.emplace_back(BatchNorm(4));
  l.emplace_back(Activation(ActivationKind::kLeakyRelu));
  l.emplace_back(Dense(4, 3, rng));
  l.emplace_back(Activation(ActivationKind::kSoftmax));
  return Sequential(std::move(l));
}

}  // namespace

TEST_SUITE("neural") {
  TEST_CASE("identity dense layer") {
    Sequential net = single(Dense(2, 2));
    auto p = net.params();
    p[0]->value = Tensor({2, 2}, {1, 0, 0, 1});
    const Tensor x({1, 2}, {3, -4});
    CHECK(net.infer(x) == x);
  }

  TEST_CASE("valid convolution with a box filter") {
    Sequential net = single(Conv1D(1, 1, 3));
    net.params()[0]->value = Tensor({1, 3}, {1, 1, 1});
    const Tensor y = net.infer(Tensor({1, 1, 4}, {1, 2, 3, 4}));
    CHECK(y.shape() == std::vector<std::size_t>{1, 1, 2});
    CHECK(y[0] == 6.0f);
    CHECK(y[1] == 9.0f);
  }

  TEST_CASE("softmax rows are shifted and normalized") {
    const Tensor p = softmax_rows(Tensor({2, 3}, {0, 0, 0, 1000, 1000, 0}));
    CHECK(p[0] == doctest::Approx(1.0 / 3.0));
    CHECK(p[3] == doctest::Approx(0.5));
    CHECK(p[5] == doctest::Approx(0.0));
    CHECK(p.all_finite());
  }

  TEST_CASE("a single weight gradient of a squared error") {
    Sequential net = single(Dense(1, 1));
    net.params()[0]->value = Tensor({1, 1}, {2.0f});
    const Tensor x({1, 1}, {1.0f});
    const Tensor y = net.forward(x, Mode::kTrain);
    const LossGrad lg = sum_squared_error(y, Tensor({1, 1}, {-2.0f}));
    CHECK(lg.loss == 16.0);
    net.zero_grad();
    net.backward(lg.grad);
    CHECK(net.params()[0]->grad[0] == 8.0f);
    CHECK(net.params()[1]->grad[0] == 8.0f);
    CHECK(mean_squared_error(Tensor({2, 1}, {1, 3}), Tensor({2, 1}, {0, 0})).loss == 5.0);
  }

  TEST_CASE("finite differences agree for every layer kind") {
    for (std::uint64_t seed = 0; seed < 3; ++seed)
      for (const auto& c : testing::layer_checks(seed)) {
        CAPTURE(c.name);
        CAPTURE(c.result.checked);
        CAPTURE(c.result.kinks);
        CHECK(c.result.kinks <= c.result.checked);
        CHECK(c.result.checked > 0);
        CHECK(c.result.relative_error() < 1e-2);
      }
  }

  TEST_CASE("relu passes no gradient below zero and leaky relu passes the slope") {
    Sequential relu = single(Activation(ActivationKind::kRelu));
    relu.forward(Tensor({1, 2}, {-1, 2}), Mode::kTrain);
    const Tensor g = relu.backward(Tensor({1, 2}, {5, 5}));
    CHECK(g[0] == 0.0f);
    CHECK(g[1] == 5.0f);
    Sequential leaky = single(Activation(ActivationKind::kLeakyRelu));
    leaky.forward(Tensor({1, 1}, {-1}), Mode::kTrain);
    CHECK(leaky.backward(Tensor({1, 1}, {1}))[0] == doctest::Approx(0.2));
  }

  TEST_CASE("adam's first step moves each parameter by the learning rate against its gradient") {
    Param p{"w", Tensor({3}, {1, 1, 1}), Tensor({3}, {0.5f, -3.0f, 0.0f})};
    Optimizer opt = Optimizer::adam();
    Param* ps[] = {&p};
    opt.step(ps, 1e-3);
    CHECK(p.value[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
    CHECK(p.value[1] == doctest::Approx(1.0 + 1e-3).epsilon(1e-6));
    CHECK(p.value[2] == 1.0f);
    CHECK(opt.steps() == 1);
  }

  TEST_CASE("rmsprop's first step is lr / sqrt(1 - decay)") {
    Param p{"w", Tensor({1}, {0.0f}), Tensor({1}, {2.0f})};
    Optimizer opt = Optimizer::rmsprop();
    Param* ps[] = {&p};
    opt.step(ps, 1e-4);
    CHECK(p.value[0] == doctest::Approx(-3.1623e-4).epsilon(1e-4));
  }

  TEST_CASE("batch normalization statistics") {
    Sequential net = single(BatchNorm(2));
    const Tensor x({4, 2}, {1, 10, 2, 20, 3, 30, 4, 40});
    const Tensor y = net.forward(x, Mode::kTrain);
    for (std::size_t j = 0; j < 2; ++j) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        mean += y.at(i, j) / 4.0;
        sq += y.at(i, j) * y.at(i, j) / 4.0;
      }
      CHECK(mean == doctest::Approx(0.0).scale(1.0));
      CHECK(sq == doctest::Approx(1.0).epsilon(1e-4));
    }
    const auto state = net.state();
    CHECK((*state[2])[0] == doctest::Approx(0.25));
    CHECK((*state[3])[0] == doctest::Approx(0.9 + 0.1 * 1.25));
    CHECK((*state[3])[1] == doctest::Approx(0.9 + 0.1 * 125.0));

    const Tensor before = *state[2];
    net.forward(x, Mode::kTrain, /*update_stats=*/false);
    net.infer(x, Mode::kTrain);
    CHECK(*state[2] == before);
    const Tensor inferred = net.infer(Tensor({1, 2}, {0.25f, 2.5f}));
    CHECK(inferred[0] == doctest::Approx(0.0).scale(1.0));
  }

  TEST_CASE("checkpoints round-trip parameters and running statistics") {
    testing::TempDir dir("ckpt");
    Rng rng(4);
    Sequential net = small_stack(rng);
    net.forward(random_tensor({6, 5}, rng), Mode::kTrain);
    save(net, dir / "net.ckpt");
    const Sequential back = load_sequential(dir / "net.ckpt");
    const auto a = net.state();
    const auto b = back.state();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);
    const Tensor x = random_tensor({3, 5}, rng);
    CHECK(net.infer(x) == back.infer(x));
  }

  TEST_CASE("corrupt checkpoints are rejected") {
    testing::TempDir dir("badckpt");
    testing::write_file(dir / "magic.ckpt", "NOPE\x01\x00\x00\x00");
    CHECK_THROWS_AS(read_checkpoint(dir / "magic.ckpt"), std::runtime_error);

    Rng rng(1);
    save(small_stack(rng), dir / "good.ckpt");
    std::string bytes = testing::read_file(dir / "good.ckpt");
    std::string versioned = bytes;
    versioned[4] = static_cast<char>(kCheckpointVersion + 1);
    testing::write_file(dir / "version.ckpt", versioned);
    CHECK_THROWS_WITH_AS(read_checkpoint(dir / "version.ckpt"), doctest::Contains("version"), std::runtime_error);
    testing::write_file(dir / "short.ckpt", bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_checkpoint(dir / "short.ckpt"), std::runtime_error);
    CHECK_THROWS_AS(read_checkpoint(dir / "missing.ckpt"), std::runtime_error);
  }

  TEST_CASE("assigning state checks shapes") {
    Rng rng(2);
    Sequential net = small_stack(rng);
    auto state = net.state();
    std::vector<Tensor> wrong;
    for (const Tensor* t : state) wrong.push_back(*t);
    wrong[0] = Tensor({1, 1});
    CHECK_THROWS(assign_state(state, wrong));
    wrong.pop_back();
    CHECK_THROWS(assign_state(state, wrong));
  }
}
