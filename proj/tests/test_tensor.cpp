#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <iterator>

#include "mmnet/autodiff.hpp"
#include "mmnet/checkpoint.hpp"
#include "mmnet/grad_check.hpp"
#include "mmnet/ops.hpp"
#include "gradsuite.hpp"
#include "oracles.hpp"

using namespace mmnet;

TEST_CASE("conv2d identity kernel") {
  Rng rng(1);
  FeatureMap in = oracle::random_map(5, 4, 1, rng);
  ConvParams p;
  p.kernel = Tensor::kernel(1, 1, 1, 1);
  p.kernel[0] = 1.0;
  p.bias = Tensor::vec(1);
  FeatureMap out = conv2d(in, p);
  CHECK(oracle::max_abs_diff(in, out) == 0.0);
}

TEST_CASE("conv2d zero kernel gives constant bias map") {
  Rng rng(2);
  FeatureMap in = oracle::random_map(4, 4, 3, rng);
  ConvParams p;
  p.kernel = Tensor::kernel(2, 3, 3, 3);
  p.bias = Tensor::vec(2);
  p.bias[0] = 0.5;
  p.bias[1] = -2.0;
  p.padding = 1;
  FeatureMap out = conv2d(in, p);
  for (int y = 0; y < out.h(); ++y)
    for (int x = 0; x < out.w(); ++x) {
      CHECK(out.at(y, x, 0) == 0.5);
      CHECK(out.at(y, x, 1) == -2.0);
    }
}

TEST_CASE("conv2d all-ones box counts neighborhood") {
  FeatureMap in = Tensor::map(3, 3, 1);
  in.fill(1.0);
  ConvParams p;
  p.kernel = Tensor::kernel(1, 1, 3, 3);
  p.kernel.fill(1.0);
  p.bias = Tensor::vec(1);
  p.padding = 1;
  FeatureMap out = conv2d(in, p);
  CHECK(out.at(1, 1, 0) == doctest::Approx(9.0));
  CHECK(out.at(0, 1, 0) == doctest::Approx(6.0));
  CHECK(out.at(1, 0, 0) == doctest::Approx(6.0));
  CHECK(out.at(0, 0, 0) == doctest::Approx(4.0));
  CHECK(out.at(2, 2, 0) == doctest::Approx(4.0));
}

TEST_CASE("conv2d matches quadruple-loop oracle on random inputs") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    FeatureMap in = oracle::random_map(8, 8, 3, rng);
    ConvParams p = make_conv(4, 3, 3, 3, trial % 2 + 1, 1, rng);
    for (int64_t i = 0; i < p.bias.size(); ++i) p.bias[i] = rng.uniform(-0.5, 0.5);
    FeatureMap got = conv2d(in, p);
    FeatureMap want = oracle::conv2d(in, p.kernel, p.bias, p.stride, p.padding);
    CHECK(oracle::max_abs_diff(got, want) <= 1e-12);
  }
}

TEST_CASE("conv2d even kernel size is supported") {
  FeatureMap in = Tensor::map(4, 4, 1);
  in.fill(1.0);
  ConvParams p;
  p.kernel = Tensor::kernel(1, 1, 2, 2);
  p.kernel.fill(1.0);
  p.bias = Tensor::vec(1);
  p.stride = 2;
  FeatureMap out = conv2d(in, p);
  CHECK(out.h() == 2);
  CHECK(out.w() == 2);
  for (int64_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(4.0));
}

TEST_CASE("conv2d dimension mismatch names the axis") {
  FeatureMap in = Tensor::map(4, 4, 2);
  ConvParams p;
  p.kernel = Tensor::kernel(1, 3, 3, 3);
  p.bias = Tensor::vec(1);
  CHECK_THROWS_WITH_AS(conv2d(in, p), doctest::Contains("channel"), ConfigError);
}

TEST_CASE("softmax basics") {
  auto uniform = softmax({0.0, 0.0, 0.0});
  CHECK(uniform[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(uniform[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  auto v = softmax({std::log(2.0), 0.0, 0.0});
  CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(v[2] == doctest::Approx(0.25).epsilon(1e-12));

  CHECK_THROWS_AS(softmax({}), UsageError);
}

TEST_CASE("softmax shift invariance and stability at large magnitude") {
  Rng rng(4);
  // Inputs of magnitude up to 1e3: naive exp would overflow, stabilized
  // softmax keeps the sum at 1.  exp underflow can flatten tiny entries to
  // exactly zero, so strict positivity is only asserted at moderate spread.
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(5), b(5);
    const double shift = rng.uniform(-1e3, 1e3);
    for (int i = 0; i < 5; ++i) {
      a[i] = rng.uniform(-1e3, 1e3);
      b[i] = a[i] + shift;
    }
    auto sa = softmax(a);
    auto sb = softmax(b);
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) {
      CHECK(sa[i] == doctest::Approx(sb[i]).epsilon(1e-9));
      CHECK(sa[i] >= 0.0);
      sum += sa[i];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(5);
    for (int i = 0; i < 5; ++i) a[i] = rng.uniform(-20.0, 20.0);
    for (double v : softmax(a)) CHECK(v > 0.0);
  }
}

TEST_CASE("mlp_forward zero and identity layers") {
  MlpParams zero;
  zero.layers.push_back({Tensor::matrix(2, 2), Tensor::vec(2), Activation::kIdentity});
  auto out = mlp_forward({3.0, -4.0}, zero);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);

  MlpParams ident;
  DenseLayer layer;
  layer.weights = Tensor::matrix(2, 2);
  layer.weights.at2(0, 0) = 1.0;
  layer.weights.at2(1, 1) = 1.0;
  layer.bias = Tensor::vec(2);
  ident.layers.push_back(layer);
  out = mlp_forward({3.0, -4.0}, ident);
  CHECK(out[0] == 3.0);
  CHECK(out[1] == -4.0);
}

TEST_CASE("mlp_forward two layers against hand arithmetic") {
  // W1 = [[1, 2], [-1, 1]], b1 = (0.5, 0), relu; W2 = [[2, 0], [1, 1]], b2 = (0, -1)
  // x = (1, -1): pre1 = (1 - 2 + 0.5, -1 - 1) = (-0.5, -2) -> relu -> (0, 0)
  // out = (0 + 0 + 0, 0 + 0 - 1) = (0, -1)
  MlpParams mlp;
  DenseLayer l1;
  l1.weights = Tensor::matrix(2, 2);
  l1.weights.at2(0, 0) = 1;
  l1.weights.at2(0, 1) = 2;
  l1.weights.at2(1, 0) = -1;
  l1.weights.at2(1, 1) = 1;
  l1.bias = Tensor::vec(2);
  l1.bias[0] = 0.5;
  l1.act = Activation::kRelu;
  DenseLayer l2;
  l2.weights = Tensor::matrix(2, 2);
  l2.weights.at2(0, 0) = 2;
  l2.weights.at2(1, 0) = 1;
  l2.weights.at2(1, 1) = 1;
  l2.bias = Tensor::vec(2);
  l2.bias[1] = -1;
  mlp.layers = {l1, l2};
  auto out = mlp_forward({1.0, -1.0}, mlp);
  CHECK(out[0] == doctest::Approx(0.0));
  CHECK(out[1] == doctest::Approx(-1.0));

  MlpParams bad = mlp;
  bad.layers[1].weights = Tensor::matrix(2, 3);
  CHECK_THROWS_AS(mlp_forward({1.0, -1.0}, bad), ConfigError);
}

TEST_CASE("gradient checks per op") {
  SUBCASE("conv2d is linear: sum-loss gradient nearly exact") {
    Rng rng(5);
    FeatureMap x = oracle::random_map(5, 4, 2, rng);
    ConvParams p = make_conv(3, 2, 3, 3, 1, 1, rng);
    double err = grad_check(
        [](Tape& t, const std::vector<Var>& in) {
          return t.sum(t.conv2d(in[0], in[1], in[2], 1, 1));
        },
        {x, p.kernel, p.bias}, 1e-5);
    CHECK(err <= 1e-8);
  }
  SUBCASE("conv2d with squared loss, params included") {
    for (uint64_t seed = 0; seed < 10; ++seed) CHECK(gradsuite::check_conv2d(seed) <= 1e-5);
  }
  SUBCASE("strided conv2d") {
    for (uint64_t seed = 0; seed < 10; ++seed) CHECK(gradsuite::check_strided_conv2d(seed) <= 1e-5);
  }
  SUBCASE("sigmoid elementwise") {
    for (uint64_t seed = 0; seed < 10; ++seed) CHECK(gradsuite::check_sigmoid(100 + seed) <= 1e-6);
  }
  SUBCASE("relu elementwise") {
    for (uint64_t seed = 0; seed < 10; ++seed) CHECK(gradsuite::check_relu(150 + seed) <= 1e-6);
  }
  SUBCASE("softmax plus mlp composite") {
    for (uint64_t seed = 0; seed < 10; ++seed)
      CHECK(gradsuite::check_dense_softmax(200 + seed) <= 1e-5);
  }
  SUBCASE("warp, concat, pool, sums") {
    for (uint64_t seed = 0; seed < 10; ++seed)
      CHECK(gradsuite::check_structural_ops(300 + seed) <= 1e-6);
  }
  SUBCASE("weighted level sum") {
    for (uint64_t seed = 0; seed < 10; ++seed)
      CHECK(gradsuite::check_weighted_sum(400 + seed) <= 1e-5);
  }
}

TEST_CASE("grad_check input validation") {
  CHECK_THROWS_AS(grad_check([](Tape& t, const std::vector<Var>& in) { return t.sum(in[0]); },
                             {Tensor::vec(2)}, 0.0),
                  UsageError);
}

TEST_CASE("checkpoint round trip and error paths") {
  Rng rng(6);
  std::map<std::string, Tensor> tensors;
  tensors["alpha"] = oracle::random_map(3, 2, 4, rng);
  tensors["beta.kernel"] = Tensor::kernel(2, 3, 1, 1);
  tensors["beta.kernel"][0] = -1.25;
  const std::string path = "ckpt_test.bin";
  save_checkpoint(path, tensors);
  auto loaded = load_checkpoint(path);
  REQUIRE(loaded.size() == 2);
  CHECK(oracle::max_abs_diff(loaded["alpha"], tensors["alpha"]) == 0.0);
  CHECK(oracle::max_abs_diff(loaded["beta.kernel"], tensors["beta.kernel"]) == 0.0);

  // Truncation reports the offset.
  {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(path + ".trunc", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path + ".trunc"), doctest::Contains("byte"), DataError);

  {
    std::ofstream out(path + ".magic", std::ios::binary);
    out << "NOPE0000";
  }
  CHECK_THROWS_AS(load_checkpoint(path + ".magic"), DataError);
}
