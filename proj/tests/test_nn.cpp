#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dggan/nn/adam.hpp"
#include "dggan/nn/layers.hpp"
#include "dggan/nn/ops.hpp"
#include "support/gradcheck.hpp"

using namespace dggan;
using dggan::testing::gradcheck_input;
using dggan::testing::gradcheck_params;
using dggan::testing::random_tensor;

namespace {

// Sum-of-squares pseudo-loss so every output element gets a distinct grad.
double sq_loss(const Tensor& y, Tensor& grad) {
  grad = y;
  double loss = 0.0;
  for (std::int64_t i = 0; i < y.numel(); ++i) {
    loss += 0.5 * y[i] * y[i];
    grad[i] = y[i];
  }
  return loss;
}

double run_module_sq(nn::Module& m, const Tensor& x, bool backward_params = true) {
  m.zero_grad();
  Tensor y = m.forward(x);
  Tensor g;
  const double loss = sq_loss(y, g);
  if (backward_params) m.backward(g);
  return loss;
}

}  // namespace

TEST_CASE("tensor basics") {
  Tensor t({2, 3});
  CHECK(t.numel() == 6);
  t.at(1, 2) = 5.0;
  CHECK(t.sum() == doctest::Approx(5.0));
  Tensor r = t.reshaped({3, 2});
  CHECK(r.at(2, 1) == doctest::Approx(5.0));
  CHECK(t.mean() == doctest::Approx(5.0 / 6));
}

TEST_CASE("rng determinism and serialization") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  a.normal();  // leaves a spare cached
  const std::string s = a.serialize();
  Rng c = Rng::deserialize(s);
  for (int i = 0; i < 50; ++i) CHECK(a.normal() == c.normal());
}

TEST_CASE("conv2d shapes and gradients") {
  Rng rng(7);
  nn::Conv2d conv(2, 3, 3, 1, 1, rng);
  Tensor x = random_tensor({2, 2, 5, 5}, rng);
  Tensor y = conv.forward(x);
  CHECK(y.shape() == std::vector<int>{2, 3, 5, 5});

  const double err = gradcheck_params([&] { return run_module_sq(conv, x); },
                                      conv.parameters());
  CHECK(err < 1e-7);

  // input gradient
  conv.zero_grad();
  Tensor out = conv.forward(x);
  Tensor g;
  sq_loss(out, g);
  const Tensor gx = conv.backward(g);
  const double ierr = gradcheck_input([&] { return run_module_sq(conv, x, false); }, x, gx);
  CHECK(ierr < 1e-7);
}

TEST_CASE("strided conv output size") {
  Rng rng(3);
  nn::Conv2d conv(1, 1, 4, 2, 1, rng);
  Tensor x = random_tensor({1, 1, 8, 8}, rng);
  CHECK(conv.forward(x).shape() == std::vector<int>{1, 1, 4, 4});
  const double err =
      gradcheck_params([&] { return run_module_sq(conv, x); }, conv.parameters());
  CHECK(err < 1e-7);
}

TEST_CASE("conv transpose doubles spatial size and matches finite differences") {
  Rng rng(11);
  nn::ConvTranspose2d up(3, 2, 4, 2, 1, rng);
  Tensor x = random_tensor({2, 3, 4, 4}, rng);
  Tensor y = up.forward(x);
  CHECK(y.shape() == std::vector<int>{2, 2, 8, 8});

  const double err = gradcheck_params([&] { return run_module_sq(up, x); }, up.parameters());
  CHECK(err < 1e-7);

  up.zero_grad();
  Tensor out = up.forward(x);
  Tensor g;
  sq_loss(out, g);
  const Tensor gx = up.backward(g);
  const double ierr = gradcheck_input([&] { return run_module_sq(up, x, false); }, x, gx);
  CHECK(ierr < 1e-7);
}

TEST_CASE("conv transpose stride 1 keeps size") {
  Rng rng(5);
  nn::ConvTranspose2d up(2, 2, 3, 1, 1, rng);
  Tensor x = random_tensor({1, 2, 6, 6}, rng);
  CHECK(up.forward(x).shape() == std::vector<int>{1, 2, 6, 6});
  const double err = gradcheck_params([&] { return run_module_sq(up, x); }, up.parameters());
  CHECK(err < 1e-7);
}

TEST_CASE("linear layer gradients") {
  Rng rng(19);
  nn::Linear fc(7, 4, rng);
  Tensor x = random_tensor({3, 7}, rng);
  CHECK(fc.forward(x).shape() == std::vector<int>{3, 4});
  const double err = gradcheck_params([&] { return run_module_sq(fc, x); }, fc.parameters());
  CHECK(err < 1e-7);
}

TEST_CASE("activation and pooling backward") {
  Rng rng(23);
  // Keep inputs away from the ReLU kink so finite differences are clean.
  Tensor x = random_tensor({2, 3, 4, 4}, rng);
  for (std::int64_t i = 0; i < x.numel(); ++i)
    if (std::fabs(x[i]) < 0.05) x[i] = 0.1;

  nn::Sequential seq;
  Rng wrng(29);
  seq.emplace<nn::ReLU>("relu");
  seq.emplace<nn::GlobalAvgPool2d>("pool");
  seq.emplace<nn::Linear>("fc", 3, 2, wrng);
  seq.emplace<nn::Sigmoid>("sig");

  const double err = gradcheck_params([&] { return run_module_sq(seq, x); }, seq.parameters());
  CHECK(err < 1e-7);

  seq.zero_grad();
  Tensor y = seq.forward(x);
  Tensor g;
  sq_loss(y, g);
  const Tensor gx = seq.backward(g);
  const double ierr = gradcheck_input([&] { return run_module_sq(seq, x, false); }, x, gx);
  CHECK(ierr < 1e-6);
}

TEST_CASE("residual block gradcheck") {
  Rng rng(31);
  nn::ResidualBlock block(3, rng);
  Tensor x = random_tensor({1, 3, 5, 5}, rng);
  CHECK(block.forward(x).shape() == x.shape());
  const double err =
      gradcheck_params([&] { return run_module_sq(block, x); }, block.parameters());
  CHECK(err < 1e-7);
}

TEST_CASE("concat/split round trip") {
  Rng rng(37);
  Tensor a = random_tensor({2, 3, 4, 4}, rng);
  Tensor b = random_tensor({2, 2, 4, 4}, rng);
  Tensor c = nn::concat_channels(a, b);
  CHECK(c.shape() == std::vector<int>{2, 5, 4, 4});
  Tensor ga, gb;
  nn::split_channels(c, 3, ga, gb);
  for (std::int64_t i = 0; i < a.numel(); ++i) CHECK(ga[i] == a[i]);
  for (std::int64_t i = 0; i < b.numel(); ++i) CHECK(gb[i] == b[i]);
}

TEST_CASE("adam descends a quadratic") {
  nn::Param p(Tensor::full({4}, 5.0));
  nn::Adam opt({&p}, {0.1, 0.9, 0.999, 1e-8});
  for (int i = 0; i < 400; ++i) {
    opt.zero_grad();
    for (int j = 0; j < 4; ++j) p.grad[j] = 2.0 * (p.value[j] - 1.0);
    opt.step();
  }
  for (int j = 0; j < 4; ++j) CHECK(p.value[j] == doctest::Approx(1.0).epsilon(1e-3));
}
