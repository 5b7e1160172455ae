#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dggan/core/errors.hpp"
#include "dggan/gan/losses.hpp"
#include "dggan/gan/nets.hpp"
#include "support/gradcheck.hpp"

using namespace dggan;
using dggan::testing::gradcheck_params;
using dggan::testing::random_tensor;

namespace {

void set_param(nn::Module& m, const std::string& name, double value) {
  nn::NamedParams named;
  m.collect("", named);
  for (auto& [n, p] : named)
    if (n == name) {
      p->value.fill(value);
      return;
    }
  FAIL("no parameter named ", name);
}

}  // namespace

TEST_CASE("generator: shape contract and output range") {
  Rng rng(3);
  gan::GeneratorConfig cfg;
  cfg.in_size = 64;
  cfg.base_channels = 4;
  gan::GeneratorNet gen(cfg, rng);
  Tensor rgb = random_tensor({2, 3, 64, 64}, rng, 0.0, 1.0);
  const Tensor out = gen.forward(rgb);
  CHECK(out.shape() == std::vector<int>{2, 1, 64, 64});
  CHECK(out.min_value() >= 0.0);
  CHECK(out.max_value() <= 1.0);

  CHECK_THROWS_AS(gen.forward(random_tensor({1, 3, 32, 32}, rng)), ShapeError);
}

TEST_CASE("generator: output range holds for arbitrary parameter values") {
  Rng rng(5);
  gan::GeneratorConfig cfg;
  cfg.in_size = 16;
  cfg.base_channels = 2;
  gan::GeneratorNet gen(cfg, rng);
  for (nn::Param* p : gen.parameters())
    for (std::int64_t i = 0; i < p->value.numel(); ++i) p->value[i] = rng.uniform(-40.0, 40.0);
  const Tensor out = gen.forward(random_tensor({1, 3, 16, 16}, rng, 0.0, 1.0));
  CHECK(out.min_value() >= 0.0);
  CHECK(out.max_value() <= 1.0);
}

TEST_CASE("generator: batch independence and degenerate head") {
  Rng rng(7);
  gan::GeneratorConfig cfg;
  cfg.in_size = 16;
  cfg.base_channels = 2;
  gan::GeneratorNet gen(cfg, rng);

  Tensor one = random_tensor({1, 3, 16, 16}, rng, 0.0, 1.0);
  Tensor two({2, 3, 16, 16});
  for (std::int64_t i = 0; i < one.numel(); ++i) {
    two[i] = one[i];
    two[one.numel() + i] = one[i];
  }
  const Tensor y1 = gen.forward(one);
  const Tensor y2 = gen.forward(two);
  for (std::int64_t i = 0; i < y1.numel(); ++i) {
    CHECK(y2[i] == y1[i]);
    CHECK(y2[y1.numel() + i] == y1[i]);
  }

  // all-zero head weights with bias b -> constant sigmoid(b)
  const double b = 0.7;
  set_param(gen, "generator.head.weight", 0.0);
  set_param(gen, "generator.head.bias", b);
  const Tensor flat = gen.forward(one);
  const double expect = 1.0 / (1.0 + std::exp(-b));
  for (std::int64_t i = 0; i < flat.numel(); ++i)
    CHECK(flat[i] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("discriminator: shapes, open-interval scores, determinism") {
  Rng rng(11);
  gan::DiscriminatorConfig cfg;
  cfg.in_size = 16;
  cfg.base_channels = 2;
  gan::DiscriminatorNet disc(cfg, rng);

  const Tensor batch = random_tensor({4, 1, 16, 16}, rng, 0.0, 1.0);
  const Tensor scores = disc.forward(batch);
  CHECK(scores.shape() == std::vector<int>{4});

  // squashing contract over many random inputs
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor x = random_tensor({100, 1, 16, 16}, rng, -2.0, 2.0);
    const Tensor s = disc.forward(x);
    for (std::int64_t i = 0; i < s.numel(); ++i) {
      CHECK(s[i] > 0.0);
      CHECK(s[i] < 1.0);
    }
  }

  // duplicated rows give duplicated scores
  Tensor dup({2, 1, 16, 16});
  const Tensor one = random_tensor({1, 1, 16, 16}, rng, 0.0, 1.0);
  for (std::int64_t i = 0; i < one.numel(); ++i) {
    dup[i] = one[i];
    dup[one.numel() + i] = one[i];
  }
  const Tensor sd = disc.forward(dup);
  CHECK(sd[0] == sd[1]);

  CHECK_THROWS_AS(disc.forward(random_tensor({1, 1, 8, 8}, rng)), ShapeError);
}

TEST_CASE("gan_loss_discriminator: closed forms, monotonicity, clamping") {
  Tensor real({2}), fake({2});
  real.fill(0.5);
  fake.fill(0.5);
  CHECK(gan::gan_loss_discriminator(real, fake) ==
        doctest::Approx(std::log(0.5) + std::log(0.5)).epsilon(1e-12));

  // perfect discriminator approaches the supremum 0, clamped finite
  Tensor r1 = Tensor::full({2}, 1.0);
  Tensor f0 = Tensor::full({2}, 0.0);
  const double sup = gan::gan_loss_discriminator(r1, f0);
  CHECK(std::fabs(sup) < 1e-5);
  CHECK(std::isfinite(sup));

  Tensor r9 = Tensor::full({2}, 0.9);
  Tensor f1 = Tensor::full({2}, 0.1);
  CHECK(gan::gan_loss_discriminator(r9, f1) > gan::gan_loss_discriminator(real, fake));

  // strictly increasing in each real score, decreasing in each fake score
  Rng rng(13);
  Tensor r = random_tensor({3}, rng, 0.1, 0.9);
  Tensor f = random_tensor({3}, rng, 0.1, 0.9);
  const double base = gan::gan_loss_discriminator(r, f);
  for (int i = 0; i < 3; ++i) {
    Tensor r2 = r;
    r2[i] += 0.05;
    CHECK(gan::gan_loss_discriminator(r2, f) > base);
    Tensor f2 = f;
    f2[i] += 0.05;
    CHECK(gan::gan_loss_discriminator(r, f2) < base);
  }

  // permutation invariance over the batch
  Tensor rp({3}), fp({3});
  rp[0] = r[2];
  rp[1] = r[0];
  rp[2] = r[1];
  fp[0] = f[1];
  fp[1] = f[2];
  fp[2] = f[0];
  CHECK(gan::gan_loss_discriminator(rp, fp) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("gan_loss_generator: closed forms and limits") {
  Tensor fake = Tensor::full({2}, 0.5);
  CHECK(gan::gan_loss_generator(fake, gan::GeneratorLossVariant::minimax) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(gan::gan_loss_generator(fake, gan::GeneratorLossVariant::non_saturating) ==
        doctest::Approx(-std::log(0.5)).epsilon(1e-12));

  // fully fooled discriminator
  Tensor ones = Tensor::full({2}, 1.0);
  const double mm = gan::gan_loss_generator(ones, gan::GeneratorLossVariant::minimax);
  CHECK(mm < std::log(1e-6));  // large negative, finite (clamped)
  CHECK(std::isfinite(mm));
  const double ns = gan::gan_loss_generator(ones, gan::GeneratorLossVariant::non_saturating);
  CHECK(std::fabs(ns) < 1e-5);
}

TEST_CASE("gan losses: analytic gradients through tiny nets match finite differences") {
  Rng rng(17);
  gan::GeneratorConfig gcfg;
  gcfg.in_size = 16;
  gcfg.base_channels = 2;
  gcfg.residual_blocks = 1;
  gan::GeneratorNet gen(gcfg, rng);
  gan::DiscriminatorConfig dcfg;
  dcfg.in_size = 16;
  dcfg.base_channels = 2;
  gan::DiscriminatorNet disc(dcfg, rng);
  dggan::testing::randomize_params(gen.parameters(), rng);
  dggan::testing::randomize_params(disc.parameters(), rng);

  const Tensor rgb = random_tensor({2, 3, 16, 16}, rng, 0.0, 1.0);
  const Tensor real = random_tensor({2, 1, 16, 16}, rng, 0.0, 1.0);

  // discriminator loss w.r.t. discriminator parameters; each backward
  // directly follows the forward whose cache it consumes
  const auto run_d = [&] {
    disc.zero_grad();
    const Tensor fake = gen.forward(rgb);
    const Tensor sr = disc.forward(real);
    const Tensor sr_copy = sr;
    Tensor gr, gf;
    // compute the loss in two passes so each cache stays valid
    const Tensor sf = disc.forward(fake);
    const double loss = gan::gan_loss_discriminator(sr_copy, sf, &gr, &gf);
    disc.backward(gf);
    disc.forward(real);
    disc.backward(gr);
    return loss;
  };
  CHECK(gradcheck_params(run_d, disc.parameters(), 1e-6) < 1e-4);

  // generator loss (both variants) w.r.t. generator parameters
  for (const auto variant :
       {gan::GeneratorLossVariant::minimax, gan::GeneratorLossVariant::non_saturating}) {
    const auto run_g = [&] {
      gen.zero_grad();
      disc.zero_grad();
      const Tensor fake = gen.forward(rgb);
      const Tensor s = disc.forward(fake);
      Tensor gs;
      const double loss = gan::gan_loss_generator(s, variant, &gs);
      const Tensor dfake = disc.backward(gs);
      gen.backward(dfake);
      return loss;
    };
    CHECK(gradcheck_params(run_g, gen.parameters(), 1e-6) < 1e-4);
  }
}
