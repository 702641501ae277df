// tests/test_policy.cc

// Copyright 2026  Tandem-Reinforce Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.h"
#include "tandem/policy.h"
#include "test_util.h"

using namespace tandem;
using tandem::test::flatten;
using tandem::test::max_fd_relative_error;
using tandem::test::oracle_forward_prob;

namespace {

LayerSpec small_spec() {
  LayerSpec spec;
  spec.input_dim = 6;
  spec.encoder = {8, 4};
  spec.head = {6, 1};
  return spec;
}

std::vector<double> random_input(Rng &rng, int dim, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(dim);
  for (double &x : v) x = normal(rng);
  return v;
}

bool same_parameters(const PolicyNet &a, const PolicyNet &b) {
  auto same_layers = [](const std::vector<Layer> &x,
                        const std::vector<Layer> &y) {
    if (x.size() != y.size()) return false;
    for (std::size_t l = 0; l < x.size(); ++l) {
      if (x[l].w != y[l].w || x[l].b != y[l].b) return false;
    }
    return true;
  };
  return same_layers(a.encoder, b.encoder) && same_layers(a.head, b.head);
}

void fill_zero(PolicyNet *net) {
  for (std::vector<Layer> *layers : {&net->encoder, &net->head}) {
    for (Layer &layer : *layers) {
      std::fill(layer.w.begin(), layer.w.end(), 0.0);
      std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
  }
}

}  // namespace

TEST_CASE("layer spec validation") {
  CHECK_NOTHROW(small_spec().validate());
  LayerSpec spec = small_spec();
  spec.head = {6, 2};
  CHECK_THROWS(spec.validate());
  spec = small_spec();
  spec.encoder.clear();
  CHECK_THROWS(spec.validate());
  spec = small_spec();
  spec.encoder = {8, 0};
  CHECK_THROWS(spec.validate());
}

TEST_CASE("initialization is seed-deterministic") {
  const LayerSpec spec = small_spec();
  const PolicyNet a = init_network(spec, 1234);
  const PolicyNet b = init_network(spec, 1234);
  CHECK(same_parameters(a, b));

  const PolicyNet c = init_network(spec, 1235);
  CHECK_FALSE(same_parameters(a, c));

  // Biases start at zero, weights within the scaled-uniform bound.
  for (const Layer &layer : a.encoder) {
    const double bound = std::sqrt(6.0 / (layer.in + layer.out));
    for (double b_val : layer.b) CHECK(b_val == 0.0);
    for (double w : layer.w) CHECK(std::abs(w) <= bound);
  }
}

TEST_CASE("head input width is twice the embedding width") {
  LayerSpec spec;
  spec.input_dim = 10;
  spec.encoder = {12, 8};
  spec.head = {4, 1};
  CHECK(spec.head_input_dim() == 16);
  const PolicyNet net = init_network(spec, 5);
  CHECK(net.head.front().in == 16);
}

TEST_CASE("forward pass basics") {
  const LayerSpec spec = small_spec();
  Rng rng(99);

  SUBCASE("all-zero parameters give probability one half") {
    PolicyNet net = init_network(spec, 1);
    fill_zero(&net);
    const auto in_a = random_input(rng, spec.input_dim);
    const auto in_b = random_input(rng, spec.input_dim);
    const ForwardCache cache = forward(net, in_a, in_b);
    CHECK(cache.prob == 0.5);
    CHECK(cache.logit == 0.0);
  }

  SUBCASE("dimension mismatch is an error") {
    const PolicyNet net = init_network(spec, 1);
    CHECK_THROWS(forward(net, std::vector<double>(5, 0.0),
                         std::vector<double>(6, 0.0)));
  }

  SUBCASE("concat-symmetric head weights make the pair order irrelevant") {
    PolicyNet net = init_network(spec, 7);
    // Mirror the first head layer across the two embedding halves.
    Layer &first = net.head.front();
    const int emb = spec.embedding_dim();
    for (int r = 0; r < first.out; ++r) {
      for (int c = 0; c < emb; ++c) {
        first.w[static_cast<std::size_t>(r) * first.in + emb + c] =
            first.w[static_cast<std::size_t>(r) * first.in + c];
      }
    }
    const auto in_a = random_input(rng, spec.input_dim);
    const auto in_b = random_input(rng, spec.input_dim);
    CHECK(forward(net, in_a, in_b).prob ==
          doctest::Approx(forward(net, in_b, in_a).prob).epsilon(1e-15));
  }
}

TEST_CASE("forward matches an independent scalar re-implementation") {
  Rng rng(2024);
  for (int i = 0; i < 20; ++i) {
    LayerSpec spec;
    spec.input_dim = 3 + static_cast<int>(rng() % 5);
    spec.encoder = {5 + static_cast<int>(rng() % 4),
                    2 + static_cast<int>(rng() % 4)};
    spec.head = {3 + static_cast<int>(rng() % 4), 1};
    const PolicyNet net = init_network(spec, rng());
    const auto in_a = random_input(rng, spec.input_dim, 2.0);
    const auto in_b = random_input(rng, spec.input_dim, 2.0);
    const double expected = oracle_forward_prob(net, in_a, in_b);
    CHECK(forward(net, in_a, in_b).prob ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("forward cache replays bit-exactly") {
  const LayerSpec spec = small_spec();
  const PolicyNet net = init_network(spec, 21);
  Rng rng(22);
  const auto in_a = random_input(rng, spec.input_dim);
  const auto in_b = random_input(rng, spec.input_dim);
  const ForwardCache first = forward(net, in_a, in_b);
  const ForwardCache replay = forward(net, first.input_a, first.input_b);
  CHECK(first.prob == replay.prob);
  CHECK(first.logit == replay.logit);
}

TEST_CASE("log-Bernoulli gradient at the logit") {
  const LayerSpec spec = small_spec();
  PolicyNet net = init_network(spec, 3);
  fill_zero(&net);
  Rng rng(4);
  const auto in_a = random_input(rng, spec.input_dim);
  const auto in_b = random_input(rng, spec.input_dim);
  const ForwardCache cache = forward(net, in_a, in_b);
  REQUIRE(cache.prob == 0.5);

  // d log P(1) / d logit = 1 - p = 0.5 shows up directly on the output bias.
  const Gradients grads = grad_log_bernoulli(net, cache, 1);
  CHECK(grads.head.back().b[0] == 0.5);
  const Gradients grads0 = grad_log_bernoulli(net, cache, 0);
  CHECK(grads0.head.back().b[0] == -0.5);
}

TEST_CASE("log-Bernoulli gradient matches finite differences") {
  Rng rng(514);
  for (int i = 0; i < 12; ++i) {
    const LayerSpec spec = small_spec();
    const PolicyNet net = init_network(spec, rng());
    const auto in_a = random_input(rng, spec.input_dim);
    const auto in_b = random_input(rng, spec.input_dim);
    const int action = static_cast<int>(rng() % 2);
    const ForwardCache cache = forward(net, in_a, in_b);
    const Gradients grads = grad_log_bernoulli(net, cache, action);

    const double worst = max_fd_relative_error(
        net, grads,
        [&](const PolicyNet &probe) {
          const double z = forward(probe, in_a, in_b).logit;
          return action == 1 ? log_sigmoid(z) : log_sigmoid(-z);
        },
        1e-6, 1e-8);
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("cross-entropy gradient matches finite differences") {
  Rng rng(515);
  for (int i = 0; i < 12; ++i) {
    const LayerSpec spec = small_spec();
    const PolicyNet net = init_network(spec, rng());
    const auto in_a = random_input(rng, spec.input_dim);
    const auto in_b = random_input(rng, spec.input_dim);
    const int target = static_cast<int>(rng() % 2);
    const ForwardCache cache = forward(net, in_a, in_b);
    const Gradients grads = grad_bce(net, cache, target);

    const double worst = max_fd_relative_error(
        net, grads,
        [&](const PolicyNet &probe) {
          return bce_with_logit(forward(probe, in_a, in_b).logit, target);
        },
        1e-6, 1e-8);
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("gradient identities") {
  const LayerSpec spec = small_spec();
  Rng rng(66);
  const PolicyNet net = init_network(spec, 67);
  const auto in_a = random_input(rng, spec.input_dim);
  const auto in_b = random_input(rng, spec.input_dim);
  const ForwardCache cache = forward(net, in_a, in_b);

  SUBCASE("BCE gradient is the negated log-likelihood gradient") {
    for (int target : {0, 1}) {
      const auto bce = flatten(grad_bce(net, cache, target));
      const auto loglik = flatten(grad_log_bernoulli(net, cache, target));
      REQUIRE(bce.size() == loglik.size());
      for (std::size_t i = 0; i < bce.size(); ++i) {
        CHECK(bce[i] == -loglik[i]);
      }
    }
  }

  SUBCASE("action-0 gradient is the action-1 gradient scaled by -p/(1-p)") {
    const double p = cache.prob;
    const auto g1 = flatten(grad_log_bernoulli(net, cache, 1));
    const auto g0 = flatten(grad_log_bernoulli(net, cache, 0));
    for (std::size_t i = 0; i < g1.size(); ++i) {
      CHECK(g0[i] == doctest::Approx(-g1[i] * p / (1.0 - p)).epsilon(1e-9));
    }
  }

  SUBCASE("saturated correct prediction has a vanishing BCE gradient") {
    PolicyNet sat = net;
    sat.head.back().b[0] = 50.0;  // drive the logit far positive
    const ForwardCache sat_cache = forward(sat, in_a, in_b);
    REQUIRE(sat_cache.prob > 1.0 - 1e-9);
    double norm = 0.0;
    for (double g : flatten(grad_bce(sat, sat_cache, 1))) norm += g * g;
    CHECK(std::sqrt(norm) < 1e-6);
  }
}

TEST_CASE("shared encoder drives both branches identically") {
  const LayerSpec spec = small_spec();
  PolicyNet net = init_network(spec, 70);
  Rng rng(71);
  const auto input = random_input(rng, spec.input_dim);

  ForwardCache cache = forward(net, input, input);
  CHECK(cache.enc_post_a.back() == cache.enc_post_b.back());

  net.encoder[0].w[3] += 0.25;
  cache = forward(net, input, input);
  CHECK(cache.enc_post_a.back() == cache.enc_post_b.back());
}

TEST_CASE("sgd step") {
  const LayerSpec spec = small_spec();
  const PolicyNet net = init_network(spec, 80);

  SUBCASE("zero gradients leave parameters untouched") {
    PolicyNet stepped = net;
    sgd_step(&stepped, zeros_like(net), 0.1, GradStep::kAscent);
    CHECK(same_parameters(stepped, net));
  }

  SUBCASE("zero learning rate leaves parameters untouched") {
    PolicyNet stepped = net;
    Gradients grads = zeros_like(net);
    grads.head.back().b[0] = 3.0;
    sgd_step(&stepped, grads, 0.0, GradStep::kAscent);
    CHECK(same_parameters(stepped, net));
  }

  SUBCASE("ascent on a concave quadratic increases the objective") {
    // f(b) = -(b - 3)^2 with the output bias as the single live parameter.
    PolicyNet scalar = net;
    fill_zero(&scalar);
    auto objective = [](const PolicyNet &n) {
      const double b = n.head.back().b[0];
      return -(b - 3.0) * (b - 3.0);
    };
    const double before = objective(scalar);
    Gradients grads = zeros_like(scalar);
    grads.head.back().b[0] = -2.0 * (scalar.head.back().b[0] - 3.0);
    sgd_step(&scalar, grads, 0.1, GradStep::kAscent);
    CHECK(objective(scalar) > before);
  }

  SUBCASE("non-finite gradients are rejected") {
    PolicyNet stepped = net;
    Gradients grads = zeros_like(net);
    grads.encoder[0].w[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH(sgd_step(&stepped, grads, 0.1, GradStep::kDescent),
                      doctest::Contains("non-finite gradient"));
  }

  SUBCASE("descent is the mirror of ascent") {
    PolicyNet up = net, down = net;
    Gradients grads = zeros_like(net);
    grads.head.back().b[0] = 1.5;
    sgd_step(&up, grads, 0.2, GradStep::kAscent);
    sgd_step(&down, grads, 0.2, GradStep::kDescent);
    CHECK(up.head.back().b[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(down.head.back().b[0] == doctest::Approx(-0.3).epsilon(1e-15));
  }
}

TEST_CASE("Bernoulli sampling") {
  Rng rng(90);
  for (int i = 0; i < 1000; ++i) {
    CHECK(sample_bernoulli(1.0, rng) == 1);
    CHECK(sample_bernoulli(0.0, rng) == 0);
  }

  Rng rng2(91);
  int ones = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ones += sample_bernoulli(0.7, rng2);
  const double mean = static_cast<double>(ones) / draws;
  CHECK(mean >= 0.69);
  CHECK(mean <= 0.71);

  CHECK_THROWS(sample_bernoulli(1.2, rng));
  CHECK_THROWS(sample_bernoulli(-0.1, rng));
}

TEST_CASE("probability stays inside (0, 1) for bounded inputs") {
  const LayerSpec spec = small_spec();
  Rng rng(95);
  for (int i = 0; i < 50; ++i) {
    const PolicyNet net = init_network(spec, rng());
    const double scale = (i % 2 == 0) ? 1.0 : 400.0;  // up to ~1e3 norms
    const auto in_a = random_input(rng, spec.input_dim, scale);
    const auto in_b = random_input(rng, spec.input_dim, scale);
    const ForwardCache cache = forward(net, in_a, in_b);
    CHECK(std::isfinite(cache.logit));
    CHECK(cache.prob > 0.0);
    CHECK(cache.prob < 1.0);
  }
}

TEST_CASE("checkpoints reload bit-exactly") {
  const LayerSpec spec = small_spec();
  const PolicyNet net = init_network(spec, 123);
  const auto dir = tandem::test::make_temp_dir("ckpt");
  const auto path = dir / "net.ckpt";

  save_policy(net, path);
  const PolicyNet loaded = load_policy(path);
  CHECK(loaded.spec.input_dim == spec.input_dim);
  CHECK(loaded.spec.encoder == spec.encoder);
  CHECK(loaded.spec.head == spec.head);
  REQUIRE(same_parameters(net, loaded));
  // Bit-level identity, not merely numeric equality.
  for (std::size_t l = 0; l < net.encoder.size(); ++l) {
    CHECK(std::memcmp(net.encoder[l].w.data(), loaded.encoder[l].w.data(),
                      net.encoder[l].w.size() * sizeof(double)) == 0);
  }

  SUBCASE("junk files are rejected") {
    const auto junk = dir / "junk.ckpt";
    std::ofstream(junk) << "not a checkpoint";
    CHECK_THROWS(load_policy(junk));
  }
  std::filesystem::remove_all(dir);
}
