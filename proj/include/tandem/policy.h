// include/tandem/policy.h

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

#ifndef TANDEM_POLICY_H_
#define TANDEM_POLICY_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

namespace tandem {

using Rng = std::mt19937_64;

// Two-branch scoring network: a shared encoder applied to each input of a
// pair, embeddings concatenated and passed through a discriminator head
// ending in a single logit. ReLU on every layer except the final one.
struct LayerSpec {
  int input_dim = 24;
  std::vector<int> encoder = {32, 16};  // encoder layer widths
  std::vector<int> head = {16, 1};      // head widths; last must be 1

  int embedding_dim() const { return encoder.back(); }
  int head_input_dim() const { return 2 * encoder.back(); }
  void validate() const;  // throws on invalid dimensions
};

// One dense layer; w is row-major out x in. Doubles as gradient storage.
struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;
  std::vector<double> b;
};

struct PolicyNet {
  LayerSpec spec;
  std::vector<Layer> encoder;
  std::vector<Layer> head;
};

// Same shapes as the PolicyNet they were produced from.
struct Gradients {
  std::vector<Layer> encoder;
  std::vector<Layer> head;
};

// Everything needed to replay and differentiate one forward pass.
struct ForwardCache {
  std::vector<double> input_a, input_b;
  std::vector<std::vector<double>> enc_pre_a, enc_post_a;
  std::vector<std::vector<double>> enc_pre_b, enc_post_b;
  std::vector<double> concat;
  std::vector<std::vector<double>> head_pre, head_post;
  double logit = 0.0;
  double prob = 0.0;
};

// Scaled-uniform initialization, bound = sqrt(6 / (fan_in + fan_out)),
// biases zero. Identical (spec, seed) pairs give bit-identical parameters.
PolicyNet init_network(const LayerSpec &spec, std::uint64_t seed);

// prob = sigmoid(head(concat(enc(a), enc(b)))). Both branches share the
// encoder parameters. Throws on dimension mismatch.
ForwardCache forward(const PolicyNet &net, std::span<const double> input_a,
                     std::span<const double> input_b);

// Gradient of (upstream * logit) w.r.t. every parameter; branch gradients
// sum into the shared encoder.
Gradients backprop_logit(const PolicyNet &net, const ForwardCache &cache,
                         double upstream);

// Gradient of log P(action) with P(1) = prob; logit-level derivative is
// (action - prob).
Gradients grad_log_bernoulli(const PolicyNet &net, const ForwardCache &cache,
                             int action);

// Gradient of the binary cross-entropy loss against `target`; equal to
// -grad_log_bernoulli(net, cache, target).
Gradients grad_bce(const PolicyNet &net, const ForwardCache &cache,
                   int target);

Gradients zeros_like(const PolicyNet &net);

// acc += scale * g
void accumulate(Gradients *acc, const Gradients &g, double scale);

enum class GradStep { kAscent, kDescent };

// In-place theta <- theta +/- lr * g. Throws "non-finite gradient" if any
// component is NaN or infinite.
void sgd_step(PolicyNet *net, const Gradients &grads, double learning_rate,
              GradStep direction);

// One uniform draw; returns 1 with probability prob. Throws if prob is
// outside [0, 1].
int sample_bernoulli(double prob, Rng &rng);

double sigmoid(double x);
double log_sigmoid(double x);
// -[t log p + (1-t) log(1-p)] computed from the logit, saturation-safe.
double bce_with_logit(double logit, int target);

// Versioned binary checkpoint (layer spec + row-major doubles); reload is
// bit-exact.
void save_policy(const PolicyNet &net, const std::filesystem::path &path);
PolicyNet load_policy(const std::filesystem::path &path);

}  // namespace tandem

#endif  // TANDEM_POLICY_H_
