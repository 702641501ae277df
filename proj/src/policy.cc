// src/policy.cc

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

#include "tandem/policy.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace tandem {

namespace {

void check_positive_dims(const std::vector<int> &dims, const char *what) {
  if (dims.empty()) {
    throw std::runtime_error(std::string(what) + " needs at least one layer");
  }
  for (int d : dims) {
    if (d <= 0) {
      throw std::runtime_error(std::string(what) +
                               " layer widths must be positive");
    }
  }
}

// y = W x + b
void affine(const Layer &layer, std::span<const double> x,
            std::vector<double> *y) {
  y->assign(layer.out, 0.0);
  for (int r = 0; r < layer.out; ++r) {
    double acc = layer.b[r];
    const double *row = layer.w.data() + static_cast<std::size_t>(r) * layer.in;
    for (int c = 0; c < layer.in; ++c) acc += row[c] * x[c];
    (*y)[r] = acc;
  }
}

std::vector<double> relu(const std::vector<double> &x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

// Accumulates dW and db for one layer and returns the gradient w.r.t. the
// layer input. dz is the gradient at the pre-activation.
std::vector<double> layer_backward(const Layer &layer,
                                   std::span<const double> input,
                                   const std::vector<double> &dz,
                                   Layer *grad) {
  for (int r = 0; r < layer.out; ++r) {
    double *grow = grad->w.data() + static_cast<std::size_t>(r) * layer.in;
    for (int c = 0; c < layer.in; ++c) grow[c] += dz[r] * input[c];
    grad->b[r] += dz[r];
  }
  std::vector<double> dx(layer.in, 0.0);
  for (int r = 0; r < layer.out; ++r) {
    const double *row = layer.w.data() + static_cast<std::size_t>(r) * layer.in;
    for (int c = 0; c < layer.in; ++c) dx[c] += row[c] * dz[r];
  }
  return dx;
}

std::vector<double> relu_backward(const std::vector<double> &pre,
                                  const std::vector<double> &dpost) {
  std::vector<double> dz(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    dz[i] = pre[i] > 0.0 ? dpost[i] : 0.0;
  }
  return dz;
}

}  // namespace

void LayerSpec::validate() const {
  if (input_dim <= 0) throw std::runtime_error("input dimension must be positive");
  check_positive_dims(encoder, "encoder");
  check_positive_dims(head, "head");
  if (head.back() != 1) {
    throw std::runtime_error("head must end in a single logit");
  }
}

PolicyNet init_network(const LayerSpec &spec, std::uint64_t seed) {
  spec.validate();
  PolicyNet net;
  net.spec = spec;
  Rng rng(seed);

  auto make_layer = [&rng](int in, int out) {
    Layer layer;
    layer.in = in;
    layer.out = out;
    layer.w.resize(static_cast<std::size_t>(in) * out);
    layer.b.assign(out, 0.0);
    const double bound = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double &w : layer.w) w = dist(rng);
    return layer;
  };

  int prev = spec.input_dim;
  for (int width : spec.encoder) {
    net.encoder.push_back(make_layer(prev, width));
    prev = width;
  }
  prev = spec.head_input_dim();
  for (int width : spec.head) {
    net.head.push_back(make_layer(prev, width));
    prev = width;
  }
  return net;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double log_sigmoid(double x) {
  // -softplus(-x), written to avoid overflow on either tail.
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double bce_with_logit(double logit, int target) {
  return target == 1 ? -log_sigmoid(logit) : -log_sigmoid(-logit);
}

ForwardCache forward(const PolicyNet &net, std::span<const double> input_a,
                     std::span<const double> input_b) {
  const LayerSpec &spec = net.spec;
  if (static_cast<int>(input_a.size()) != spec.input_dim ||
      static_cast<int>(input_b.size()) != spec.input_dim) {
    throw std::runtime_error("forward: input dimension mismatch");
  }

  ForwardCache cache;
  cache.input_a.assign(input_a.begin(), input_a.end());
  cache.input_b.assign(input_b.begin(), input_b.end());

  auto run_encoder = [&net](const std::vector<double> &input,
                            std::vector<std::vector<double>> *pre,
                            std::vector<std::vector<double>> *post) {
    const std::vector<double> *x = &input;
    for (const Layer &layer : net.encoder) {
      std::vector<double> z;
      affine(layer, *x, &z);
      pre->push_back(z);
      post->push_back(relu(z));
      x = &post->back();
    }
  };
  run_encoder(cache.input_a, &cache.enc_pre_a, &cache.enc_post_a);
  run_encoder(cache.input_b, &cache.enc_pre_b, &cache.enc_post_b);

  cache.concat = cache.enc_post_a.back();
  cache.concat.insert(cache.concat.end(), cache.enc_post_b.back().begin(),
                      cache.enc_post_b.back().end());

  const std::vector<double> *x = &cache.concat;
  for (std::size_t l = 0; l < net.head.size(); ++l) {
    std::vector<double> z;
    affine(net.head[l], *x, &z);
    cache.head_pre.push_back(z);
    if (l + 1 < net.head.size()) {
      cache.head_post.push_back(relu(z));
      x = &cache.head_post.back();
    }
  }
  cache.logit = cache.head_pre.back()[0];
  // The raw sigmoid rounds to exactly 0 or 1 once the logit saturates;
  // keep the probability an interior point of (0, 1).
  constexpr double kMaxProb = 1.0 - 1e-16;
  constexpr double kMinProb = 1e-300;
  cache.prob = std::min(std::max(sigmoid(cache.logit), kMinProb), kMaxProb);
  return cache;
}

Gradients zeros_like(const PolicyNet &net) {
  Gradients grads;
  auto zero_of = [](const Layer &layer) {
    Layer g;
    g.in = layer.in;
    g.out = layer.out;
    g.w.assign(layer.w.size(), 0.0);
    g.b.assign(layer.b.size(), 0.0);
    return g;
  };
  for (const Layer &layer : net.encoder) grads.encoder.push_back(zero_of(layer));
  for (const Layer &layer : net.head) grads.head.push_back(zero_of(layer));
  return grads;
}

Gradients backprop_logit(const PolicyNet &net, const ForwardCache &cache,
                         double upstream) {
  Gradients grads = zeros_like(net);

  // Head: final layer has no activation, hidden head layers are ReLU.
  std::vector<double> dz = {upstream};
  std::vector<double> dconcat;
  for (std::size_t l = net.head.size(); l-- > 0;) {
    std::span<const double> input =
        l == 0 ? std::span<const double>(cache.concat)
               : std::span<const double>(cache.head_post[l - 1]);
    std::vector<double> dx = layer_backward(net.head[l], input, dz, &grads.head[l]);
    if (l > 0) {
      dz = relu_backward(cache.head_pre[l - 1], dx);
    } else {
      dconcat = std::move(dx);
    }
  }
  const int emb = net.spec.embedding_dim();
  std::vector<double> d_emb_a(dconcat.begin(), dconcat.begin() + emb);
  std::vector<double> d_emb_b(dconcat.begin() + emb, dconcat.end());

  auto branch_backward = [&net, &grads](const std::vector<double> &input,
                                        const std::vector<std::vector<double>> &pre,
                                        const std::vector<std::vector<double>> &post,
                                        std::vector<double> dpost) {
    for (std::size_t l = net.encoder.size(); l-- > 0;) {
      const std::vector<double> dz_l = relu_backward(pre[l], dpost);
      std::span<const double> layer_input =
          l == 0 ? std::span<const double>(input)
                 : std::span<const double>(post[l - 1]);
      dpost = layer_backward(net.encoder[l], layer_input, dz_l,
                             &grads.encoder[l]);
    }
  };
  branch_backward(cache.input_a, cache.enc_pre_a, cache.enc_post_a, d_emb_a);
  branch_backward(cache.input_b, cache.enc_pre_b, cache.enc_post_b, d_emb_b);
  return grads;
}

Gradients grad_log_bernoulli(const PolicyNet &net, const ForwardCache &cache,
                             int action) {
  return backprop_logit(net, cache, static_cast<double>(action) - cache.prob);
}

Gradients grad_bce(const PolicyNet &net, const ForwardCache &cache,
                   int target) {
  Gradients grads = grad_log_bernoulli(net, cache, target);
  for (Layer &layer : grads.encoder) {
    for (double &w : layer.w) w = -w;
    for (double &b : layer.b) b = -b;
  }
  for (Layer &layer : grads.head) {
    for (double &w : layer.w) w = -w;
    for (double &b : layer.b) b = -b;
  }
  return grads;
}

void accumulate(Gradients *acc, const Gradients &g, double scale) {
  auto add = [scale](std::vector<Layer> *into, const std::vector<Layer> &from) {
    for (std::size_t l = 0; l < from.size(); ++l) {
      for (std::size_t i = 0; i < from[l].w.size(); ++i) {
        (*into)[l].w[i] += scale * from[l].w[i];
      }
      for (std::size_t i = 0; i < from[l].b.size(); ++i) {
        (*into)[l].b[i] += scale * from[l].b[i];
      }
    }
  };
  add(&acc->encoder, g.encoder);
  add(&acc->head, g.head);
}

void sgd_step(PolicyNet *net, const Gradients &grads, double learning_rate,
              GradStep direction) {
  const double step =
      direction == GradStep::kAscent ? learning_rate : -learning_rate;
  auto apply = [step](std::vector<Layer> *params,
                      const std::vector<Layer> &grad_layers) {
    if (params->size() != grad_layers.size()) {
      throw std::runtime_error("sgd_step: layer count mismatch");
    }
    for (std::size_t l = 0; l < grad_layers.size(); ++l) {
      Layer &p = (*params)[l];
      const Layer &g = grad_layers[l];
      if (p.w.size() != g.w.size() || p.b.size() != g.b.size()) {
        throw std::runtime_error("sgd_step: parameter shape mismatch");
      }
      for (double v : g.w) {
        if (!std::isfinite(v)) throw std::runtime_error("non-finite gradient");
      }
      for (double v : g.b) {
        if (!std::isfinite(v)) throw std::runtime_error("non-finite gradient");
      }
      for (std::size_t i = 0; i < p.w.size(); ++i) p.w[i] += step * g.w[i];
      for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] += step * g.b[i];
    }
  };
  apply(&net->encoder, grads.encoder);
  apply(&net->head, grads.head);
}

int sample_bernoulli(double prob, Rng &rng) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw std::runtime_error("sample_bernoulli: probability outside [0, 1]");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return unit(rng) < prob ? 1 : 0;
}

namespace {

constexpr char kCheckpointMagic[8] = {'T', 'P', 'O', 'L', 'I', 'C', 'Y', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

void write_u32(std::ostream &out, std::uint32_t v) {
  out.write(reinterpret_cast<const char *>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream &in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char *>(&v), sizeof(v));
  return v;
}

void write_layer(std::ostream &out, const Layer &layer) {
  out.write(reinterpret_cast<const char *>(layer.w.data()),
            static_cast<std::streamsize>(layer.w.size() * sizeof(double)));
  out.write(reinterpret_cast<const char *>(layer.b.data()),
            static_cast<std::streamsize>(layer.b.size() * sizeof(double)));
}

void read_layer(std::istream &in, Layer *layer) {
  in.read(reinterpret_cast<char *>(layer->w.data()),
          static_cast<std::streamsize>(layer->w.size() * sizeof(double)));
  in.read(reinterpret_cast<char *>(layer->b.data()),
          static_cast<std::streamsize>(layer->b.size() * sizeof(double)));
}

}  // namespace

void save_policy(const PolicyNet &net, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open checkpoint for writing: " +
                             path.string());
  }
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_u32(out, kCheckpointVersion);
  write_u32(out, static_cast<std::uint32_t>(net.spec.input_dim));
  write_u32(out, static_cast<std::uint32_t>(net.spec.encoder.size()));
  for (int d : net.spec.encoder) write_u32(out, static_cast<std::uint32_t>(d));
  write_u32(out, static_cast<std::uint32_t>(net.spec.head.size()));
  for (int d : net.spec.head) write_u32(out, static_cast<std::uint32_t>(d));
  for (const Layer &layer : net.encoder) write_layer(out, layer);
  for (const Layer &layer : net.head) write_layer(out, layer);
  if (!out) {
    throw std::runtime_error("checkpoint write failed: " + path.string());
  }
}

PolicyNet load_policy(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint: " + path.string());
  }
  char magic[sizeof(kCheckpointMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not a policy checkpoint: " + path.string());
  }
  const std::uint32_t version = read_u32(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
  LayerSpec spec;
  spec.input_dim = static_cast<int>(read_u32(in));
  spec.encoder.resize(read_u32(in));
  for (int &d : spec.encoder) d = static_cast<int>(read_u32(in));
  spec.head.resize(read_u32(in));
  for (int &d : spec.head) d = static_cast<int>(read_u32(in));
  if (!in) throw std::runtime_error("truncated checkpoint: " + path.string());
  spec.validate();

  // Shape the network, then overwrite every parameter from the file.
  PolicyNet net = init_network(spec, 0);
  for (Layer &layer : net.encoder) read_layer(in, &layer);
  for (Layer &layer : net.head) read_layer(in, &layer);
  if (!in) throw std::runtime_error("truncated checkpoint: " + path.string());
  return net;
}

}  // namespace tandem
