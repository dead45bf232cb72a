#include "soda/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "soda/error.hpp"

namespace soda {

void FeedForwardGrad::reset() {
  for (auto& w : dw) std::fill(w.data.begin(), w.data.end(), 0.0);
  for (auto& b : db) std::fill(b.begin(), b.end(), 0.0);
}

namespace {

double activate(double z, Activation act) {
  return act == Activation::relu ? (z > 0.0 ? z : 0.0) : z;
}

// Derivative expressed through the post-activation value; for relu the
// subgradient at exactly zero is taken as zero.
double activate_derivative(double post, Activation act) {
  return act == Activation::relu ? (post > 0.0 ? 1.0 : 0.0) : 1.0;
}

}  // namespace

std::vector<double> FeedForward::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw ShapeError("forward: input length " + std::to_string(x.size()) +
                     " != " + std::to_string(input_dim()));
  }
  std::vector<double> cur(x.begin(), x.end());
  for (const auto& layer : layers) {
    std::vector<double> next(layer.fan_out());
    for (std::size_t r = 0; r < layer.fan_out(); ++r) {
      double z = layer.bias[r];
      const double* wrow = layer.weights.data.data() + r * layer.weights.cols;
      for (std::size_t c = 0; c < layer.fan_in(); ++c) z += wrow[c] * cur[c];
      next[r] = activate(z, layer.activation);
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> FeedForward::forward_traced(std::span<const double> x,
                                                Trace& trace) const {
  if (x.size() != input_dim()) {
    throw ShapeError("forward_traced: input length mismatch");
  }
  trace.activations.assign(layers.size(), {});
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    std::vector<double> next(layer.fan_out());
    for (std::size_t r = 0; r < layer.fan_out(); ++r) {
      double z = layer.bias[r];
      const double* wrow = layer.weights.data.data() + r * layer.weights.cols;
      for (std::size_t c = 0; c < layer.fan_in(); ++c) z += wrow[c] * cur[c];
      next[r] = activate(z, layer.activation);
    }
    trace.activations[l] = next;
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> FeedForward::backward(std::span<const double> x,
                                          const Trace& trace,
                                          std::span<const double> output_grad,
                                          FeedForwardGrad& grads) const {
  if (output_grad.size() != output_dim()) {
    throw ShapeError("backward: output gradient length mismatch");
  }
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& layer = layers[li];
    const auto& post = trace.activations[li];
    for (std::size_t r = 0; r < layer.fan_out(); ++r) {
      delta[r] *= activate_derivative(post[r], layer.activation);
    }
    std::span<const double> input =
        li == 0 ? x : std::span<const double>(trace.activations[li - 1]);
    auto& dw = grads.dw[li];
    auto& db = grads.db[li];
    for (std::size_t r = 0; r < layer.fan_out(); ++r) {
      db[r] += delta[r];
      double* dwrow = dw.data.data() + r * dw.cols;
      for (std::size_t c = 0; c < layer.fan_in(); ++c) {
        dwrow[c] += delta[r] * input[c];
      }
    }
    if (li == 0) break;
    std::vector<double> prev(layer.fan_in(), 0.0);
    for (std::size_t r = 0; r < layer.fan_out(); ++r) {
      const double* wrow = layer.weights.data.data() + r * layer.weights.cols;
      for (std::size_t c = 0; c < layer.fan_in(); ++c) {
        prev[c] += wrow[c] * delta[r];
      }
    }
    delta = std::move(prev);
  }
  // dLoss/dInput of the first layer.
  std::vector<double> input_grad(layers.front().fan_in(), 0.0);
  // delta currently holds dLoss/d(pre-activation of layer 0) after the loop
  // body above ran for li==0; recompute the projection through its weights.
  const auto& first = layers.front();
  for (std::size_t r = 0; r < first.fan_out(); ++r) {
    const double* wrow = first.weights.data.data() + r * first.weights.cols;
    for (std::size_t c = 0; c < first.fan_in(); ++c) {
      input_grad[c] += wrow[c] * delta[r];
    }
  }
  return input_grad;
}

FeedForwardGrad FeedForward::make_grad() const {
  FeedForwardGrad g;
  g.dw.reserve(layers.size());
  g.db.reserve(layers.size());
  for (const auto& layer : layers) {
    g.dw.emplace_back(layer.fan_out(), layer.fan_in());
    g.db.emplace_back(layer.fan_out(), 0.0);
  }
  return g;
}

void FeedForward::apply_gradient(const FeedForwardGrad& grads, double scale) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& layer = layers[l];
    const auto& dw = grads.dw[l];
    for (std::size_t i = 0; i < layer.weights.data.size(); ++i) {
      layer.weights.data[i] -= scale * dw.data[i];
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      layer.bias[i] -= scale * grads.db[l][i];
    }
  }
}

FeedForward make_feed_forward(std::span<const std::size_t> widths,
                              Activation hidden_act, Activation output_act,
                              Rng& rng) {
  if (widths.size() < 2) {
    throw DomainError("make_feed_forward: need at least input and output widths");
  }
  FeedForward net;
  net.layers.reserve(widths.size() - 1);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    const std::size_t fan_in = widths[l];
    const std::size_t fan_out = widths[l + 1];
    if (fan_in == 0 || fan_out == 0) {
      throw DomainError("make_feed_forward: zero layer width");
    }
    layer.weights = Matrix(fan_out, fan_in);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& w : layer.weights.data) w = rng.uniform(-bound, bound);
    layer.bias.assign(fan_out, 0.0);
    layer.activation =
        (l + 2 == widths.size()) ? output_act : hidden_act;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - zmax);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

}  // namespace soda
