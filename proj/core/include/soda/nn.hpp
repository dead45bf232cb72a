#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "soda/numeric.hpp"

namespace soda {

enum class Activation : std::uint8_t { identity = 0, relu = 1 };

/// Shared training knobs for the gradient-trained models.
struct TrainConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  double learning_rate = 1e-2;
  std::uint64_t seed = 1;
  std::vector<std::size_t> hidden = {};  // per-layer hidden widths; empty = model default
  double l2 = 0.0;
};

struct DenseLayer {
  Matrix weights;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::identity;

  std::size_t fan_in() const { return weights.cols; }
  std::size_t fan_out() const { return weights.rows; }

  bool operator==(const DenseLayer&) const = default;
};

/// Per-layer parameter gradients, mirroring a FeedForward's shape.
struct FeedForwardGrad {
  std::vector<Matrix> dw;
  std::vector<std::vector<double>> db;

  void reset();
};

/// Plain fully connected network with deterministic forward/backward passes.
struct FeedForward {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.front().fan_in(); }
  std::size_t output_dim() const { return layers.back().fan_out(); }

  /// Post-activation values per layer, cached for backprop.
  struct Trace {
    std::vector<std::vector<double>> activations;  // layers.size() entries
  };

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> forward_traced(std::span<const double> x, Trace& trace) const;

  /// Accumulates parameter gradients for one sample given dLoss/dOutput;
  /// returns dLoss/dInput.
  std::vector<double> backward(std::span<const double> x, const Trace& trace,
                               std::span<const double> output_grad,
                               FeedForwardGrad& grads) const;

  FeedForwardGrad make_grad() const;

  /// w -= scale * dw for every parameter.
  void apply_gradient(const FeedForwardGrad& grads, double scale);

  bool operator==(const FeedForward&) const = default;
};

/// Builds a network with the given layer widths (widths.size() >= 2).
/// Hidden layers use `hidden_act`, the final layer `output_act`. Weights are
/// initialized uniformly in +-sqrt(6/(fan_in+fan_out)), biases at zero.
FeedForward make_feed_forward(std::span<const std::size_t> widths,
                              Activation hidden_act, Activation output_act,
                              Rng& rng);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace soda
