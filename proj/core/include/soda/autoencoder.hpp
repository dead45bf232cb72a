#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "soda/nn.hpp"
#include "soda/numeric.hpp"

namespace soda {

/// Encoder/decoder pair defining the latent space and the
/// reconstruction-error signal. The latent width is strictly smaller than
/// the input width.
class Autoencoder {
 public:
  Autoencoder() = default;
  Autoencoder(FeedForward encoder, FeedForward decoder);

  std::size_t input_dim() const { return encoder_.input_dim(); }
  std::size_t latent_dim() const { return encoder_.output_dim(); }

  const FeedForward& encoder() const { return encoder_; }
  const FeedForward& decoder() const { return decoder_; }
  FeedForward& encoder() { return encoder_; }
  FeedForward& decoder() { return decoder_; }

  /// Forward pass through the encoder. Throws ShapeError on length mismatch.
  std::vector<double> encode(std::span<const double> x) const;

  /// Round trip decoder(encoder(x)).
  std::vector<double> reconstruct(std::span<const double> x) const;

  /// (1/k) * sum_i (x_i - reconstruct(x)_i)^2.
  double reconstruction_mse(std::span<const double> x) const;

  bool operator==(const Autoencoder&) const = default;

 private:
  FeedForward encoder_;
  FeedForward decoder_;
};

/// Default latent width: max(2, ceil(k/8)).
std::size_t default_latent_dim(std::size_t input_dim);

/// Fresh model with layers [k -> hidden... -> m] and the mirrored decoder,
/// relu hidden activations and linear outputs.
Autoencoder init_autoencoder(std::size_t input_dim, std::size_t latent_dim,
                             std::span<const std::size_t> hidden,
                             std::uint64_t seed);

struct AutoencoderTraining {
  Autoencoder model;
  /// Mean training reconstruction MSE per epoch; entry 0 is the value at
  /// initialization, so the trace has epochs+1 entries.
  std::vector<double> loss_trace;
};

/// Mini-batch SGD on mean squared reconstruction error. latent_dim 0 picks
/// the default. Throws DomainError on empty/undersized data or bad config,
/// TrainingError (naming the epoch) if the loss turns non-finite.
AutoencoderTraining train_autoencoder(const Matrix& features,
                                      const TrainConfig& cfg,
                                      std::size_t latent_dim = 0);

/// Mean reconstruction MSE over all rows.
double dataset_mse(const Autoencoder& model, const Matrix& features);

}  // namespace soda
