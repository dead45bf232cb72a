#include "soda/autoencoder.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "soda/error.hpp"

namespace soda {

Autoencoder::Autoencoder(FeedForward encoder, FeedForward decoder)
    : encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
  if (encoder_.output_dim() != decoder_.input_dim() ||
      encoder_.input_dim() != decoder_.output_dim()) {
    throw ShapeError("autoencoder: encoder/decoder dimensions do not chain");
  }
  if (encoder_.output_dim() >= encoder_.input_dim()) {
    throw DomainError("autoencoder: latent width must be smaller than input width");
  }
}

std::vector<double> Autoencoder::encode(std::span<const double> x) const {
  return encoder_.forward(x);
}

std::vector<double> Autoencoder::reconstruct(std::span<const double> x) const {
  return decoder_.forward(encoder_.forward(x));
}

double Autoencoder::reconstruction_mse(std::span<const double> x) const {
  const std::vector<double> xhat = reconstruct(x);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - xhat[i];
    sum += d * d;
  }
  return sum / static_cast<double>(x.size());
}

std::size_t default_latent_dim(std::size_t input_dim) {
  const std::size_t m = (input_dim + 7) / 8;
  return m < 2 ? 2 : m;
}

Autoencoder init_autoencoder(std::size_t input_dim, std::size_t latent_dim,
                             std::span<const std::size_t> hidden,
                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> enc_widths;
  enc_widths.push_back(input_dim);
  enc_widths.insert(enc_widths.end(), hidden.begin(), hidden.end());
  enc_widths.push_back(latent_dim);
  std::vector<std::size_t> dec_widths(enc_widths.rbegin(), enc_widths.rend());
  FeedForward encoder =
      make_feed_forward(enc_widths, Activation::relu, Activation::identity, rng);
  FeedForward decoder =
      make_feed_forward(dec_widths, Activation::relu, Activation::identity, rng);
  return Autoencoder(std::move(encoder), std::move(decoder));
}

double dataset_mse(const Autoencoder& model, const Matrix& features) {
  double total = 0.0;
  for (std::size_t r = 0; r < features.rows; ++r) {
    total += model.reconstruction_mse(features.row(r));
  }
  return total / static_cast<double>(features.rows);
}

AutoencoderTraining train_autoencoder(const Matrix& features,
                                      const TrainConfig& cfg,
                                      std::size_t latent_dim) {
  const std::size_t n = features.rows;
  const std::size_t k = features.cols;
  if (n < 2) throw DomainError("train_autoencoder: need at least 2 samples");
  if (cfg.batch_size == 0 || cfg.batch_size > n) {
    throw DomainError("train_autoencoder: batch_size must be in [1, n]");
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw DomainError("train_autoencoder: learning_rate must be positive");
  }
  for (double v : features.data) {
    if (!(v >= -1.0 && v <= 1.0)) {
      throw DomainError("train_autoencoder: features must lie in [-1,1]");
    }
  }

  const std::size_t m = latent_dim == 0 ? default_latent_dim(k) : latent_dim;
  if (m >= k) throw DomainError("train_autoencoder: latent_dim must be < input_dim");
  const std::vector<std::size_t> hidden =
      cfg.hidden.empty() ? std::vector<std::size_t>{64} : cfg.hidden;

  AutoencoderTraining result;
  result.model = init_autoencoder(k, m, hidden, cfg.seed);
  Autoencoder& model = result.model;
  result.loss_trace.push_back(dataset_mse(model, features));

  Rng rng(cfg.seed ^ 0x5DEECE66DULL);  // shuffling stream, distinct from init
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  FeedForwardGrad enc_grad = model.encoder().make_grad();
  FeedForwardGrad dec_grad = model.decoder().make_grad();
  FeedForward::Trace enc_trace, dec_trace;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, n);
      const double batch = static_cast<double>(stop - start);
      enc_grad.reset();
      dec_grad.reset();
      for (std::size_t idx = start; idx < stop; ++idx) {
        const auto x = features.row(order[idx]);
        const std::vector<double> z =
            model.encoder().forward_traced(x, enc_trace);
        const std::vector<double> xhat =
            model.decoder().forward_traced(z, dec_trace);
        // Per-sample loss (1/k) * sum (x - xhat)^2; gradient 2(xhat - x)/k.
        std::vector<double> dloss(k);
        double sample_loss = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          const double diff = xhat[i] - x[i];
          sample_loss += diff * diff;
          dloss[i] = 2.0 * diff / static_cast<double>(k);
        }
        epoch_loss += sample_loss / static_cast<double>(k);
        const std::vector<double> dz =
            model.decoder().backward(z, dec_trace, dloss, dec_grad);
        model.encoder().backward(x, enc_trace, dz, enc_grad);
      }
      const double scale = cfg.learning_rate / batch;
      model.encoder().apply_gradient(enc_grad, scale);
      model.decoder().apply_gradient(dec_grad, scale);
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("train_autoencoder: loss diverged at epoch " +
                          std::to_string(epoch));
    }
    result.loss_trace.push_back(epoch_loss);
  }
  return result;
}

}  // namespace soda
