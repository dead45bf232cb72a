#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "soda/nn.hpp"
#include "soda/numeric.hpp"

namespace soda {

enum class ModelKind : std::uint8_t {
  softmax_regression = 0,
  mlp = 1,
  random_forest = 2,
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<double> class_counts;  // populated on leaves

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Binary CART tree; node 0 is the root, children index into `nodes`.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  const TreeNode& descend(std::span<const double> z) const;
  bool operator==(const DecisionTree&) const = default;
};

struct ForestParams {
  std::size_t num_trees = 50;
  std::size_t max_depth = 12;
  std::size_t min_samples_split = 2;
};

/// C-class classifier over latent vectors, one of three interchangeable
/// kinds. Gradient kinds hold a network whose logits go through softmax;
/// the forest averages per-tree leaf class distributions.
class ServiceModel {
 public:
  ModelKind kind() const { return kind_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t latent_dim() const { return latent_dim_; }

  /// argmax of predict_proba; ties resolve to the lowest class index.
  std::size_t predict(std::span<const double> z) const;

  /// Non-negative, sums to 1. Throws ShapeError on dimension mismatch.
  std::vector<double> predict_proba(std::span<const double> z) const;

  const FeedForward& net() const { return net_; }
  const std::vector<DecisionTree>& forest() const { return forest_; }

  static ServiceModel from_net(ModelKind kind, std::size_t num_classes,
                               FeedForward net);
  static ServiceModel from_forest(std::size_t num_classes,
                                  std::size_t latent_dim,
                                  std::vector<DecisionTree> forest);

  bool operator==(const ServiceModel&) const = default;

 private:
  ModelKind kind_ = ModelKind::softmax_regression;
  std::size_t num_classes_ = 0;
  std::size_t latent_dim_ = 0;
  FeedForward net_;
  std::vector<DecisionTree> forest_;
};

/// Trains the requested kind on latent rows. Labels must lie in
/// [0, num_classes) and cover at least two distinct classes;
/// num_classes == 0 infers max(label)+1. Throws DomainError otherwise.
ServiceModel train_service_model(const Matrix& latents,
                                 std::span<const int> labels,
                                 std::size_t num_classes, ModelKind kind,
                                 const TrainConfig& cfg,
                                 const ForestParams& forest = {});

/// Fraction of rows whose prediction matches the label.
double model_accuracy(const ServiceModel& model, const Matrix& latents,
                      std::span<const int> labels);

}  // namespace soda
