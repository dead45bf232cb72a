#include "soda/service_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "soda/error.hpp"

namespace soda {

const TreeNode& DecisionTree::descend(std::span<const double> z) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    node = z[static_cast<std::size_t>(node->feature)] <= node->threshold
               ? &nodes[static_cast<std::size_t>(node->left)]
               : &nodes[static_cast<std::size_t>(node->right)];
  }
  return *node;
}

ServiceModel ServiceModel::from_net(ModelKind kind, std::size_t num_classes,
                                    FeedForward net) {
  if (kind == ModelKind::random_forest) {
    throw DomainError("from_net: forest kind requires trees");
  }
  if (net.output_dim() != num_classes) {
    throw ShapeError("from_net: network output width != num_classes");
  }
  ServiceModel m;
  m.kind_ = kind;
  m.num_classes_ = num_classes;
  m.latent_dim_ = net.input_dim();
  m.net_ = std::move(net);
  return m;
}

ServiceModel ServiceModel::from_forest(std::size_t num_classes,
                                       std::size_t latent_dim,
                                       std::vector<DecisionTree> forest) {
  ServiceModel m;
  m.kind_ = ModelKind::random_forest;
  m.num_classes_ = num_classes;
  m.latent_dim_ = latent_dim;
  m.forest_ = std::move(forest);
  return m;
}

std::vector<double> ServiceModel::predict_proba(std::span<const double> z) const {
  if (z.size() != latent_dim_) {
    throw ShapeError("predict_proba: input length " + std::to_string(z.size()) +
                     " != latent dim " + std::to_string(latent_dim_));
  }
  if (kind_ != ModelKind::random_forest) {
    return softmax(net_.forward(z));
  }
  std::vector<double> proba(num_classes_, 0.0);
  for (const auto& tree : forest_) {
    const TreeNode& leaf = tree.descend(z);
    double total = 0.0;
    for (double c : leaf.class_counts) total += c;
    for (std::size_t i = 0; i < num_classes_; ++i) {
      proba[i] += leaf.class_counts[i] / total;
    }
  }
  for (auto& p : proba) p /= static_cast<double>(forest_.size());
  return proba;
}

std::size_t ServiceModel::predict(std::span<const double> z) const {
  const std::vector<double> proba = predict_proba(z);
  std::size_t best = 0;
  for (std::size_t i = 1; i < proba.size(); ++i) {
    if (proba[i] > proba[best]) best = i;
  }
  return best;
}

namespace {

// ---- CART construction ----

struct TreeBuilder {
  const Matrix& latents;
  std::span<const int> labels;
  std::size_t num_classes;
  const ForestParams& params;
  Rng& rng;
  std::vector<TreeNode> nodes;

  double gini(const std::vector<double>& counts, double total) const {
    double g = 1.0;
    for (double c : counts) {
      const double p = c / total;
      g -= p * p;
    }
    return g;
  }

  std::vector<double> count_classes(std::span<const std::size_t> idx) const {
    std::vector<double> counts(num_classes, 0.0);
    for (std::size_t i : idx) counts[static_cast<std::size_t>(labels[i])] += 1.0;
    return counts;
  }

  std::int32_t make_leaf(std::span<const std::size_t> idx) {
    TreeNode leaf;
    leaf.class_counts = count_classes(idx);
    nodes.push_back(std::move(leaf));
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  std::int32_t build(std::vector<std::size_t> idx, std::size_t depth) {
    const std::vector<double> counts = count_classes(idx);
    const double total = static_cast<double>(idx.size());
    const double parent_gini = gini(counts, total);
    const bool pure = std::count_if(counts.begin(), counts.end(),
                                    [](double c) { return c > 0.0; }) <= 1;
    if (pure || depth >= params.max_depth || idx.size() < params.min_samples_split) {
      return make_leaf(idx);
    }

    const std::size_t m = latents.cols;
    const std::size_t subsample = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(m))));
    const std::vector<std::size_t> features =
        rng.sample_without_replacement(m, std::min(subsample, m));

    double best_gain = 0.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> column(idx.size());
    for (std::size_t f : features) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        column[i] = {latents.at(idx[i], f), labels[idx[i]]};
      }
      std::sort(column.begin(), column.end());
      std::vector<double> left_counts(num_classes, 0.0);
      std::vector<double> right_counts = counts;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        const auto cls = static_cast<std::size_t>(column[i].second);
        left_counts[cls] += 1.0;
        right_counts[cls] -= 1.0;
        if (column[i].first == column[i + 1].first) continue;  // no split point
        const double nl = static_cast<double>(i + 1);
        const double nr = total - nl;
        const double gain = parent_gini - (nl / total) * gini(left_counts, nl) -
                            (nr / total) * gini(right_counts, nr);
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = f;
          best_threshold = (column[i].first + column[i + 1].first) / 2.0;
        }
      }
    }
    if (best_gain <= 0.0) return make_leaf(idx);

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      (latents.at(i, best_feature) <= best_threshold ? left_idx : right_idx)
          .push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) return make_leaf(idx);

    TreeNode node;
    node.feature = static_cast<std::int32_t>(best_feature);
    node.threshold = best_threshold;
    nodes.push_back(node);
    const std::size_t self = nodes.size() - 1;
    const std::int32_t left = build(std::move(left_idx), depth + 1);
    const std::int32_t right = build(std::move(right_idx), depth + 1);
    nodes[self].left = left;
    nodes[self].right = right;
    return static_cast<std::int32_t>(self);
  }
};

DecisionTree grow_tree(const Matrix& latents, std::span<const int> labels,
                       std::size_t num_classes, const ForestParams& params,
                       Rng& rng) {
  // Bootstrap sample, one draw per original row.
  std::vector<std::size_t> sample(latents.rows);
  for (auto& s : sample) s = rng.below(latents.rows);
  TreeBuilder builder{latents, labels, num_classes, params, rng, {}};
  builder.build(std::move(sample), 0);
  DecisionTree tree;
  tree.nodes = std::move(builder.nodes);
  return tree;
}

ServiceModel train_softmax_regression(const Matrix& latents,
                                      std::span<const int> labels,
                                      std::size_t num_classes,
                                      const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  const std::size_t widths[] = {latents.cols, num_classes};
  FeedForward net = make_feed_forward(widths, Activation::identity,
                                      Activation::identity, rng);
  const std::size_t n = latents.rows;
  FeedForwardGrad grads = net.make_grad();
  FeedForward::Trace trace;
  const double l2 = cfg.l2;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    grads.reset();
    for (std::size_t r = 0; r < n; ++r) {
      const auto z = latents.row(r);
      const std::vector<double> logits = net.forward_traced(z, trace);
      std::vector<double> dlogits = softmax(logits);
      dlogits[static_cast<std::size_t>(labels[r])] -= 1.0;
      net.backward(z, trace, dlogits, grads);
    }
    // L2 penalty on weights only.
    if (l2 > 0.0) {
      auto& w = net.layers.front().weights;
      auto& dw = grads.dw.front();
      for (std::size_t i = 0; i < w.data.size(); ++i) {
        dw.data[i] += l2 * static_cast<double>(n) * w.data[i];
      }
    }
    net.apply_gradient(grads, cfg.learning_rate / static_cast<double>(n));
  }
  return ServiceModel::from_net(ModelKind::softmax_regression, num_classes,
                                std::move(net));
}

ServiceModel train_mlp(const Matrix& latents, std::span<const int> labels,
                       std::size_t num_classes, const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<std::size_t> widths;
  widths.push_back(latents.cols);
  if (cfg.hidden.empty()) {
    widths.push_back(64);
    widths.push_back(32);
  } else {
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  }
  widths.push_back(num_classes);
  FeedForward net =
      make_feed_forward(widths, Activation::relu, Activation::identity, rng);

  const std::size_t n = latents.rows;
  const std::size_t batch_size = std::min(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(cfg.seed ^ 0x5DEECE66DULL);
  FeedForwardGrad grads = net.make_grad();
  FeedForward::Trace trace;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t stop = std::min(start + batch_size, n);
      grads.reset();
      for (std::size_t i = start; i < stop; ++i) {
        const auto z = latents.row(order[i]);
        const std::vector<double> logits = net.forward_traced(z, trace);
        std::vector<double> dlogits = softmax(logits);
        dlogits[static_cast<std::size_t>(labels[order[i]])] -= 1.0;
        net.backward(z, trace, dlogits, grads);
      }
      net.apply_gradient(grads,
                         cfg.learning_rate / static_cast<double>(stop - start));
    }
  }
  return ServiceModel::from_net(ModelKind::mlp, num_classes, std::move(net));
}

}  // namespace

ServiceModel train_service_model(const Matrix& latents,
                                 std::span<const int> labels,
                                 std::size_t num_classes, ModelKind kind,
                                 const TrainConfig& cfg,
                                 const ForestParams& forest) {
  const std::size_t n = latents.rows;
  if (n == 0 || labels.size() != n) {
    throw DomainError("train_service_model: labels/rows mismatch");
  }
  int max_label = -1;
  for (int label : labels) {
    if (label < 0) throw DomainError("train_service_model: negative label");
    max_label = std::max(max_label, label);
  }
  if (num_classes == 0) {
    num_classes = static_cast<std::size_t>(max_label) + 1;
  } else if (static_cast<std::size_t>(max_label) >= num_classes) {
    throw DomainError("train_service_model: label " + std::to_string(max_label) +
                      " outside [0," + std::to_string(num_classes) + ")");
  }
  std::vector<bool> seen(num_classes, false);
  for (int label : labels) seen[static_cast<std::size_t>(label)] = true;
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    throw DomainError("train_service_model: need at least 2 distinct classes");
  }
  if (n < num_classes) {
    throw DomainError("train_service_model: fewer samples than classes");
  }

  switch (kind) {
    case ModelKind::softmax_regression:
      return train_softmax_regression(latents, labels, num_classes, cfg);
    case ModelKind::mlp:
      return train_mlp(latents, labels, num_classes, cfg);
    case ModelKind::random_forest: {
      if (forest.num_trees == 0) {
        throw DomainError("train_service_model: num_trees must be positive");
      }
      Rng rng(cfg.seed);
      std::vector<DecisionTree> trees;
      trees.reserve(forest.num_trees);
      for (std::size_t i = 0; i < forest.num_trees; ++i) {
        Rng tree_rng = rng.fork();
        trees.push_back(grow_tree(latents, labels, num_classes, forest, tree_rng));
      }
      return ServiceModel::from_forest(num_classes, latents.cols,
                                       std::move(trees));
    }
  }
  throw DomainError("train_service_model: unknown kind");
}

double model_accuracy(const ServiceModel& model, const Matrix& latents,
                      std::span<const int> labels) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < latents.rows; ++r) {
    if (model.predict(latents.row(r)) == static_cast<std::size_t>(labels[r])) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(latents.rows);
}

}  // namespace soda
