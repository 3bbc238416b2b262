#pragma once

#include "onset/features.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace onset {

struct ForestParams {
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_depth;           // unlimited when empty
  std::size_t min_samples_split = 2;
  std::optional<std::size_t> features_per_split;  // ceil(sqrt(d)) when empty
  bool bootstrap = true;
  std::uint64_t rng_seed = 0;

  std::size_t resolved_features_per_split(std::size_t d) const;
  // Throws InvalidConfig naming the offending field.
  void validate(std::size_t d) const;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

// Flattened binary tree. Node 0 is the root; children always have larger
// indices than their parent. A node is a leaf when feature[i] == -1.
// Samples with x[feature] <= threshold go left.
struct DecisionTree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<std::uint32_t> count0;  // class counts of the (bootstrap) samples reaching the node
  std::vector<std::uint32_t> count1;

  std::size_t size() const noexcept { return feature.size(); }
  bool is_leaf(std::size_t node) const { return feature[node] < 0; }
  // Class-1 fraction at the leaf reached by x.
  double leaf_score(std::span<const double> x) const;
  std::size_t depth() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct Prediction {
  int label = 0;       // 1 iff score >= 0.5
  double score = 0.0;  // mean over trees of the leaf class-1 fraction
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  ForestParams params;
  FeatureLayout feature_layout;
  std::optional<double> oob_error;  // present when trained with bootstrap and some sample was out of bag

  std::size_t feature_count() const noexcept { return feature_layout.size(); }

  // Throws DimensionMismatch when x does not match the layout width.
  Prediction predict(std::span<const double> x) const;
  Prediction predict(const FeatureVector& fv) const { return predict(fv.values); }

  // Throws MalformedModelFile when a structural invariant is violated.
  void validate() const;

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

// CART trees grown on bootstrap resamples with Gini splits over a random
// feature subset per node. Tree i draws from Rng(derive_seed(rng_seed, i)),
// so the forest does not depend on `threads`.
ForestModel train(const FeatureMatrix& matrix, const ForestParams& params, std::size_t threads = 1);

inline constexpr int kModelFormatVersion = 1;

// Versioned JSON; see README for the field list.
std::string serialize_model(const ForestModel& model);
ForestModel deserialize_model(const std::string& text);
void save_model(const std::filesystem::path& path, const ForestModel& model);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace onset
