#include "onset/forest.hpp"

#include "onset/error.hpp"
#include "onset/random.hpp"
#include "onset/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <utility>

namespace onset {

namespace {

using nlohmann::json;

constexpr const char* kModelFormatName = "onset-forest";

struct NodeTask {
  int node;
  std::size_t lo;
  std::size_t hi;
  std::size_t depth;
};

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double purity = -1.0;  // (l0^2 + l1^2)/nl + (r0^2 + r1^2)/nr; larger is a lower weighted Gini
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& m, const ForestParams& p, std::size_t mtry, std::uint64_t seed)
      : m_(m), p_(p), mtry_(mtry), rng_(seed), features_(m.width()) {
    for (std::size_t j = 0; j < features_.size(); ++j) features_[j] = j;
  }

  // Returns the bootstrap draw (or all rows) so the caller can find OOB rows.
  std::vector<std::size_t> draw_samples() {
    const std::size_t n = m_.rows();
    std::vector<std::size_t> idx(n);
    if (p_.bootstrap) {
      for (auto& i : idx) i = rng_.uniform_index(n);
    } else {
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    }
    return idx;
  }

  DecisionTree grow(std::vector<std::size_t> idx) {
    DecisionTree tree;
    std::vector<NodeTask> stack;
    stack.push_back({add_node(tree, idx, 0, idx.size()), 0, idx.size(), 0});
    while (!stack.empty()) {
      const NodeTask task = stack.back();
      stack.pop_back();
      const std::size_t n = task.hi - task.lo;
      const auto node = static_cast<std::size_t>(task.node);
      const bool pure = tree.count0[node] == 0 || tree.count1[node] == 0;
      const bool depth_limited = p_.max_depth && task.depth >= *p_.max_depth;
      if (pure || depth_limited || n < p_.min_samples_split) continue;

      const Split split = best_split(idx, task.lo, task.hi);
      if (split.feature < 0) continue;

      const auto f = static_cast<std::size_t>(split.feature);
      const auto mid_it = std::stable_partition(
          idx.begin() + static_cast<std::ptrdiff_t>(task.lo), idx.begin() + static_cast<std::ptrdiff_t>(task.hi),
          [&](std::size_t i) { return m_.row(i)[f] <= split.threshold; });
      const auto mid = static_cast<std::size_t>(mid_it - idx.begin());

      tree.feature[node] = split.feature;
      tree.threshold[node] = split.threshold;
      const int l = add_node(tree, idx, task.lo, mid);
      const int r = add_node(tree, idx, mid, task.hi);
      tree.left[node] = l;
      tree.right[node] = r;
      stack.push_back({r, mid, task.hi, task.depth + 1});
      stack.push_back({l, task.lo, mid, task.depth + 1});
    }
    return tree;
  }

 private:
  int add_node(DecisionTree& tree, const std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi) {
    std::uint32_t c0 = 0;
    std::uint32_t c1 = 0;
    for (std::size_t k = lo; k < hi; ++k) (m_.label(idx[k]) == 1 ? c1 : c0) += 1;
    tree.feature.push_back(-1);
    tree.threshold.push_back(0.0);
    tree.left.push_back(-1);
    tree.right.push_back(-1);
    tree.count0.push_back(c0);
    tree.count1.push_back(c1);
    return static_cast<int>(tree.feature.size() - 1);
  }

  Split best_split(const std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi) {
    Split best;
    const std::size_t d = features_.size();
    const std::size_t n = hi - lo;
    std::uint32_t total1 = 0;
    for (std::size_t k = lo; k < hi; ++k) total1 += m_.label(idx[k]) == 1 ? 1 : 0;
    const std::uint32_t total0 = static_cast<std::uint32_t>(n) - total1;

    for (std::size_t k = 0; k < mtry_; ++k) {
      const std::size_t j = k + rng_.uniform_index(d - k);
      std::swap(features_[k], features_[j]);
      const std::size_t f = features_[k];

      scratch_.clear();
      for (std::size_t s = lo; s < hi; ++s) scratch_.emplace_back(m_.row(idx[s])[f], idx[s]);
      std::sort(scratch_.begin(), scratch_.end());

      double l0 = 0.0;
      double l1 = 0.0;
      for (std::size_t pos = 1; pos < n; ++pos) {
        (m_.label(scratch_[pos - 1].second) == 1 ? l1 : l0) += 1.0;
        const double a = scratch_[pos - 1].first;
        const double b = scratch_[pos].first;
        if (!(a < b)) continue;
        const double nl = static_cast<double>(pos);
        const double nr = static_cast<double>(n - pos);
        const double r0 = total0 - l0;
        const double r1 = total1 - l1;
        const double purity = (l0 * l0 + l1 * l1) / nl + (r0 * r0 + r1 * r1) / nr;
        if (purity > best.purity) {
          double thr = a + (b - a) / 2.0;
          if (!(thr < b)) thr = a;  // adjacent doubles: the midpoint may round up to b
          best = {static_cast<int>(f), thr, purity};
        }
      }
    }
    return best;
  }

  const FeatureMatrix& m_;
  const ForestParams& p_;
  std::size_t mtry_;
  Rng rng_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, std::size_t>> scratch_;
};

json tree_to_json(const DecisionTree& t) {
  return json{{"feature", t.feature}, {"threshold", t.threshold}, {"left", t.left},
              {"right", t.right},     {"count0", t.count0},       {"count1", t.count1}};
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorKind::MalformedModelFile, what); }

template <typename T>
std::vector<T> required_array(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) malformed(std::string("missing array '") + key + "'");
  return j.at(key).get<std::vector<T>>();
}

}  // namespace

std::size_t ForestParams::resolved_features_per_split(std::size_t d) const {
  if (features_per_split) return *features_per_split;
  const auto r = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  return std::clamp<std::size_t>(r, 1, std::max<std::size_t>(d, 1));
}

void ForestParams::validate(std::size_t d) const {
  if (n_trees < 1) throw Error(ErrorKind::InvalidConfig, "n_trees must be >= 1");
  if (min_samples_split < 2) throw Error(ErrorKind::InvalidConfig, "min_samples_split must be >= 2");
  const std::size_t mtry = resolved_features_per_split(d);
  if (mtry < 1 || mtry > d) {
    throw Error(ErrorKind::InvalidConfig, "features_per_split must lie in [1, " + std::to_string(d) + "]");
  }
}

double DecisionTree::leaf_score(std::span<const double> x) const {
  std::size_t node = 0;
  while (!is_leaf(node)) {
    const auto f = static_cast<std::size_t>(feature[node]);
    node = static_cast<std::size_t>(x[f] <= threshold[node] ? left[node] : right[node]);
  }
  const double c1 = count1[node];
  return c1 / (count0[node] + c1);
}

std::size_t DecisionTree::depth() const {
  if (feature.empty()) return 0;
  std::vector<std::size_t> level(size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!is_leaf(i)) {
      level[static_cast<std::size_t>(left[i])] = level[i] + 1;
      level[static_cast<std::size_t>(right[i])] = level[i] + 1;
    }
  }
  return deepest;
}

Prediction ForestModel::predict(std::span<const double> x) const {
  if (x.size() != feature_count()) {
    throw Error(ErrorKind::DimensionMismatch, "feature vector has " + std::to_string(x.size()) +
                                                  " entries, model expects " + std::to_string(feature_count()));
  }
  double acc = 0.0;
  for (const auto& t : trees) acc += t.leaf_score(x);
  Prediction p;
  p.score = trees.empty() ? 0.0 : acc / static_cast<double>(trees.size());
  p.label = p.score >= 0.5 ? 1 : 0;
  return p;
}

void ForestModel::validate() const {
  const std::size_t d = feature_count();
  if (d == 0) malformed("empty feature layout");
  if (trees.empty()) malformed("model has no trees");
  for (std::size_t ti = 0; ti < trees.size(); ++ti) {
    const DecisionTree& t = trees[ti];
    const std::size_t n = t.size();
    const std::string where = "tree " + std::to_string(ti);
    if (n == 0) malformed(where + " is empty");
    if (t.threshold.size() != n || t.left.size() != n || t.right.size() != n || t.count0.size() != n ||
        t.count1.size() != n) {
      malformed(where + ": node arrays differ in length");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (t.is_leaf(i)) {
        if (t.count0[i] + t.count1[i] == 0) malformed(where + ": leaf with no samples");
        continue;
      }
      if (static_cast<std::size_t>(t.feature[i]) >= d) malformed(where + ": feature index out of range");
      if (!std::isfinite(t.threshold[i])) malformed(where + ": non-finite threshold");
      const auto in_range = [&](int c) { return c > static_cast<int>(i) && static_cast<std::size_t>(c) < n; };
      if (!in_range(t.left[i]) || !in_range(t.right[i])) malformed(where + ": invalid child index");
    }
  }
}

ForestModel train(const FeatureMatrix& matrix, const ForestParams& params, std::size_t threads) {
  if (matrix.rows() == 0) throw Error(ErrorKind::EmptyMatrix, "training matrix has no rows");
  if (matrix.width() == 0) throw Error(ErrorKind::InconsistentWidth, "training matrix has no feature columns");
  if (!matrix.labeled()) throw Error(ErrorKind::InvalidConfig, "training matrix is unlabeled");
  params.validate(matrix.width());

  const std::size_t n_trees = params.n_trees;
  const std::size_t mtry = params.resolved_features_per_split(matrix.width());
  std::vector<DecisionTree> trees(n_trees);
  std::vector<std::vector<std::pair<std::size_t, double>>> oob_votes(n_trees);

  const auto grow_one = [&](std::size_t ti) {
    TreeBuilder builder(matrix, params, mtry, derive_seed(params.rng_seed, ti));
    auto idx = builder.draw_samples();
    std::vector<char> in_bag(matrix.rows(), 0);
    for (std::size_t i : idx) in_bag[i] = 1;
    trees[ti] = builder.grow(std::move(idx));
    if (params.bootstrap) {
      for (std::size_t i = 0; i < matrix.rows(); ++i) {
        if (!in_bag[i]) oob_votes[ti].emplace_back(i, trees[ti].leaf_score(matrix.row(i)));
      }
    }
  };

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, n_trees);
  if (threads <= 1) {
    for (std::size_t ti = 0; ti < n_trees; ++ti) grow_one(ti);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t ti = next.fetch_add(1); ti < n_trees; ti = next.fetch_add(1)) grow_one(ti);
      });
    }
  }

  ForestModel model{std::move(trees), params, matrix.layout(), std::nullopt};
  model.params.features_per_split = mtry;

  if (params.bootstrap) {
    std::vector<double> score_sum(matrix.rows(), 0.0);
    std::vector<std::size_t> votes(matrix.rows(), 0);
    for (const auto& tree_votes : oob_votes) {
      for (const auto& [i, s] : tree_votes) {
        score_sum[i] += s;
        ++votes[i];
      }
    }
    std::size_t evaluated = 0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
      if (votes[i] == 0) continue;
      ++evaluated;
      const int predicted = score_sum[i] / static_cast<double>(votes[i]) >= 0.5 ? 1 : 0;
      wrong += predicted != matrix.label(i) ? 1 : 0;
    }
    if (evaluated > 0) model.oob_error = static_cast<double>(wrong) / static_cast<double>(evaluated);
  }
  return model;
}

std::string serialize_model(const ForestModel& model) {
  json params{{"n_trees", model.params.n_trees},
              {"max_depth", model.params.max_depth ? json(*model.params.max_depth) : json(nullptr)},
              {"min_samples_split", model.params.min_samples_split},
              {"features_per_split", model.params.resolved_features_per_split(model.feature_count())},
              {"bootstrap", model.params.bootstrap},
              {"rng_seed", model.params.rng_seed}};
  json layout = json::array();
  for (const auto& fd : model.feature_layout) layout.push_back(fd.name());
  json trees = json::array();
  for (const auto& t : model.trees) trees.push_back(tree_to_json(t));
  json doc{{"format", kModelFormatName},
           {"version", kModelFormatVersion},
           {"rng", "mt19937_64+splitmix64"},
           {"params", std::move(params)},
           {"feature_layout", std::move(layout)},
           {"oob_error", model.oob_error ? json(*model.oob_error) : json(nullptr)},
           {"trees", std::move(trees)}};
  return doc.dump() + "\n";
}

ForestModel deserialize_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    malformed(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kModelFormatName) malformed("not an onset-forest model");
  if (!doc.contains("version") || !doc.at("version").is_number_integer()) malformed("missing format version");
  const int version = doc.at("version").get<int>();
  if (version != kModelFormatVersion) {
    throw Error(ErrorKind::VersionMismatch, "model format version " + std::to_string(version) +
                                                " is not supported (expected " +
                                                std::to_string(kModelFormatVersion) + ")");
  }

  ForestModel model;
  try {
    const json& p = doc.at("params");
    model.params.n_trees = p.at("n_trees").get<std::size_t>();
    if (!p.at("max_depth").is_null()) model.params.max_depth = p.at("max_depth").get<std::size_t>();
    model.params.min_samples_split = p.at("min_samples_split").get<std::size_t>();
    model.params.features_per_split = p.at("features_per_split").get<std::size_t>();
    model.params.bootstrap = p.at("bootstrap").get<bool>();
    model.params.rng_seed = p.at("rng_seed").get<std::uint64_t>();

    for (const auto& name : required_array<std::string>(doc, "feature_layout")) {
      const auto colon = name.rfind(':');
      if (colon == std::string::npos) malformed("layout entry '" + name + "' is not <channel>:<feature>");
      model.feature_layout.push_back({name.substr(0, colon), name.substr(colon + 1)});
    }
    if (!doc.at("oob_error").is_null()) model.oob_error = doc.at("oob_error").get<double>();

    for (const auto& jt : doc.at("trees")) {
      DecisionTree t;
      t.feature = required_array<int>(jt, "feature");
      t.threshold = required_array<double>(jt, "threshold");
      t.left = required_array<int>(jt, "left");
      t.right = required_array<int>(jt, "right");
      t.count0 = required_array<std::uint32_t>(jt, "count0");
      t.count1 = required_array<std::uint32_t>(jt, "count1");
      model.trees.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    malformed(std::string("bad field: ") + e.what());
  }
  if (model.trees.size() != model.params.n_trees) malformed("tree count does not match params.n_trees");
  model.validate();
  return model;
}

void save_model(const std::filesystem::path& path, const ForestModel& model) {
  text::write_file(path, serialize_model(model));
}

ForestModel load_model(const std::filesystem::path& path) {
  try {
    return deserialize_model(text::read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    rethrow_with_context(e, path.string());
  }
}

}  // namespace onset
