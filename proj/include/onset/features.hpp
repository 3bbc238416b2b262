#pragma once

#include "onset/signal.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace onset {

enum class FeatureKind {
  Stats8,       // mean, max, min, kurtosis, skewness, sum, entropy, H(1) per channel
  HurstMultiQ,  // H(q) for each configured q per channel
};

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);  // "stats8" | "hurst"

struct FeatureConfig {
  FeatureKind kind = FeatureKind::Stats8;
  std::vector<int> q_values{1, 2, 3, 4, 5};
  std::size_t entropy_bins = 64;
  std::size_t hurst_tau_min = 2;
  std::size_t hurst_tau_max = 19;
  std::size_t hurst_nu = 1;

  static FeatureConfig stats8() { return FeatureConfig{}; }
  static FeatureConfig hurst_multi_q() {
    FeatureConfig cfg;
    cfg.kind = FeatureKind::HurstMultiQ;
    return cfg;
  }

  // Throws InvalidConfig naming the offending field.
  void validate(std::size_t window_length) const;

  std::size_t features_per_channel() const;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct FeatureDescriptor {
  std::string channel;
  std::string feature;

  std::string name() const { return channel + ":" + feature; }
  friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

using FeatureLayout = std::vector<FeatureDescriptor>;

// Descriptor grid for the given channels under cfg, channel-major.
FeatureLayout make_layout(const std::vector<std::string>& channel_names, const FeatureConfig& cfg);

struct FeatureVector {
  std::vector<double> values;
  FeatureLayout layout;
  // Number of features that hit a degenerate input (zero variance, zero
  // normalizer) and were set to 0.
  std::size_t degenerate_features = 0;
};

// -- scalar statistics ------------------------------------------------------
// All throw EmptySeries on an empty input.

double mean(std::span<const double> x);
double max(std::span<const double> x);
double min(std::span<const double> x);
double sum(std::span<const double> x);

// Population (divide-by-n) standardized third moment. Throws SeriesTooShort
// below 3 samples, DegenerateVariance for a constant series.
double skewness(std::span<const double> x);

// Population standardized fourth moment, not excess. Throws SeriesTooShort
// below 4 samples, DegenerateVariance for a constant series.
double kurtosis(std::span<const double> x);

// Entropy in bits of an equal-width histogram over [min, max].
double shannon_entropy(std::span<const double> x, std::size_t bins);

// Generalized Hurst exponent from the scaling of the q-th order structure
// function
//
//   K_q(tau) = <|X(t + tau) - X(t)|^q> / <|X(t)|^q>,   tau in [tau_min, tau_max]
//
// where the increment average runs over t = 0, nu, 2nu, ... with t + tau in
// range and the normalizer runs over the whole series at the same stride.
// H(q) is the least-squares slope of log K_q against log(tau / nu), divided
// by q. Returns 0 when any K_q(tau) is 0.
//
// Throws SeriesTooShort when x.size() < 4 * tau_max, ZeroNormalizer for an
// all-zero series, InvalidConfig for q < 1.
double generalized_hurst(std::span<const double> x, int q, const FeatureConfig& cfg);

// Per-window feature vector. Channel order follows the window; within a
// channel the order follows make_layout.
FeatureVector extract_features(const MultichannelSignal& window, const FeatureConfig& cfg);

// Row-major labeled (or unlabeled) feature table.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(FeatureLayout layout) : layout_(std::move(layout)) {}

  const FeatureLayout& layout() const noexcept { return layout_; }
  std::size_t width() const noexcept { return layout_.size(); }
  std::size_t rows() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * width(), width()}; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<double>& values() const noexcept { return values_; }

  // Throws InconsistentWidth when the row width differs from the layout.
  // label is 0, 1, or kUnlabeled.
  void add_row(std::span<const double> values, int label);

  static constexpr int kUnlabeled = -1;
  bool labeled() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  FeatureLayout layout_;
  std::vector<double> values_;
  std::vector<int> labels_;
};

// CSV: header of "<channel>:<feature>" names plus a final "label" column when
// the matrix is labeled.
std::string format_feature_matrix(const FeatureMatrix& m);
FeatureMatrix parse_feature_matrix(const std::string& text);
void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

}  // namespace onset
