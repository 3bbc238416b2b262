#pragma once

#include "onset/corpus.hpp"
#include "onset/features.hpp"
#include "onset/forest.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace onset {

// Timing error tolerance region around a true onset. The window spans
// round(tolerance_s * rate) samples; centered windows are the closed interval
// [onset - w/2, onset + w/2], otherwise [onset, onset + w].
struct TetrSpec {
  double tolerance_s = 3.0;
  bool centered = true;

  double window_samples(double rate_hz) const;
  bool contains(std::size_t true_onset, std::size_t predicted_onset, double rate_hz) const;
};

struct OnsetMatch {
  std::size_t true_index = 0;
  std::size_t predicted_index = 0;
  std::size_t true_onset = 0;
  std::size_t predicted_onset = 0;

  friend bool operator==(const OnsetMatch&, const OnsetMatch&) = default;
};

// One-to-one greedy matching. True onsets are visited in time order; each
// takes the nearest still-unused predicted onset inside its region (earlier
// one on a distance tie). Both lists must be sorted ascending
// (InvalidConfig otherwise).
std::vector<OnsetMatch> match_onsets(const std::vector<std::size_t>& true_onsets,
                                     const std::vector<std::size_t>& predicted_onsets, const TetrSpec& tetr,
                                     double rate_hz);

// Throws NoTrueOnsets when n_true == 0.
double true_positive_rate(const std::vector<OnsetMatch>& matches, std::size_t n_true);

struct SubjectData {
  std::string subject_id;
  std::vector<MarkedSignal> signals;
};

struct CvConfig {
  FeatureConfig features;
  ForestParams forest;
  SegmentSpec segments;
  std::vector<double> tetr_s{3.0, 4.0};
  std::size_t threads = 1;
};

struct TetrScore {
  double tetr_s = 0.0;
  std::size_t matches = 0;
  double tpr = 0.0;
};

struct FoldResult {
  std::size_t fold_id = 0;  // 1-based
  std::string test_signal_id;
  std::size_t n_train_instances = 0;
  std::size_t n_true_onsets = 0;
  std::size_t n_predicted = 0;
  std::optional<double> oob_error;
  std::vector<TetrScore> scores;  // one per configured TETR, same order
  std::vector<std::string> warnings;
};

struct EvalReport {
  std::string subject_id;
  std::vector<FoldResult> per_fold;
  std::vector<TetrScore> averages;  // tpr = mean over folds, matches = total
  std::string config_fingerprint;
  CvConfig config;
};

// 64-bit FNV-1a over the canonical JSON of the feature config and forest
// params (which carry the seed), as 16 hex digits.
std::string config_fingerprint(const FeatureConfig& features, const ForestParams& forest);

// Seed used for the forest of fold `fold_index` (0-based).
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold_index);

// Leave-one-signal-out over the subject's signals: build the corpus from the
// training signals, train, detect on the held-out signal and score it with
// every TETR. The TPR denominator is every true onset of the test signal.
EvalReport run_cross_validation(const SubjectData& subject, const CvConfig& cfg);

// Same protocol with a fixed classifier in place of training; used to check
// the scoring path against trivial models.
EvalReport run_cross_validation_with_model(const SubjectData& subject, const CvConfig& cfg,
                                           const ForestModel& model);

std::string format_report_json(const EvalReport& report);
// "subject,fold,tetr_s,tpr", one row per fold and TETR.
std::string format_report_csv(const std::vector<EvalReport>& reports);

}  // namespace onset
