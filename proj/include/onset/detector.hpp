#pragma once

#include "onset/corpus.hpp"
#include "onset/features.hpp"
#include "onset/forest.hpp"
#include "onset/signal.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace onset {

struct ClassificationVector {
  std::vector<int> labels;     // one per window, 0 = idle, 1 = word
  std::vector<double> scores;  // forest score per window; may be empty
  std::size_t window_len = kDefaultWindowLength;
};

struct PredictedEvent {
  std::size_t onset_sample = 0;
  std::size_t end_sample = 0;
  double mean_score = 0.0;

  friend bool operator==(const PredictedEvent&, const PredictedEvent&) = default;
};

struct DetectionResult {
  std::vector<PredictedEvent> predicted_events;
  std::vector<double> scores;  // per window
  std::size_t window_len = kDefaultWindowLength;

  std::vector<std::size_t> onsets() const;
};

// floor(L / window_len) contiguous windows from sample 0; the remainder is
// dropped. Throws SignalTooShort when L < window_len.
std::vector<MultichannelSignal> window_signal(const MultichannelSignal& signal, std::size_t window_len);

// CAR, feature extraction and prediction per window; each window is handled
// independently. Throws DimensionMismatch when the model layout does not
// match cfg applied to the window channels.
ClassificationVector classify_windows(const std::vector<MultichannelSignal>& windows, const ForestModel& model,
                                      const FeatureConfig& cfg, std::size_t threads = 1);

// Maximal runs of 1s become events [first * w, (last + 1) * w). The event
// score is the mean window score over the run (0 when no scores are present).
DetectionResult merge_runs(const ClassificationVector& vec);

DetectionResult detect(const MultichannelSignal& signal, const ForestModel& model, const FeatureConfig& cfg,
                       std::size_t window_len = kDefaultWindowLength, std::size_t threads = 1);

// CSV header "onset_sample,end_sample,mean_score".
std::string format_detection(const DetectionResult& result);
void write_detection(const std::filesystem::path& path, const DetectionResult& result);

}  // namespace onset
