#pragma once

#include "onset/features.hpp"
#include "onset/signal.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace onset {

inline constexpr std::size_t kDefaultWindowLength = 128;

enum class SegmentSide {
  WordAfterStart,   // [start, start + w)        label 1
  WordBeforeEnd,    // [end - w, end)            label 1
  IdleBeforeStart,  // [start - w, start)        label 0
  IdleAfterEnd,     // [end, end + w)            label 0
};

std::string to_string(SegmentSide side);
int label_of(SegmentSide side) noexcept;

inline constexpr SegmentSide kAllSides[] = {SegmentSide::WordAfterStart, SegmentSide::WordBeforeEnd,
                                            SegmentSide::IdleBeforeStart, SegmentSide::IdleAfterEnd};

struct SegmentSpec {
  std::size_t window_len = kDefaultWindowLength;
  bool discard_first_last = true;
  // When set, an event with any window outside the signal is dropped and
  // reported; otherwise extraction throws WindowOutOfBounds.
  bool skip_out_of_bounds = true;

  void validate() const;
};

struct TrainingSegment {
  std::size_t event_index = 0;
  SegmentSide side = SegmentSide::WordAfterStart;
  std::size_t begin = 0;  // sample range [begin, end) in the source signal
  std::size_t end = 0;
  int label = 0;
  MultichannelSignal window;
};

struct SegmentExtraction {
  std::vector<TrainingSegment> segments;  // ordered by event index, then kAllSides order
  std::vector<std::size_t> skipped_events;
  std::vector<std::size_t> overlapping_word_windows;  // events shorter than 2 * window_len
  std::vector<std::string> warnings;
};

// Emits the four windows around every retained event.
SegmentExtraction extract_training_segments(const MultichannelSignal& signal, const MarkerTrack& markers,
                                            const SegmentSpec& spec);

struct MarkedSignal {
  std::string id;
  MultichannelSignal signal;
  MarkerTrack markers;
};

struct InstanceOrigin {
  std::string signal_id;
  std::size_t event_index = 0;
  SegmentSide side = SegmentSide::WordAfterStart;
};

struct Corpus {
  FeatureMatrix matrix;                // labeled; row i came from origins[i]
  std::vector<InstanceOrigin> origins;
  std::vector<std::string> warnings;

  std::size_t count_label(int label) const;
};

// CAR and feature extraction on every training window, rows in
// (signal order, event index, side) order. Throws DimensionMismatch when the
// signals disagree on channel count.
Corpus build_fold_corpus(const std::vector<const MarkedSignal*>& train_signals, const FeatureConfig& cfg,
                         const SegmentSpec& spec);
Corpus build_fold_corpus(const std::vector<MarkedSignal>& train_signals, const FeatureConfig& cfg,
                         const SegmentSpec& spec);

struct Fold {
  std::vector<std::string> train_signal_ids;
  std::string test_signal_id;
};

struct FoldPlan {
  std::string subject_id;
  std::vector<Fold> folds;
};

// Leave-one-signal-out: fold i tests ids[i] and trains on the rest in their
// original order. Throws DuplicateIds, or InvalidConfig below 2 ids.
FoldPlan make_folds(const std::string& subject_id, const std::vector<std::string>& signal_ids);

}  // namespace onset
