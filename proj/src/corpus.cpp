#include "onset/corpus.hpp"

#include "onset/error.hpp"

#include <set>

namespace onset {

namespace {

struct Range {
  long long begin;
  long long end;
};

Range window_range(const Event& e, SegmentSide side, std::size_t w) {
  const auto start = static_cast<long long>(e.start_sample);
  const auto end = static_cast<long long>(e.end_sample);
  const auto len = static_cast<long long>(w);
  switch (side) {
    case SegmentSide::WordAfterStart: return {start, start + len};
    case SegmentSide::WordBeforeEnd: return {end - len, end};
    case SegmentSide::IdleBeforeStart: return {start - len, start};
    case SegmentSide::IdleAfterEnd: return {end, end + len};
  }
  return {0, 0};
}

}  // namespace

std::string to_string(SegmentSide side) {
  switch (side) {
    case SegmentSide::WordAfterStart: return "word_after_start";
    case SegmentSide::WordBeforeEnd: return "word_before_end";
    case SegmentSide::IdleBeforeStart: return "idle_before_start";
    case SegmentSide::IdleAfterEnd: return "idle_after_end";
  }
  return "unknown";
}

int label_of(SegmentSide side) noexcept {
  return side == SegmentSide::WordAfterStart || side == SegmentSide::WordBeforeEnd ? 1 : 0;
}

void SegmentSpec::validate() const {
  if (window_len < 2) throw Error(ErrorKind::InvalidConfig, "window_len must be >= 2");
}

SegmentExtraction extract_training_segments(const MultichannelSignal& signal, const MarkerTrack& markers,
                                            const SegmentSpec& spec) {
  spec.validate();
  SegmentExtraction out;
  const auto& events = markers.events();
  std::size_t first = 0;
  std::size_t last = events.size();
  if (spec.discard_first_last) {
    if (events.size() < 3) return out;
    first = 1;
    last = events.size() - 1;
  }
  const auto n = static_cast<long long>(signal.samples());

  for (std::size_t ei = first; ei < last; ++ei) {
    const Event& e = events[ei];
    bool in_bounds = true;
    for (SegmentSide side : kAllSides) {
      const Range r = window_range(e, side, spec.window_len);
      if (r.begin < 0 || r.end > n) {
        const std::string msg = "event " + std::to_string(ei) + ": " + to_string(side) + " window [" +
                                std::to_string(r.begin) + "," + std::to_string(r.end) +
                                ") outside signal of length " + std::to_string(n);
        if (!spec.skip_out_of_bounds) throw Error(ErrorKind::WindowOutOfBounds, msg);
        out.warnings.push_back("skipped " + msg);
        in_bounds = false;
        break;
      }
    }
    if (!in_bounds) {
      out.skipped_events.push_back(ei);
      continue;
    }
    if (e.length() < 2 * spec.window_len) {
      out.overlapping_word_windows.push_back(ei);
      if (e.length() < spec.window_len) {
        out.warnings.push_back("event " + std::to_string(ei) + " is shorter than one window; word windows extend past it");
      }
    }
    for (SegmentSide side : kAllSides) {
      const Range r = window_range(e, side, spec.window_len);
      const auto b = static_cast<std::size_t>(r.begin);
      const auto en = static_cast<std::size_t>(r.end);
      out.segments.push_back({ei, side, b, en, label_of(side), signal.slice(b, en)});
    }
  }
  return out;
}

std::size_t Corpus::count_label(int label) const {
  std::size_t c = 0;
  for (int l : matrix.labels()) c += (l == label) ? 1 : 0;
  return c;
}

Corpus build_fold_corpus(const std::vector<const MarkedSignal*>& train_signals, const FeatureConfig& cfg,
                         const SegmentSpec& spec) {
  spec.validate();
  cfg.validate(spec.window_len);
  if (train_signals.empty()) throw Error(ErrorKind::EmptyMatrix, "no training signals");

  const MultichannelSignal& reference = train_signals.front()->signal;
  Corpus corpus{FeatureMatrix(make_layout(reference.channel_names(), cfg)), {}, {}};

  for (const MarkedSignal* ms : train_signals) {
    if (ms->signal.channels() != reference.channels()) {
      throw Error(ErrorKind::DimensionMismatch, "signal '" + ms->id + "' has " +
                                                    std::to_string(ms->signal.channels()) + " channels, expected " +
                                                    std::to_string(reference.channels()));
    }
    SegmentExtraction ex;
    try {
      ex = extract_training_segments(ms->signal, ms->markers, spec);
    } catch (const Error& e) {
      rethrow_with_context(e, "signal '" + ms->id + "'");
    }
    for (auto& w : ex.warnings) corpus.warnings.push_back(ms->id + ": " + w);
    for (const auto& seg : ex.segments) {
      FeatureVector fv;
      try {
        fv = extract_features(apply_car(seg.window), cfg);
      } catch (const Error& e) {
        rethrow_with_context(e, "signal '" + ms->id + "' event " + std::to_string(seg.event_index));
      }
      corpus.matrix.add_row(fv.values, seg.label);
      corpus.origins.push_back({ms->id, seg.event_index, seg.side});
    }
  }
  return corpus;
}

Corpus build_fold_corpus(const std::vector<MarkedSignal>& train_signals, const FeatureConfig& cfg,
                         const SegmentSpec& spec) {
  std::vector<const MarkedSignal*> ptrs;
  ptrs.reserve(train_signals.size());
  for (const auto& s : train_signals) ptrs.push_back(&s);
  return build_fold_corpus(ptrs, cfg, spec);
}

FoldPlan make_folds(const std::string& subject_id, const std::vector<std::string>& signal_ids) {
  std::set<std::string> seen;
  for (const auto& id : signal_ids) {
    if (!seen.insert(id).second) throw Error(ErrorKind::DuplicateIds, "signal id '" + id + "' appears twice");
  }
  if (signal_ids.size() < 2) throw Error(ErrorKind::InvalidConfig, "need at least 2 signals to build folds");

  FoldPlan plan{subject_id, {}};
  for (std::size_t i = 0; i < signal_ids.size(); ++i) {
    Fold f;
    f.test_signal_id = signal_ids[i];
    for (std::size_t j = 0; j < signal_ids.size(); ++j) {
      if (j != i) f.train_signal_ids.push_back(signal_ids[j]);
    }
    plan.folds.push_back(std::move(f));
  }
  return plan;
}

}  // namespace onset
