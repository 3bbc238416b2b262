#include "onset/detector.hpp"

#include "onset/error.hpp"
#include "onset/text_io.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace onset {

namespace {

void check_layout(const ForestModel& model, const MultichannelSignal& window, const FeatureConfig& cfg) {
  const FeatureLayout expected = make_layout(window.channel_names(), cfg);
  if (expected.size() != model.feature_count()) {
    throw Error(ErrorKind::DimensionMismatch, "model expects " + std::to_string(model.feature_count()) +
                                                  " features, " + to_string(cfg.kind) + " on " +
                                                  std::to_string(window.channels()) + " channels gives " +
                                                  std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!(expected[i] == model.feature_layout[i])) {
      throw Error(ErrorKind::DimensionMismatch, "feature " + std::to_string(i) + " is '" + expected[i].name() +
                                                    "' but the model was trained on '" +
                                                    model.feature_layout[i].name() + "'");
    }
  }
}

}  // namespace

std::vector<std::size_t> DetectionResult::onsets() const {
  std::vector<std::size_t> out;
  out.reserve(predicted_events.size());
  for (const auto& e : predicted_events) out.push_back(e.onset_sample);
  return out;
}

std::vector<MultichannelSignal> window_signal(const MultichannelSignal& signal, std::size_t window_len) {
  if (window_len == 0) throw Error(ErrorKind::InvalidConfig, "window_len must be positive");
  if (signal.samples() < window_len) {
    throw Error(ErrorKind::SignalTooShort, "signal has " + std::to_string(signal.samples()) +
                                               " samples, shorter than one window of " + std::to_string(window_len));
  }
  const std::size_t n = signal.samples() / window_len;
  std::vector<MultichannelSignal> windows;
  windows.reserve(n);
  for (std::size_t w = 0; w < n; ++w) windows.push_back(signal.slice(w * window_len, (w + 1) * window_len));
  return windows;
}

ClassificationVector classify_windows(const std::vector<MultichannelSignal>& windows, const ForestModel& model,
                                      const FeatureConfig& cfg, std::size_t threads) {
  ClassificationVector out;
  out.labels.assign(windows.size(), 0);
  out.scores.assign(windows.size(), 0.0);
  if (windows.empty()) return out;
  out.window_len = windows.front().samples();
  check_layout(model, windows.front(), cfg);

  const auto classify_one = [&](std::size_t i) {
    const FeatureVector fv = extract_features(apply_car(windows[i]), cfg);
    const Prediction p = model.predict(fv);
    out.labels[i] = p.label;
    out.scores[i] = p.score;
  };

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, windows.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < windows.size(); ++i) classify_one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < windows.size(); i = next.fetch_add(1)) {
          try {
            classify_one(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
            return;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

DetectionResult merge_runs(const ClassificationVector& vec) {
  DetectionResult result;
  result.window_len = vec.window_len;
  result.scores = vec.scores;
  const std::size_t w = vec.window_len;
  const bool has_scores = vec.scores.size() == vec.labels.size();

  std::size_t i = 0;
  while (i < vec.labels.size()) {
    if (vec.labels[i] != 1) {
      ++i;
      continue;
    }
    const std::size_t first = i;
    double score_sum = 0.0;
    while (i < vec.labels.size() && vec.labels[i] == 1) {
      if (has_scores) score_sum += vec.scores[i];
      ++i;
    }
    const std::size_t run = i - first;
    result.predicted_events.push_back(
        {first * w, i * w, has_scores ? score_sum / static_cast<double>(run) : 0.0});
  }
  return result;
}

DetectionResult detect(const MultichannelSignal& signal, const ForestModel& model, const FeatureConfig& cfg,
                       std::size_t window_len, std::size_t threads) {
  return merge_runs(classify_windows(window_signal(signal, window_len), model, cfg, threads));
}

std::string format_detection(const DetectionResult& result) {
  std::string out = "onset_sample,end_sample,mean_score\n";
  for (const auto& e : result.predicted_events) {
    out += std::to_string(e.onset_sample);
    out += ',';
    out += std::to_string(e.end_sample);
    out += ',';
    text::append_double(out, e.mean_score);
    out += '\n';
  }
  return out;
}

void write_detection(const std::filesystem::path& path, const DetectionResult& result) {
  text::write_file(path, format_detection(result));
}

}  // namespace onset
