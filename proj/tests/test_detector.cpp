#include "oracles.hpp"

#include "onset/detector.hpp"
#include "onset/error.hpp"
#include "onset/synth.hpp"
#include "onset/text_io.hpp"

#include <doctest.h>

using namespace onset;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an onset::Error");
  return ErrorKind::Io;
}

ForestModel constant_model(const FeatureLayout& layout, int label) {
  ForestModel m;
  m.feature_layout = layout;
  m.trees = {DecisionTree{{-1}, {0.0}, {-1}, {-1}, {label == 0 ? 1u : 0u}, {label == 0 ? 0u : 1u}}};
  return m;
}

std::vector<std::string> names_of(const MultichannelSignal& s) { return s.channel_names(); }

ClassificationVector labels_only(std::vector<int> labels) {
  ClassificationVector v;
  v.labels = std::move(labels);
  return v;
}

}  // namespace

TEST_CASE("window_signal") {
  Rng rng(1);
  CHECK(window_signal(oracle::random_signal(rng, 3, 1000), 128).size() == 7);
  CHECK(window_signal(oracle::random_signal(rng, 3, 128), 128).size() == 1);
  CHECK(kind_of([&] { window_signal(oracle::random_signal(rng, 3, 100), 128); }) == ErrorKind::SignalTooShort);

  const auto s = oracle::random_signal(rng, 2, 300);
  const auto w = window_signal(s, 128);
  REQUIRE(w.size() == 2);
  for (std::size_t k = 0; k < w.size(); ++k) {
    CHECK(w[k].samples() == 128);
    CHECK(w[k].channel_names() == s.channel_names());
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < 128; ++i) CHECK(w[k].at(c, i) == s.at(c, k * 128 + i));
  }
}

TEST_CASE("merge_runs examples") {
  const auto r = merge_runs(labels_only({0, 0, 1, 1, 0, 1}));
  REQUIRE(r.predicted_events.size() == 2);
  CHECK(r.predicted_events[0].onset_sample == 256);
  CHECK(r.predicted_events[0].end_sample == 512);
  CHECK(r.predicted_events[1].onset_sample == 640);
  CHECK(r.predicted_events[1].end_sample == 768);
  CHECK(r.onsets() == std::vector<std::size_t>{256, 640});

  CHECK(merge_runs(labels_only({0, 0, 0})).predicted_events.empty());
  CHECK(merge_runs(labels_only({})).predicted_events.empty());
  const auto all = merge_runs(labels_only({1, 1, 1, 1}));
  REQUIRE(all.predicted_events.size() == 1);
  CHECK(all.predicted_events[0] == PredictedEvent{0, 512, 0.0});

  ClassificationVector scored;
  scored.labels = {1, 1, 0, 1};
  scored.scores = {0.6, 0.8, 0.1, 0.5};
  scored.window_len = 64;
  const auto s = merge_runs(scored);
  REQUIRE(s.predicted_events.size() == 2);
  CHECK(s.predicted_events[0].end_sample == 128);
  CHECK(s.predicted_events[0].mean_score == doctest::Approx(0.7));
  CHECK(s.predicted_events[1].onset_sample == 192);
  CHECK(s.predicted_events[1].mean_score == doctest::Approx(0.5));
}

TEST_CASE("merge_runs agrees with brute force over all 8-window vectors") {
  for (unsigned bits = 0; bits < 256; ++bits) {
    std::vector<int> labels(8);
    for (std::size_t i = 0; i < 8; ++i) labels[i] = (bits >> i) & 1u;
    const auto events = merge_runs(labels_only(labels)).predicted_events;
    const auto runs = oracle::brute_force_runs(labels);
    REQUIRE(events.size() == runs.size());
    std::size_t covered = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      CHECK(events[k].onset_sample == runs[k].first * 128);
      CHECK(events[k].end_sample == (runs[k].second + 1) * 128);
      CHECK(events[k].onset_sample % 128 == 0);
      if (k > 0) CHECK(events[k - 1].end_sample < events[k].onset_sample);
      covered += (events[k].end_sample - events[k].onset_sample) / 128;
    }
    CHECK(covered == static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1)));
  }
}

TEST_CASE("constant models") {
  Rng rng(2);
  const auto s = oracle::random_signal(rng, 4, 1000);
  const auto cfg = FeatureConfig::stats8();
  const auto layout = make_layout(names_of(s), cfg);

  const auto windows = window_signal(s, 128);
  const auto zero = classify_windows(windows, constant_model(layout, 0), cfg);
  CHECK(zero.labels == std::vector<int>(7, 0));
  CHECK(zero.scores == std::vector<double>(7, 0.0));
  CHECK(detect(s, constant_model(layout, 0), cfg).predicted_events.empty());

  const auto one = detect(s, constant_model(layout, 1), cfg);
  REQUIRE(one.predicted_events.size() == 1);
  CHECK(one.predicted_events[0] == PredictedEvent{0, 896, 1.0});
  CHECK(one.scores.size() == 7);
}

TEST_CASE("model layout must match the windows") {
  Rng rng(3);
  const auto s = oracle::random_signal(rng, 4, 512);
  const auto stats = FeatureConfig::stats8();
  const auto hurst = FeatureConfig::hurst_multi_q();
  const auto model = constant_model(make_layout(names_of(s), stats), 1);
  CHECK(kind_of([&] { detect(s, model, hurst); }) == ErrorKind::DimensionMismatch);
  const auto other = oracle::random_signal(rng, 3, 512);
  CHECK(kind_of([&] { detect(other, model, stats); }) == ErrorKind::DimensionMismatch);

  auto renamed = model;
  renamed.feature_layout[0].channel = "zz";
  CHECK(kind_of([&] { detect(s, renamed, stats); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("parallel classification matches sequential") {
  Rng rng(4);
  const auto s = oracle::random_signal(rng, 3, 128 * 20);
  const auto cfg = FeatureConfig::stats8();
  const auto layout = make_layout(names_of(s), cfg);
  ForestModel model;
  model.feature_layout = layout;
  // split on the first channel's mean at 0
  model.trees = {DecisionTree{{0, -1, -1}, {0.0, 0.0, 0.0}, {1, -1, -1}, {2, -1, -1}, {3, 3, 0}, {3, 0, 3}}};
  const auto a = detect(s, model, cfg, 128, 1);
  const auto b = detect(s, model, cfg, 128, 4);
  CHECK(a.scores == b.scores);
  CHECK(a.predicted_events == b.predicted_events);
}

TEST_CASE("planted long-memory windows are found") {
  // Two channels of white noise; windows 3..5 of channel 0 are replaced by
  // fBm. A one-split model thresholds the q=1 scaling exponent of channel 0.
  const std::size_t w = 128;
  Rng rng(5);
  std::vector<double> ch0 = oracle::random_series(rng, 10 * w);
  std::vector<double> ch1 = oracle::random_series(rng, 10 * w);
  const auto fbm = generate_fbm(3 * w, 0.8, 77);
  for (std::size_t i = 0; i < fbm.size(); ++i) ch0[3 * w + i] = 4.0 * fbm[i];
  const auto s = MultichannelSignal::from_channels({"a", "b"}, {ch0, ch1});

  auto cfg = FeatureConfig::hurst_multi_q();
  cfg.q_values = {1};
  ForestModel model;
  model.feature_layout = make_layout(names_of(s), cfg);
  REQUIRE(model.feature_layout[0].name() == "a:hurst_q1");
  model.trees = {DecisionTree{{0, -1, -1}, {0.4, 0.0, 0.0}, {1, -1, -1}, {2, -1, -1}, {1, 1, 0}, {1, 0, 1}}};

  const auto r = detect(s, model, cfg);
  REQUIRE(r.predicted_events.size() == 1);
  CHECK(r.predicted_events[0].onset_sample == 3 * w);
  CHECK(r.predicted_events[0].end_sample == 6 * w);
}

TEST_CASE("detection CSV") {
  DetectionResult r;
  r.predicted_events = {{256, 512, 0.75}, {640, 768, 1.0}};
  const auto text = format_detection(r);
  const auto lines = text::split_lines(text);
  REQUIRE(lines.size() >= 3);
  CHECK(lines[0] == "onset_sample,end_sample,mean_score");
  CHECK(lines[1] == "256,512,0.75");
  CHECK(lines[2] == "640,768,1");

  oracle::TempDir dir("detect_csv");
  write_detection(dir / "d.csv", r);
  CHECK(text::read_file(dir / "d.csv") == text);
  CHECK(format_detection(DetectionResult{}) == "onset_sample,end_sample,mean_score\n");
}
