#include "oracles.hpp"

#include "onset/config.hpp"
#include "onset/error.hpp"
#include "onset/text_io.hpp"

#include <doctest.h>

using namespace onset;
using nlohmann::json;

namespace {

// Kind and message of the error thrown by f.
std::pair<ErrorKind, std::string> error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return {e.kind(), e.what()};
  }
  FAIL("expected an onset::Error");
  return {ErrorKind::Io, ""};
}

}  // namespace

TEST_CASE("empty config gives defaults") {
  const auto cfg = run_config_from_json(json::object());
  CHECK(cfg.features == FeatureConfig::stats8());
  CHECK(cfg.forest == ForestParams{});
  CHECK(cfg.segments.window_len == 128);
  CHECK(cfg.segments.discard_first_last);
  CHECK(cfg.tetr_s == std::vector<double>{3.0, 4.0});
  CHECK(cfg.seed == 0);
  CHECK(cfg.threads == 1);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("full config") {
  const auto cfg = run_config_from_json(json::parse(R"({
    "feature_set": "hurst",
    "features": {"q_values": [1, 2, 3], "entropy_bins": 32, "hurst_tau_max": 15},
    "forest": {"n_trees": 40, "max_depth": 8, "min_samples_split": 4, "features_per_split": 5, "bootstrap": false},
    "segments": {"window_len": 128, "discard_first_last": false, "skip_out_of_bounds": false},
    "tetr": [2.5, 3, 4],
    "seed": 18446744073709551615,
    "threads": 3
  })"));
  CHECK(cfg.features.kind == FeatureKind::HurstMultiQ);
  CHECK(cfg.features.q_values == std::vector<int>{1, 2, 3});
  CHECK(cfg.features.entropy_bins == 32);
  CHECK(cfg.features.hurst_tau_min == 2);
  CHECK(cfg.features.hurst_tau_max == 15);
  CHECK(cfg.forest.n_trees == 40);
  CHECK(cfg.forest.max_depth == 8);
  CHECK(cfg.forest.min_samples_split == 4);
  CHECK(cfg.forest.features_per_split == 5);
  CHECK_FALSE(cfg.forest.bootstrap);
  CHECK_FALSE(cfg.segments.discard_first_last);
  CHECK_FALSE(cfg.segments.skip_out_of_bounds);
  CHECK(cfg.tetr_s == std::vector<double>{2.5, 3.0, 4.0});
  CHECK(cfg.seed == 18446744073709551615ull);
  CHECK(cfg.threads == 3);
  CHECK_NOTHROW(cfg.validate());

  const auto cv = cfg.cv_config();
  CHECK(cv.forest.rng_seed == cfg.seed);
  CHECK(cv.tetr_s == cfg.tetr_s);
  CHECK(cv.threads == 3);
  CHECK(cfg.forest_params().rng_seed == cfg.seed);

  // serialization round trip
  const auto back = run_config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.features == cfg.features);
  CHECK(back.forest == cfg.forest);
}

TEST_CASE("unknown and mistyped fields name their path") {
  const auto check = [](const char* text, const char* field) {
    const auto [kind, msg] = error_of([&] { run_config_from_json(json::parse(text)); });
    CHECK(kind == ErrorKind::InvalidConfig);
    CHECK_MESSAGE(msg.find(field) != std::string::npos, msg);
  };
  check(R"({"n_tree": 5})", "n_tree");
  check(R"({"forest": {"n_tree": 5}})", "forest.n_tree");
  check(R"({"features": {"bins": 5}})", "features.bins");
  check(R"({"segments": {"len": 5}})", "segments.len");
  check(R"({"forest": {"n_trees": -1}})", "forest.n_trees");
  check(R"({"forest": {"bootstrap": 1}})", "forest.bootstrap");
  check(R"({"feature_set": "wavelet"})", "wavelet");
  check(R"({"tetr": []})", "tetr");
  check(R"({"tetr": ["3"]})", "tetr");
  check(R"({"seed": -4})", "seed");
  check(R"([1, 2])", "<root>");
}

TEST_CASE("validation of parsed values") {
  const auto kind_of = [](const char* text) {
    return error_of([&] { run_config_from_json(json::parse(text)).validate(); }).first;
  };
  CHECK(kind_of(R"({"tetr": [0]})") == ErrorKind::InvalidConfig);
  CHECK(kind_of(R"({"forest": {"n_trees": 0}})") == ErrorKind::InvalidConfig);
  CHECK(kind_of(R"({"features": {"entropy_bins": 0}})") == ErrorKind::InvalidConfig);
  CHECK(kind_of(R"({"segments": {"window_len": 0}})") == ErrorKind::InvalidConfig);
  // windows too short for the scaling range
  CHECK(kind_of(R"({"segments": {"window_len": 64}})") == ErrorKind::InvalidConfig);
}

TEST_CASE("synth spec parsing") {
  const auto d = synth_spec_from_json(json::object());
  CHECK(d == SynthSpec{});
  const auto s = synth_spec_from_json(json::parse(R"({
    "channels": 4, "rate": 256, "n_events": 6, "n_signals": 3,
    "word_len_samples": [210, 250], "idle_len_samples": [400, 500],
    "word_model": {"kind": "fbm", "h": 0.7, "scale": 2},
    "idle_model": {"kind": "white_noise", "sigma": 0.5},
    "seed": 9, "subject_id": "s07"
  })"));
  CHECK(s.channels == 4);
  CHECK(s.rate_hz == 256.0);
  CHECK(s.n_events == 6);
  CHECK(s.n_signals == 3);
  CHECK(s.word_len == LengthRange{210, 250});
  CHECK(s.idle_len == LengthRange{400, 500});
  CHECK(s.word_model.hurst == 0.7);
  CHECK(s.word_model.scale == 2.0);
  CHECK(s.idle_model.sigma == 0.5);
  CHECK(s.seed == 9);
  CHECK(s.subject_id == "s07");
  CHECK(synth_spec_from_json(to_json(s)) == s);

  const auto noise = synth_spec_from_json(json::parse(R"({"word_model": {"kind": "high_variance_noise", "sigma": 4}})"));
  CHECK(noise.word_model.kind == WordModel::Kind::HighVarianceNoise);
  CHECK(noise.word_model.sigma == 4.0);
  CHECK(synth_spec_from_json(to_json(noise)) == noise);

  const auto check = [](const char* text, const char* field) {
    const auto [kind, msg] = error_of([&] { synth_spec_from_json(json::parse(text)); });
    CHECK(kind == ErrorKind::InvalidConfig);
    CHECK_MESSAGE(msg.find(field) != std::string::npos, msg);
  };
  check(R"({"word_model": {"h": 1.2}})", "word_model.h");
  check(R"({"word_model": {"kind": "pink"}})", "word_model.kind");
  check(R"({"idle_model": {"kind": "pink"}})", "idle_model.kind");
  check(R"({"channels": 1})", "channels");
  check(R"({"word_len_samples": [5]})", "word_len_samples");
  check(R"({"chanels": 4})", "chanels");
}

TEST_CASE("config files") {
  oracle::TempDir dir("config");
  text::write_file(dir / "run.json", R"({"feature_set": "hurst", "seed": 5})");
  const auto cfg = load_run_config(dir / "run.json");
  CHECK(cfg.features.kind == FeatureKind::HurstMultiQ);
  CHECK(cfg.seed == 5);
  text::write_file(dir / "bad.json", "{\"seed\": ");
  CHECK(error_of([&] { load_run_config(dir / "bad.json"); }).first == ErrorKind::InvalidConfig);
  CHECK(error_of([&] { load_run_config(dir / "none.json"); }).first == ErrorKind::Io);
  text::write_file(dir / "synth.json", R"({"channels": 3})");
  CHECK(load_synth_spec(dir / "synth.json").channels == 3);
}

TEST_CASE("tetr list") {
  CHECK(parse_tetr_list("3,4") == std::vector<double>{3.0, 4.0});
  CHECK(parse_tetr_list("3.0, 4.5") == std::vector<double>{3.0, 4.5});
  CHECK(parse_tetr_list("2") == std::vector<double>{2.0});
  for (const char* bad : {"", "3,", "a", "0", "-1", "3,,4"}) {
    CHECK_MESSAGE(error_of([&] { parse_tetr_list(bad); }).first == ErrorKind::InvalidConfig, bad);
  }
}
