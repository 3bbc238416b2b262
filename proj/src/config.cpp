#include "onset/config.hpp"

#include "onset/error.hpp"
#include "onset/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace onset {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::InvalidConfig, path + ": " + what);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) invalid(path.empty() ? "<root>" : path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) invalid(path.empty() ? key : path + "." + key, "unknown field");
  }
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

std::size_t get_count(const json& j, const std::string& path, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    invalid(join(path, key), "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::optional<std::size_t> get_optional_count(const json& j, const std::string& path, const char* key,
                                              std::optional<std::size_t> fallback) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_null()) return std::nullopt;
  return get_count(j, path, key, 0);
}

double get_real(const json& j, const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number() || !std::isfinite(v.get<double>())) invalid(join(path, key), "expected a finite number");
  return v.get<double>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) invalid(join(path, key), "expected true or false");
  return j.at(key).get<bool>();
}

std::uint64_t get_seed(const json& j, const std::string& path, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  invalid(join(path, key), "expected a non-negative 64-bit integer");
}

LengthRange get_range(const json& j, const std::string& path, const char* key, LengthRange fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  const std::string p = join(path, key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_unsigned() || !v[1].is_number_unsigned()) {
    invalid(p, "expected [min, max] of non-negative integers");
  }
  return {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
}

std::string wrap_validation(const Error& e) {
  // give the rethrown message the same "<field>: msg" shape as parse errors
  std::string msg = e.what();
  const std::string prefix = std::string(to_string(e.kind())) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  return msg;
}

}  // namespace

json to_json(const FeatureConfig& cfg) {
  return json{{"kind", to_string(cfg.kind)},
              {"q_values", cfg.q_values},
              {"entropy_bins", cfg.entropy_bins},
              {"hurst_tau_min", cfg.hurst_tau_min},
              {"hurst_tau_max", cfg.hurst_tau_max},
              {"hurst_nu", cfg.hurst_nu}};
}

json to_json(const ForestParams& p) {
  return json{{"n_trees", p.n_trees},
              {"max_depth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
              {"min_samples_split", p.min_samples_split},
              {"features_per_split", p.features_per_split ? json(*p.features_per_split) : json(nullptr)},
              {"bootstrap", p.bootstrap},
              {"rng_seed", p.rng_seed}};
}

json to_json(const SegmentSpec& s) {
  return json{{"window_len", s.window_len},
              {"discard_first_last", s.discard_first_last},
              {"skip_out_of_bounds", s.skip_out_of_bounds}};
}

json to_json(const RunConfig& cfg) {
  json features = to_json(cfg.features);
  features.erase("kind");
  json forest = to_json(cfg.forest);
  forest.erase("rng_seed");
  return json{{"feature_set", to_string(cfg.features.kind)},
              {"features", std::move(features)},
              {"forest", std::move(forest)},
              {"segments", to_json(cfg.segments)},
              {"tetr", cfg.tetr_s},
              {"seed", cfg.seed},
              {"threads", cfg.threads}};
}

json to_json(const SynthSpec& s) {
  json word;
  if (s.word_model.kind == WordModel::Kind::FBm) {
    word = {{"kind", "fbm"}, {"h", s.word_model.hurst}, {"scale", s.word_model.scale}};
  } else {
    word = {{"kind", "high_variance_noise"}, {"sigma", s.word_model.sigma}};
  }
  return json{{"channels", s.channels},
              {"rate", s.rate_hz},
              {"n_events", s.n_events},
              {"n_signals", s.n_signals},
              {"word_len_samples", {s.word_len.min, s.word_len.max}},
              {"idle_len_samples", {s.idle_len.min, s.idle_len.max}},
              {"word_model", std::move(word)},
              {"idle_model", {{"kind", "white_noise"}, {"sigma", s.idle_model.sigma}}},
              {"seed", s.seed},
              {"subject_id", s.subject_id}};
}

FeatureConfig feature_config_from_json(const json& j, FeatureConfig base) {
  const std::string path = "features";
  require_object(j, path);
  reject_unknown(j, path, {"kind", "q_values", "entropy_bins", "hurst_tau_min", "hurst_tau_max", "hurst_nu"});
  if (j.contains("kind")) {
    if (!j.at("kind").is_string()) invalid(path + ".kind", "expected a string");
    base.kind = feature_kind_from_string(j.at("kind").get<std::string>());
  }
  if (j.contains("q_values")) {
    const json& q = j.at("q_values");
    if (!q.is_array()) invalid(path + ".q_values", "expected an array of positive integers");
    base.q_values.clear();
    for (const auto& v : q) {
      if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 64) {
        invalid(path + ".q_values", "expected an array of positive integers");
      }
      base.q_values.push_back(v.get<int>());
    }
  }
  base.entropy_bins = get_count(j, path, "entropy_bins", base.entropy_bins);
  base.hurst_tau_min = get_count(j, path, "hurst_tau_min", base.hurst_tau_min);
  base.hurst_tau_max = get_count(j, path, "hurst_tau_max", base.hurst_tau_max);
  base.hurst_nu = get_count(j, path, "hurst_nu", base.hurst_nu);
  return base;
}

ForestParams forest_params_from_json(const json& j, ForestParams base) {
  const std::string path = "forest";
  require_object(j, path);
  reject_unknown(j, path,
                 {"n_trees", "max_depth", "min_samples_split", "features_per_split", "bootstrap", "rng_seed"});
  base.n_trees = get_count(j, path, "n_trees", base.n_trees);
  base.max_depth = get_optional_count(j, path, "max_depth", base.max_depth);
  base.min_samples_split = get_count(j, path, "min_samples_split", base.min_samples_split);
  base.features_per_split = get_optional_count(j, path, "features_per_split", base.features_per_split);
  base.bootstrap = get_bool(j, path, "bootstrap", base.bootstrap);
  base.rng_seed = get_seed(j, path, "rng_seed", base.rng_seed);
  return base;
}

SegmentSpec segment_spec_from_json(const json& j, SegmentSpec base) {
  const std::string path = "segments";
  require_object(j, path);
  reject_unknown(j, path, {"window_len", "discard_first_last", "skip_out_of_bounds"});
  base.window_len = get_count(j, path, "window_len", base.window_len);
  base.discard_first_last = get_bool(j, path, "discard_first_last", base.discard_first_last);
  base.skip_out_of_bounds = get_bool(j, path, "skip_out_of_bounds", base.skip_out_of_bounds);
  return base;
}

RunConfig run_config_from_json(const json& j) {
  require_object(j, "");
  reject_unknown(j, "", {"feature_set", "features", "forest", "segments", "tetr", "seed", "threads"});
  RunConfig cfg;
  if (j.contains("features")) cfg.features = feature_config_from_json(j.at("features"), cfg.features);
  if (j.contains("feature_set")) {
    if (!j.at("feature_set").is_string()) invalid("feature_set", "expected \"stats8\" or \"hurst\"");
    cfg.features.kind = feature_kind_from_string(j.at("feature_set").get<std::string>());
  }
  if (j.contains("forest")) cfg.forest = forest_params_from_json(j.at("forest"), cfg.forest);
  if (j.contains("segments")) cfg.segments = segment_spec_from_json(j.at("segments"), cfg.segments);
  if (j.contains("tetr")) {
    const json& t = j.at("tetr");
    if (!t.is_array() || t.empty()) invalid("tetr", "expected a non-empty array of seconds");
    cfg.tetr_s.clear();
    for (const auto& v : t) {
      if (!v.is_number()) invalid("tetr", "expected a non-empty array of seconds");
      cfg.tetr_s.push_back(v.get<double>());
    }
  }
  cfg.seed = get_seed(j, "", "seed", cfg.seed);
  cfg.threads = get_count(j, "", "threads", cfg.threads);
  return cfg;
}

void RunConfig::validate() const {
  try {
    segments.validate();
    features.validate(segments.window_len);
    // the feature count is unknown until channels are; only the lower bound is checked here
    forest.validate(std::max<std::size_t>(forest.features_per_split.value_or(1), 1));
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidConfig, wrap_validation(e));
  }
  if (tetr_s.empty()) invalid("tetr", "need at least one tolerance");
  for (double t : tetr_s) {
    if (!(t > 0.0) || !std::isfinite(t)) invalid("tetr", "tolerances must be positive seconds");
  }
}

ForestParams RunConfig::forest_params() const {
  ForestParams p = forest;
  p.rng_seed = seed;
  return p;
}

CvConfig RunConfig::cv_config() const {
  CvConfig cv;
  cv.features = features;
  cv.forest = forest_params();
  cv.segments = segments;
  cv.tetr_s = tetr_s;
  cv.threads = threads;
  return cv;
}

SynthSpec synth_spec_from_json(const json& j) {
  require_object(j, "");
  reject_unknown(j, "", {"channels", "rate", "n_events", "n_signals", "word_len_samples", "idle_len_samples",
                         "word_model", "idle_model", "seed", "subject_id"});
  SynthSpec s;
  s.channels = get_count(j, "", "channels", s.channels);
  s.rate_hz = get_real(j, "", "rate", s.rate_hz);
  s.n_events = get_count(j, "", "n_events", s.n_events);
  s.n_signals = get_count(j, "", "n_signals", s.n_signals);
  s.word_len = get_range(j, "", "word_len_samples", s.word_len);
  s.idle_len = get_range(j, "", "idle_len_samples", s.idle_len);
  s.seed = get_seed(j, "", "seed", s.seed);
  if (j.contains("subject_id")) {
    if (!j.at("subject_id").is_string()) invalid("subject_id", "expected a string");
    s.subject_id = j.at("subject_id").get<std::string>();
  }
  if (j.contains("word_model")) {
    const json& w = j.at("word_model");
    require_object(w, "word_model");
    reject_unknown(w, "word_model", {"kind", "h", "scale", "sigma"});
    const std::string kind = w.value("kind", std::string("fbm"));
    if (kind == "fbm") {
      s.word_model.kind = WordModel::Kind::FBm;
    } else if (kind == "high_variance_noise") {
      s.word_model.kind = WordModel::Kind::HighVarianceNoise;
    } else {
      invalid("word_model.kind", "expected \"fbm\" or \"high_variance_noise\"");
    }
    s.word_model.hurst = get_real(w, "word_model", "h", s.word_model.hurst);
    s.word_model.scale = get_real(w, "word_model", "scale", s.word_model.scale);
    s.word_model.sigma = get_real(w, "word_model", "sigma", s.word_model.sigma);
  }
  if (j.contains("idle_model")) {
    const json& w = j.at("idle_model");
    require_object(w, "idle_model");
    reject_unknown(w, "idle_model", {"kind", "sigma"});
    if (w.value("kind", std::string("white_noise")) != "white_noise") {
      invalid("idle_model.kind", "expected \"white_noise\"");
    }
    s.idle_model.sigma = get_real(w, "idle_model", "sigma", s.idle_model.sigma);
  }
  try {
    s.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidHurst) invalid("word_model.h", wrap_validation(e));
    throw;
  }
  return s;
}

namespace {

json parse_json_file(const std::filesystem::path& path) {
  const std::string contents = text::read_file(path);
  try {
    return json::parse(contents);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, path.string() + ": not valid JSON: " + e.what());
  }
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(parse_json_file(path));
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  return synth_spec_from_json(parse_json_file(path));
}

std::vector<double> parse_tetr_list(const std::string& spec) {
  std::vector<double> out;
  for (auto cell : text::split(spec, ',')) {
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    double v = 0.0;
    if (!text::parse_double(cell, v) || !(v > 0.0) || !std::isfinite(v)) {
      invalid("tetr", "'" + std::string(cell) + "' is not a positive number of seconds");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace onset
