#pragma once

#include "onset/corpus.hpp"
#include "onset/evaluation.hpp"
#include "onset/features.hpp"
#include "onset/forest.hpp"
#include "onset/synth.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace onset {

// One flat run configuration. JSON layout (every key optional):
//
//   {
//     "feature_set": "stats8" | "hurst",
//     "features": {"q_values": [1,2,3,4,5], "entropy_bins": 64,
//                  "hurst_tau_min": 2, "hurst_tau_max": 19, "hurst_nu": 1},
//     "forest":   {"n_trees": 100, "max_depth": null, "min_samples_split": 2,
//                  "features_per_split": null, "bootstrap": true},
//     "segments": {"window_len": 128, "discard_first_last": true,
//                  "skip_out_of_bounds": true},
//     "tetr": [3.0, 4.0],
//     "seed": 0,
//     "threads": 1
//   }
//
// Unknown keys are rejected so typos do not silently fall back to defaults.
struct RunConfig {
  FeatureConfig features;
  ForestParams forest;
  SegmentSpec segments;
  std::vector<double> tetr_s{3.0, 4.0};
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // Checks every module-level invariant; throws InvalidConfig.
  void validate() const;
  CvConfig cv_config() const;
  // Forest params with the run seed applied.
  ForestParams forest_params() const;
};

nlohmann::json to_json(const FeatureConfig& cfg);
nlohmann::json to_json(const ForestParams& params);
nlohmann::json to_json(const SegmentSpec& spec);
nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const SynthSpec& spec);

// Parsers throw InvalidConfig with the dotted path of the offending field.
FeatureConfig feature_config_from_json(const nlohmann::json& j, FeatureConfig base = {});
ForestParams forest_params_from_json(const nlohmann::json& j, ForestParams base = {});
SegmentSpec segment_spec_from_json(const nlohmann::json& j, SegmentSpec base = {});
RunConfig run_config_from_json(const nlohmann::json& j);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::filesystem::path& path);
SynthSpec load_synth_spec(const std::filesystem::path& path);

// Parses "3,4" or "3.0, 4.5" into tolerance seconds.
std::vector<double> parse_tetr_list(const std::string& text);

}  // namespace onset
