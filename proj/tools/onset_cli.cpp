// onset: train, detect and cross-validate imagined-word onset detectors.
//
//   onset synth [SPEC] --out DIR [--seed N]
//   onset train (--subject-dir DIR | --signal S --markers M ...) --out MODEL
//   onset detect --signal S --model MODEL --out DETECTIONS.csv
//   onset cv SUBJECT_DIR... --out DIR
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 I/O failure,
// 4 computation failure, 1 anything else.

#include "onset/config.hpp"
#include "onset/corpus.hpp"
#include "onset/dataset.hpp"
#include "onset/detector.hpp"
#include "onset/error.hpp"
#include "onset/evaluation.hpp"
#include "onset/forest.hpp"
#include "onset/synth.hpp"
#include "onset/text_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitComputation = 4;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string feature_set;
  std::string tetr;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_features) {
  cmd->add_option("--config", flags.config_path, "Run configuration (JSON)");
  cmd->add_option("--seed", flags.seed, "Random seed (overrides the config)");
  if (with_features) {
    cmd->add_option("--feature-set", flags.feature_set, "Feature set")->check(CLI::IsMember({"stats8", "hurst"}));
  }
}

// Config file first, then command-line overrides. Returns whether the feature
// set was chosen explicitly.
onset::RunConfig resolve_config(const CommonFlags& flags, bool* feature_set_explicit = nullptr) {
  onset::RunConfig cfg;
  bool explicit_kind = false;
  if (!flags.config_path.empty()) {
    const std::string contents = onset::text::read_file(flags.config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(contents);
    } catch (const nlohmann::json::exception& e) {
      throw onset::Error(onset::ErrorKind::InvalidConfig, flags.config_path + ": not valid JSON: " + e.what());
    }
    cfg = onset::run_config_from_json(j);
    explicit_kind = j.contains("feature_set") || (j.contains("features") && j["features"].contains("kind"));
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.feature_set.empty()) {
    cfg.features.kind = onset::feature_kind_from_string(flags.feature_set);
    explicit_kind = true;
  }
  if (!flags.tetr.empty()) cfg.tetr_s = onset::parse_tetr_list(flags.tetr);
  cfg.validate();
  if (feature_set_explicit != nullptr) *feature_set_explicit = explicit_kind;
  return cfg;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void ensure_parent_dir(const fs::path& file) {
  const fs::path parent = file.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw onset::Error(onset::ErrorKind::Io, "cannot create '" + parent.string() + "': " + ec.message());
}

int cmd_synth(const std::string& spec_path, const CommonFlags& flags) {
  onset::SynthSpec spec = spec_path.empty() ? onset::SynthSpec{} : onset::load_synth_spec(spec_path);
  if (flags.seed) spec.seed = *flags.seed;
  spec.validate();
  const onset::SubjectData subject = onset::generate_subject(spec);
  onset::write_subject_dir(flags.out, subject);
  std::cout << "wrote " << subject.signals.size() << " signal/marker pairs for subject '" << subject.subject_id
            << "' to " << flags.out << '\n';
  return 0;
}

int cmd_train(const CommonFlags& flags, const std::string& subject_dir, const std::vector<std::string>& exclude,
              const std::vector<std::string>& signals, const std::vector<std::string>& markers,
              const std::string& features_out) {
  const onset::RunConfig cfg = resolve_config(flags);

  std::vector<onset::MarkedSignal> train_signals;
  if (!subject_dir.empty()) {
    onset::SubjectData subject = onset::load_subject_dir(subject_dir);
    for (auto& s : subject.signals) {
      if (std::find(exclude.begin(), exclude.end(), s.id) == exclude.end()) train_signals.push_back(std::move(s));
    }
  }
  if (signals.size() != markers.size()) {
    throw onset::Error(onset::ErrorKind::InvalidConfig, "--signal and --markers must be given the same number of times");
  }
  for (std::size_t i = 0; i < signals.size(); ++i) {
    onset::MultichannelSignal sig = onset::read_signal(signals[i]);
    onset::MarkerTrack mk = onset::read_markers(markers[i], sig.samples());
    train_signals.push_back({fs::path(signals[i]).stem().string(), std::move(sig), std::move(mk)});
  }
  if (train_signals.empty()) throw onset::Error(onset::ErrorKind::InvalidConfig, "no training signals given");

  onset::Corpus corpus = onset::build_fold_corpus(train_signals, cfg.features, cfg.segments);
  print_warnings(corpus.warnings);
  if (corpus.matrix.rows() == 0) {
    throw onset::Error(onset::ErrorKind::EmptyMatrix, "no training instances could be extracted");
  }
  if (corpus.count_label(0) == 0 || corpus.count_label(1) == 0) {
    print_warnings({"training corpus contains a single class"});
  }
  if (!features_out.empty()) {
    ensure_parent_dir(features_out);
    onset::write_feature_matrix(features_out, corpus.matrix);
  }
  const onset::ForestModel model = onset::train(corpus.matrix, cfg.forest_params(), cfg.threads);
  ensure_parent_dir(flags.out);
  onset::save_model(flags.out, model);
  std::cout << "trained " << model.trees.size() << " trees on " << corpus.matrix.rows() << " instances ("
            << corpus.count_label(1) << " word, " << corpus.count_label(0) << " idle), "
            << model.feature_count() << " features";
  if (model.oob_error) std::cout << ", oob error " << *model.oob_error;
  std::cout << "\nmodel written to " << flags.out << '\n';
  return 0;
}

onset::FeatureKind kind_from_layout(const onset::ForestModel& model) {
  for (const auto& d : model.feature_layout) {
    if (d.feature.rfind("hurst_q", 0) != 0) return onset::FeatureKind::Stats8;
  }
  return onset::FeatureKind::HurstMultiQ;
}

int cmd_detect(const CommonFlags& flags, const std::string& signal_path, const std::string& model_path) {
  bool kind_explicit = false;
  onset::RunConfig cfg = resolve_config(flags, &kind_explicit);
  const onset::ForestModel model = onset::load_model(model_path);
  if (!kind_explicit) cfg.features.kind = kind_from_layout(model);
  const onset::MultichannelSignal signal = onset::read_signal(signal_path);
  const onset::DetectionResult result = onset::detect(signal, model, cfg.features, cfg.segments.window_len, cfg.threads);
  ensure_parent_dir(flags.out);
  onset::write_detection(flags.out, result);
  std::cout << result.predicted_events.size() << " predicted events over " << result.scores.size()
            << " windows written to " << flags.out << '\n';
  return 0;
}

int cmd_cv(const CommonFlags& flags, const std::vector<std::string>& subject_dirs) {
  const onset::RunConfig cfg = resolve_config(flags);
  const fs::path out_dir = flags.out;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw onset::Error(onset::ErrorKind::Io, "cannot create '" + out_dir.string() + "': " + ec.message());

  std::vector<onset::EvalReport> reports;
  for (const auto& dir : subject_dirs) {
    const onset::SubjectData subject = onset::load_subject_dir(dir);
    onset::EvalReport report = onset::run_cross_validation(subject, cfg.cv_config());
    for (const auto& f : report.per_fold) print_warnings(f.warnings);
    onset::text::write_file(out_dir / (report.subject_id + "_report.json"), onset::format_report_json(report));

    std::cout << "subject " << report.subject_id << " (" << onset::to_string(cfg.features.kind) << ", config "
              << report.config_fingerprint << ")\n";
    for (const auto& f : report.per_fold) {
      std::cout << "  fold " << f.fold_id << " test=" << f.test_signal_id << " true=" << f.n_true_onsets
                << " predicted=" << f.n_predicted;
      for (const auto& s : f.scores) std::cout << " tpr@" << s.tetr_s << "s=" << s.tpr;
      std::cout << '\n';
    }
    std::cout << "  average";
    for (const auto& a : report.averages) std::cout << " tpr@" << a.tetr_s << "s=" << a.tpr;
    std::cout << '\n';
    reports.push_back(std::move(report));
  }
  onset::text::write_file(out_dir / "cv_report.csv", onset::format_report_csv(reports));
  std::cout << "reports written to " << out_dir.string() << '\n';
  return 0;
}

int exit_code_for(const onset::Error& e) {
  switch (e.category()) {
    case onset::ErrorCategory::Validation: return kExitValidation;
    case onset::ErrorCategory::Io: return kExitIo;
    case onset::ErrorCategory::Computation: return kExitComputation;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Imagined-word onset detection: training, detection and cross-validation"};
  app.require_subcommand(1);

  CommonFlags synth_flags;
  std::string synth_spec;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic subject (signal and marker CSVs)");
  synth->add_option("spec", synth_spec, "Synthetic subject spec (JSON); defaults when omitted");
  synth->add_option("--seed", synth_flags.seed, "Random seed (overrides the spec)");
  synth->add_option("--out", synth_flags.out, "Output directory")->required();

  CommonFlags train_flags;
  std::string subject_dir;
  std::vector<std::string> exclude;
  std::vector<std::string> train_signals;
  std::vector<std::string> train_markers;
  std::string features_out;
  auto* train = app.add_subcommand("train", "Build the training corpus and fit a forest");
  add_common(train, train_flags, true);
  train->add_option("--subject-dir", subject_dir, "Subject directory with <id>_signal.csv / <id>_markers.csv");
  train->add_option("--exclude", exclude, "Signal ids of the subject directory to leave out");
  train->add_option("--signal", train_signals, "Signal CSV (repeatable, paired with --markers)");
  train->add_option("--markers", train_markers, "Markers CSV (repeatable)");
  train->add_option("--features-out", features_out, "Also write the labeled feature matrix CSV");
  train->add_option("--out", train_flags.out, "Model file to write")->required();

  CommonFlags detect_flags;
  std::string detect_signal;
  std::string detect_model;
  auto* detect = app.add_subcommand("detect", "Classify 1-second windows and write predicted events");
  add_common(detect, detect_flags, true);
  detect->add_option("--signal", detect_signal, "Signal CSV")->required();
  detect->add_option("--model", detect_model, "Model file")->required();
  detect->add_option("--out", detect_flags.out, "Detection CSV to write")->required();

  CommonFlags cv_flags;
  std::vector<std::string> cv_subjects;
  auto* cv = app.add_subcommand("cv", "Leave-one-signal-out cross-validation per subject");
  add_common(cv, cv_flags, true);
  cv->add_option("--tetr", cv_flags.tetr, "Tolerance regions in seconds, comma separated (default 3,4)");
  cv->add_option("subjects", cv_subjects, "Subject directories")->required();
  cv->add_option("--out", cv_flags.out, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*synth) return cmd_synth(synth_spec, synth_flags);
    if (*train) return cmd_train(train_flags, subject_dir, exclude, train_signals, train_markers, features_out);
    if (*detect) return cmd_detect(detect_flags, detect_signal, detect_model);
    if (*cv) return cmd_cv(cv_flags, cv_subjects);
  } catch (const onset::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
