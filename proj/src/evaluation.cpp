#include "onset/evaluation.hpp"

#include "onset/config.hpp"
#include "onset/detector.hpp"
#include "onset/error.hpp"
#include "onset/random.hpp"
#include "onset/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace onset {

namespace {

using nlohmann::json;

bool is_sorted_ascending(const std::vector<std::size_t>& v) { return std::is_sorted(v.begin(), v.end()); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void check_subject(const SubjectData& subject) {
  if (subject.signals.size() < 2) {
    throw Error(ErrorKind::InvalidConfig, "subject '" + subject.subject_id + "' needs at least 2 signals");
  }
  const std::size_t ch = subject.signals.front().signal.channels();
  for (const auto& s : subject.signals) {
    if (s.signal.channels() != ch) {
      throw Error(ErrorKind::DimensionMismatch, "subject '" + subject.subject_id + "': signal '" + s.id + "' has " +
                                                    std::to_string(s.signal.channels()) + " channels, expected " +
                                                    std::to_string(ch));
    }
  }
}

const MarkedSignal& find_signal(const SubjectData& subject, const std::string& id) {
  for (const auto& s : subject.signals) {
    if (s.id == id) return s;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown signal id '" + id + "'");
}

void score_fold(FoldResult& fold, const MarkedSignal& test, const DetectionResult& detection, const CvConfig& cfg) {
  const auto true_onsets = test.markers.onsets();
  const auto predicted = detection.onsets();
  fold.n_true_onsets = true_onsets.size();
  fold.n_predicted = predicted.size();
  for (double t : cfg.tetr_s) {
    const auto matches = match_onsets(true_onsets, predicted, TetrSpec{t, true}, test.signal.sampling_rate_hz());
    fold.scores.push_back({t, matches.size(), true_positive_rate(matches, true_onsets.size())});
  }
}

EvalReport run_cv_impl(const SubjectData& subject, const CvConfig& cfg, const ForestModel* fixed_model) {
  check_subject(subject);
  cfg.segments.validate();
  cfg.features.validate(cfg.segments.window_len);
  if (cfg.tetr_s.empty()) throw Error(ErrorKind::InvalidConfig, "tetr: need at least one tolerance");

  std::vector<std::string> ids;
  for (const auto& s : subject.signals) ids.push_back(s.id);
  const FoldPlan plan = make_folds(subject.subject_id, ids);

  EvalReport report;
  report.subject_id = subject.subject_id;
  report.config = cfg;
  report.config_fingerprint = config_fingerprint(cfg.features, cfg.forest);

  for (std::size_t fi = 0; fi < plan.folds.size(); ++fi) {
    const Fold& fold = plan.folds[fi];
    FoldResult result;
    result.fold_id = fi + 1;
    result.test_signal_id = fold.test_signal_id;
    try {
      const MarkedSignal& test = find_signal(subject, fold.test_signal_id);
      DetectionResult detection;
      if (fixed_model != nullptr) {
        detection = detect(test.signal, *fixed_model, cfg.features, cfg.segments.window_len, cfg.threads);
      } else {
        std::vector<const MarkedSignal*> train_signals;
        for (const auto& id : fold.train_signal_ids) train_signals.push_back(&find_signal(subject, id));
        Corpus corpus = build_fold_corpus(train_signals, cfg.features, cfg.segments);
        result.warnings = std::move(corpus.warnings);
        result.n_train_instances = corpus.matrix.rows();
        if (corpus.count_label(0) == 0 || corpus.count_label(1) == 0) {
          result.warnings.push_back("training corpus contains a single class");
        }
        ForestParams params = cfg.forest;
        params.rng_seed = fold_seed(cfg.forest.rng_seed, fi);
        const ForestModel model = train(corpus.matrix, params, cfg.threads);
        result.oob_error = model.oob_error;
        detection = detect(test.signal, model, cfg.features, cfg.segments.window_len, cfg.threads);
      }
      score_fold(result, test, detection, cfg);
    } catch (const Error& e) {
      rethrow_with_context(e, "subject '" + subject.subject_id + "' fold " + std::to_string(fi + 1));
    }
    report.per_fold.push_back(std::move(result));
  }

  for (std::size_t k = 0; k < cfg.tetr_s.size(); ++k) {
    TetrScore avg{cfg.tetr_s[k], 0, 0.0};
    for (const auto& f : report.per_fold) {
      avg.tpr += f.scores[k].tpr;
      avg.matches += f.scores[k].matches;
    }
    avg.tpr /= static_cast<double>(report.per_fold.size());
    report.averages.push_back(avg);
  }
  return report;
}

}  // namespace

double TetrSpec::window_samples(double rate_hz) const {
  return std::round(tolerance_s * rate_hz);
}

bool TetrSpec::contains(std::size_t true_onset, std::size_t predicted_onset, double rate_hz) const {
  const double w = window_samples(rate_hz);
  const double t = static_cast<double>(true_onset);
  const double p = static_cast<double>(predicted_onset);
  if (centered) return std::abs(p - t) <= w / 2.0;
  return p >= t && p <= t + w;
}

std::vector<OnsetMatch> match_onsets(const std::vector<std::size_t>& true_onsets,
                                     const std::vector<std::size_t>& predicted_onsets, const TetrSpec& tetr,
                                     double rate_hz) {
  if (!is_sorted_ascending(true_onsets) || !is_sorted_ascending(predicted_onsets)) {
    throw Error(ErrorKind::InvalidConfig, "onset lists must be sorted ascending");
  }
  std::vector<OnsetMatch> matches;
  std::vector<char> used(predicted_onsets.size(), 0);
  for (std::size_t ti = 0; ti < true_onsets.size(); ++ti) {
    const std::size_t t = true_onsets[ti];
    std::size_t best = predicted_onsets.size();
    std::size_t best_dist = 0;
    for (std::size_t pi = 0; pi < predicted_onsets.size(); ++pi) {
      if (used[pi] || !tetr.contains(t, predicted_onsets[pi], rate_hz)) continue;
      const std::size_t p = predicted_onsets[pi];
      const std::size_t dist = p > t ? p - t : t - p;
      if (best == predicted_onsets.size() || dist < best_dist) {
        best = pi;
        best_dist = dist;
      }
    }
    if (best != predicted_onsets.size()) {
      used[best] = 1;
      matches.push_back({ti, best, t, predicted_onsets[best]});
    }
  }
  return matches;
}

double true_positive_rate(const std::vector<OnsetMatch>& matches, std::size_t n_true) {
  if (n_true == 0) throw Error(ErrorKind::NoTrueOnsets, "cannot compute a TPR without true onsets");
  return static_cast<double>(matches.size()) / static_cast<double>(n_true);
}

std::string config_fingerprint(const FeatureConfig& features, const ForestParams& forest) {
  const json canonical{{"features", to_json(features)}, {"forest", to_json(forest)}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical.dump())));
  return buf;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold_index) { return derive_seed(seed, fold_index); }

EvalReport run_cross_validation(const SubjectData& subject, const CvConfig& cfg) {
  return run_cv_impl(subject, cfg, nullptr);
}

EvalReport run_cross_validation_with_model(const SubjectData& subject, const CvConfig& cfg,
                                           const ForestModel& model) {
  return run_cv_impl(subject, cfg, &model);
}

std::string format_report_json(const EvalReport& report) {
  json folds = json::array();
  for (const auto& f : report.per_fold) {
    json scores = json::array();
    for (const auto& s : f.scores) scores.push_back({{"tetr_s", s.tetr_s}, {"matches", s.matches}, {"tpr", s.tpr}});
    folds.push_back({{"fold", f.fold_id},
                     {"test_signal", f.test_signal_id},
                     {"n_train_instances", f.n_train_instances},
                     {"n_true_onsets", f.n_true_onsets},
                     {"n_predicted", f.n_predicted},
                     {"oob_error", f.oob_error ? json(*f.oob_error) : json(nullptr)},
                     {"scores", std::move(scores)},
                     {"warnings", f.warnings}});
  }
  json averages = json::array();
  for (const auto& a : report.averages) averages.push_back({{"tetr_s", a.tetr_s}, {"tpr", a.tpr}, {"matches", a.matches}});
  const json config{{"features", to_json(report.config.features)},
                    {"forest", to_json(report.config.forest)},
                    {"segments", to_json(report.config.segments)},
                    {"tetr", report.config.tetr_s},
                    {"fold_seed", "derive_seed(forest.rng_seed, fold_index)"}};
  const json doc{{"subject", report.subject_id},
                 {"config_fingerprint", report.config_fingerprint},
                 {"config", config},
                 {"folds", std::move(folds)},
                 {"averages", std::move(averages)}};
  return doc.dump(2) + "\n";
}

std::string format_report_csv(const std::vector<EvalReport>& reports) {
  std::string out = "subject,fold,tetr_s,tpr\n";
  for (const auto& r : reports) {
    for (const auto& f : r.per_fold) {
      for (const auto& s : f.scores) {
        out += r.subject_id;
        out += ',';
        out += std::to_string(f.fold_id);
        out += ',';
        text::append_double(out, s.tetr_s);
        out += ',';
        text::append_double(out, s.tpr);
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace onset
