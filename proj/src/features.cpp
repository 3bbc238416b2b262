#include "onset/features.hpp"

#include "onset/error.hpp"
#include "onset/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace onset {

namespace {

void require_non_empty(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorKind::EmptySeries, "series is empty");
}

struct CentralMoments {
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

// Two-pass population moments. Throws DegenerateVariance on a constant series.
CentralMoments central_moments(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) throw Error(ErrorKind::DegenerateVariance, "series has zero variance");
  const double mu = mean(x);
  CentralMoments m;
  for (double v : x) {
    const double d = v - mu;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  const double n = static_cast<double>(x.size());
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  if (!(m.m2 > 0.0)) throw Error(ErrorKind::DegenerateVariance, "series has zero variance");
  return m;
}

double abs_pow(double v, int q) {
  const double a = std::abs(v);
  // Integer powers by repeated multiplication keep results bit-stable.
  double r = a;
  for (int i = 1; i < q; ++i) r *= a;
  return r;
}

const char* const kStats8Names[] = {"mean", "max", "min", "kurtosis", "skewness", "sum", "entropy", "hurst_q1"};

template <typename F>
double or_zero_if_degenerate(F&& f, std::size_t& degenerate) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateVariance && e.kind() != ErrorKind::ZeroNormalizer) throw;
    ++degenerate;
    return 0.0;
  }
}

}  // namespace

std::string to_string(FeatureKind kind) {
  return kind == FeatureKind::Stats8 ? "stats8" : "hurst";
}

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "stats8") return FeatureKind::Stats8;
  if (name == "hurst") return FeatureKind::HurstMultiQ;
  throw Error(ErrorKind::InvalidConfig, "feature_set: expected 'stats8' or 'hurst', got '" + name + "'");
}

void FeatureConfig::validate(std::size_t window_length) const {
  if (hurst_tau_min < 2) throw Error(ErrorKind::InvalidConfig, "hurst_tau_min must be >= 2");
  if (hurst_tau_max <= hurst_tau_min) {
    throw Error(ErrorKind::InvalidConfig, "hurst_tau_max must exceed hurst_tau_min");
  }
  if (hurst_tau_max > window_length / 4) {
    throw Error(ErrorKind::InvalidConfig, "hurst_tau_max must be <= window_length/4 (" +
                                              std::to_string(window_length / 4) + ")");
  }
  if (hurst_nu < 1) throw Error(ErrorKind::InvalidConfig, "hurst_nu must be >= 1");
  if (entropy_bins < 2) throw Error(ErrorKind::InvalidConfig, "entropy_bins must be >= 2");
  if (kind == FeatureKind::HurstMultiQ) {
    if (q_values.empty()) throw Error(ErrorKind::InvalidConfig, "q_values must be non-empty");
    for (std::size_t i = 0; i < q_values.size(); ++i) {
      if (q_values[i] < 1) throw Error(ErrorKind::InvalidConfig, "q_values must be positive");
      if (i > 0 && q_values[i] <= q_values[i - 1]) {
        throw Error(ErrorKind::InvalidConfig, "q_values must be strictly increasing");
      }
    }
  }
}

std::size_t FeatureConfig::features_per_channel() const {
  return kind == FeatureKind::Stats8 ? std::size(kStats8Names) : q_values.size();
}

FeatureLayout make_layout(const std::vector<std::string>& channel_names, const FeatureConfig& cfg) {
  FeatureLayout layout;
  layout.reserve(channel_names.size() * cfg.features_per_channel());
  for (const auto& ch : channel_names) {
    if (cfg.kind == FeatureKind::Stats8) {
      for (const char* f : kStats8Names) layout.push_back({ch, f});
    } else {
      for (int q : cfg.q_values) layout.push_back({ch, "hurst_q" + std::to_string(q)});
    }
  }
  return layout;
}

double mean(std::span<const double> x) {
  return sum(x) / static_cast<double>(x.size());
}

double max(std::span<const double> x) {
  require_non_empty(x);
  return *std::max_element(x.begin(), x.end());
}

double min(std::span<const double> x) {
  require_non_empty(x);
  return *std::min_element(x.begin(), x.end());
}

double sum(std::span<const double> x) {
  require_non_empty(x);
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

double skewness(std::span<const double> x) {
  require_non_empty(x);
  if (x.size() < 3) throw Error(ErrorKind::SeriesTooShort, "skewness needs at least 3 samples");
  const auto m = central_moments(x);
  return m.m3 / std::pow(m.m2, 1.5);
}

double kurtosis(std::span<const double> x) {
  require_non_empty(x);
  if (x.size() < 4) throw Error(ErrorKind::SeriesTooShort, "kurtosis needs at least 4 samples");
  const auto m = central_moments(x);
  return m.m4 / (m.m2 * m.m2);
}

double shannon_entropy(std::span<const double> x, std::size_t bins) {
  require_non_empty(x);
  if (bins < 2) throw Error(ErrorKind::InvalidConfig, "entropy_bins must be >= 2");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) return 0.0;

  std::vector<std::size_t> counts(bins, 0);
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (double v : x) {
    auto b = static_cast<std::size_t>((v - lo) * scale);
    if (b >= bins) b = bins - 1;
    ++counts[b];
  }
  const double n = static_cast<double>(x.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  // Clamp rounding noise so the result stays within [0, log2(bins)].
  return std::clamp(h, 0.0, std::log2(static_cast<double>(bins)));
}

double generalized_hurst(std::span<const double> x, int q, const FeatureConfig& cfg) {
  if (q < 1) throw Error(ErrorKind::InvalidConfig, "q must be >= 1");
  const std::size_t tau_min = cfg.hurst_tau_min;
  const std::size_t tau_max = cfg.hurst_tau_max;
  const std::size_t nu = std::max<std::size_t>(cfg.hurst_nu, 1);
  if (tau_min < 1 || tau_max <= tau_min) {
    throw Error(ErrorKind::InvalidConfig, "hurst tau range must satisfy 1 <= tau_min < tau_max");
  }
  if (x.size() < 4 * tau_max) {
    throw Error(ErrorKind::SeriesTooShort, "generalized_hurst needs at least " + std::to_string(4 * tau_max) +
                                               " samples, got " + std::to_string(x.size()));
  }

  double norm = 0.0;
  std::size_t norm_count = 0;
  for (std::size_t t = 0; t < x.size(); t += nu) {
    norm += abs_pow(x[t], q);
    ++norm_count;
  }
  norm /= static_cast<double>(norm_count);
  if (!(norm > 0.0)) throw Error(ErrorKind::ZeroNormalizer, "series is all zeros");

  const std::size_t n_tau = tau_max - tau_min + 1;
  std::vector<double> log_tau(n_tau);
  std::vector<double> log_k(n_tau);
  for (std::size_t i = 0; i < n_tau; ++i) {
    const std::size_t tau = tau_min + i;
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t + tau < x.size(); t += nu) {
      acc += abs_pow(x[t + tau] - x[t], q);
      ++count;
    }
    const double k = (acc / static_cast<double>(count)) / norm;
    if (!(k > 0.0)) return 0.0;
    log_tau[i] = std::log(static_cast<double>(tau) / static_cast<double>(nu));
    log_k[i] = std::log(k);
  }

  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n_tau; ++i) {
    mx += log_tau[i];
    my += log_k[i];
  }
  mx /= static_cast<double>(n_tau);
  my /= static_cast<double>(n_tau);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n_tau; ++i) {
    const double dx = log_tau[i] - mx;
    sxy += dx * (log_k[i] - my);
    sxx += dx * dx;
  }
  return (sxy / sxx) / static_cast<double>(q);
}

FeatureVector extract_features(const MultichannelSignal& window, const FeatureConfig& cfg) {
  FeatureVector fv;
  fv.layout = make_layout(window.channel_names(), cfg);
  fv.values.reserve(fv.layout.size());
  std::size_t& degenerate = fv.degenerate_features;

  for (std::size_t ch = 0; ch < window.channels(); ++ch) {
    const auto x = window.channel(ch);
    if (cfg.kind == FeatureKind::Stats8) {
      const double s = sum(x);
      fv.values.push_back(s / static_cast<double>(x.size()));
      fv.values.push_back(max(x));
      fv.values.push_back(min(x));
      fv.values.push_back(or_zero_if_degenerate([&] { return kurtosis(x); }, degenerate));
      fv.values.push_back(or_zero_if_degenerate([&] { return skewness(x); }, degenerate));
      fv.values.push_back(s);
      fv.values.push_back(shannon_entropy(x, cfg.entropy_bins));
      fv.values.push_back(or_zero_if_degenerate([&] { return generalized_hurst(x, 1, cfg); }, degenerate));
    } else {
      for (int q : cfg.q_values) {
        fv.values.push_back(or_zero_if_degenerate([&] { return generalized_hurst(x, q, cfg); }, degenerate));
      }
    }
  }
  return fv;
}

void FeatureMatrix::add_row(std::span<const double> values, int label) {
  if (values.size() != width()) {
    throw Error(ErrorKind::InconsistentWidth, "row has " + std::to_string(values.size()) +
                                                  " values, layout has " + std::to_string(width()));
  }
  if (label != 0 && label != 1 && label != kUnlabeled) {
    throw Error(ErrorKind::InvalidConfig, "label must be 0 or 1");
  }
  if (!labels_.empty() && (label == kUnlabeled) != (labels_.front() == kUnlabeled)) {
    throw Error(ErrorKind::InconsistentWidth, "cannot mix labeled and unlabeled rows");
  }
  values_.insert(values_.end(), values.begin(), values.end());
  labels_.push_back(label);
}

bool FeatureMatrix::labeled() const {
  return !labels_.empty() && labels_.front() != kUnlabeled;
}

std::string format_feature_matrix(const FeatureMatrix& m) {
  std::string out;
  for (std::size_t j = 0; j < m.width(); ++j) {
    if (j > 0) out += ',';
    out += m.layout()[j].name();
  }
  const bool labeled = m.labeled();
  if (labeled) out += m.width() > 0 ? ",label" : "label";
  out += '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j > 0) out += ',';
      text::append_double(out, r[j]);
    }
    if (labeled) {
      out += ',';
      out += std::to_string(m.label(i));
    }
    out += '\n';
  }
  return out;
}

FeatureMatrix parse_feature_matrix(const std::string& contents) {
  const auto lines = text::split_lines(contents);
  if (lines.empty() || lines[0].empty()) throw Error(ErrorKind::MalformedFile, "feature matrix has no header");
  auto header = text::split(lines[0], ',');
  const bool labeled = header.back() == "label";
  if (labeled) header.pop_back();

  FeatureLayout layout;
  std::set<std::string> seen;
  for (auto cell : header) {
    const auto colon = cell.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == cell.size()) {
      throw Error(ErrorKind::MalformedFile, "column '" + std::string(cell) + "' is not <channel>:<feature>");
    }
    if (!seen.insert(std::string(cell)).second) {
      throw Error(ErrorKind::MalformedFile, "duplicate column '" + std::string(cell) + "'");
    }
    layout.push_back({std::string(cell.substr(0, colon)), std::string(cell.substr(colon + 1))});
  }

  FeatureMatrix m(std::move(layout));
  const std::size_t expected = m.width() + (labeled ? 1 : 0);
  std::vector<double> row(m.width());
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) {
      if (li + 1 == lines.size()) break;
      throw Error(ErrorKind::MalformedFile, "line " + std::to_string(li + 1) + ": empty row");
    }
    const auto cells = text::split(lines[li], ',');
    if (cells.size() != expected) {
      throw Error(ErrorKind::MalformedFile, "line " + std::to_string(li + 1) + ": expected " +
                                                std::to_string(expected) + " cells");
    }
    for (std::size_t j = 0; j < m.width(); ++j) {
      if (!text::parse_double(cells[j], row[j])) {
        throw Error(ErrorKind::MalformedFile, "line " + std::to_string(li + 1) + ": non-numeric cell");
      }
    }
    int label = FeatureMatrix::kUnlabeled;
    if (labeled) {
      if (cells.back() == "0") {
        label = 0;
      } else if (cells.back() == "1") {
        label = 1;
      } else {
        throw Error(ErrorKind::MalformedFile, "line " + std::to_string(li + 1) + ": label must be 0 or 1");
      }
    }
    m.add_row(row, label);
  }
  return m;
}

void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& m) {
  text::write_file(path, format_feature_matrix(m));
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
  return parse_feature_matrix(text::read_file(path));
}

}  // namespace onset
