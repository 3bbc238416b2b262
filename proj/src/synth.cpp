#include "onset/synth.hpp"

#include "onset/error.hpp"
#include "onset/random.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>

namespace onset {

namespace {

// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

// In-place forward DFT, X[k] = sum_j x[j] exp(-2 pi i j k / n).
void forward_dft(std::vector<std::complex<double>>& data) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  FftwPlan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
}

double fgn_autocovariance(std::size_t k, double hurst) {
  const double two_h = 2.0 * hurst;
  const double kd = static_cast<double>(k);
  return 0.5 * (std::pow(kd + 1.0, two_h) - 2.0 * std::pow(kd, two_h) + std::pow(std::abs(kd - 1.0), two_h));
}

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw Error(ErrorKind::InvalidHurst, "Hurst parameter must lie in (0, 1), got " + std::to_string(hurst));
  }
}

void check_range(const LengthRange& r, const char* field) {
  if (r.min < 1 || r.max < r.min) {
    throw Error(ErrorKind::InvalidConfig, std::string(field) + ": need 1 <= min <= max");
  }
}

std::size_t draw_length(Rng& rng, const LengthRange& r) {
  return r.min + rng.uniform_index(r.max - r.min + 1);
}

}  // namespace

void SynthSpec::validate() const {
  if (channels < 2) throw Error(ErrorKind::InvalidConfig, "channels: need at least 2");
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw Error(ErrorKind::InvalidConfig, "rate_hz: must be positive");
  if (n_events < 1) throw Error(ErrorKind::InvalidConfig, "n_events: need at least 1");
  if (n_signals < 1) throw Error(ErrorKind::InvalidConfig, "n_signals: need at least 1");
  check_range(word_len, "word_len_samples");
  check_range(idle_len, "idle_len_samples");
  if (word_model.kind == WordModel::Kind::FBm) {
    check_hurst(word_model.hurst);
    if (word_len.min < 16) throw Error(ErrorKind::InvalidConfig, "word_len_samples: fBm words need >= 16 samples");
    if (!(word_model.scale > 0.0)) throw Error(ErrorKind::InvalidConfig, "word_model.scale: must be positive");
  } else if (!(word_model.sigma > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "word_model.sigma: must be positive");
  }
  if (!(idle_model.sigma > 0.0)) throw Error(ErrorKind::InvalidConfig, "idle_model.sigma: must be positive");
  if (subject_id.empty()) throw Error(ErrorKind::InvalidConfig, "subject_id: must be non-empty");
}

std::vector<double> generate_fgn(std::size_t length, double hurst, std::uint64_t seed) {
  check_hurst(hurst);
  if (length == 0) return {};
  // Circulant of size m = 2n embedding the first n+1 autocovariances.
  const std::size_t n = length;
  const std::size_t m = 2 * n;
  std::vector<std::complex<double>> eig(m);
  for (std::size_t k = 0; k <= n; ++k) eig[k] = fgn_autocovariance(k, hurst);
  for (std::size_t k = n + 1; k < m; ++k) eig[k] = eig[m - k];
  forward_dft(eig);

  std::vector<double> lambda(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double v = eig[k].real();
    // fGn embeddings are non-negative definite; tolerate rounding only.
    if (v < -1e-8 * static_cast<double>(m)) {
      throw Error(ErrorKind::InvalidHurst, "circulant embedding is not non-negative definite");
    }
    lambda[k] = v > 0.0 ? v : 0.0;
  }

  Rng rng(seed);
  const double md = static_cast<double>(m);
  std::vector<std::complex<double>> w(m);
  w[0] = std::sqrt(lambda[0] / md) * rng.normal();
  w[n] = std::sqrt(lambda[n] / md) * rng.normal();
  for (std::size_t k = 1; k < n; ++k) {
    const double s = std::sqrt(lambda[k] / (2.0 * md));
    const double a = rng.normal();
    const double b = rng.normal();
    w[k] = {s * a, s * b};
    w[m - k] = std::conj(w[k]);
  }
  forward_dft(w);

  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = w[k].real();
  return out;
}

std::vector<double> generate_fbm(std::size_t length, double hurst, std::uint64_t seed) {
  check_hurst(hurst);
  if (length < 16) throw Error(ErrorKind::SeriesTooShort, "fBm length must be >= 16");
  std::vector<double> path = generate_fgn(length, hurst, seed);
  double acc = 0.0;
  for (double& v : path) {
    acc += v;
    v = acc;
  }
  return path;
}

std::vector<std::string> default_channel_names(std::size_t channels) {
  static const char* const kEpoc14[] = {"AF3", "F7", "F3", "FC5", "T7", "P7", "O1",
                                        "O2",  "P8", "T8", "FC6", "F4", "F8", "AF4"};
  std::vector<std::string> names;
  for (std::size_t i = 0; i < channels; ++i) {
    names.push_back(channels == std::size(kEpoc14) ? kEpoc14[i] : "C" + std::to_string(i + 1));
  }
  return names;
}

MarkedSignal generate_signal(const SynthSpec& spec, std::size_t signal_index) {
  spec.validate();
  const std::uint64_t signal_seed = derive_seed(spec.seed, signal_index);
  Rng layout_rng(derive_seed(signal_seed, 0));

  // Segment lengths first so the total is known: idle, (word, idle) x n.
  std::vector<std::size_t> lengths;
  lengths.push_back(draw_length(layout_rng, spec.idle_len));
  for (std::size_t e = 0; e < spec.n_events; ++e) {
    lengths.push_back(draw_length(layout_rng, spec.word_len));
    lengths.push_back(draw_length(layout_rng, spec.idle_len));
  }
  std::size_t total = 0;
  for (std::size_t len : lengths) total += len;

  std::vector<Event> events;
  std::vector<std::vector<double>> channels(spec.channels, std::vector<double>(total));
  for (std::size_t ch = 0; ch < spec.channels; ++ch) {
    const std::uint64_t channel_seed = derive_seed(signal_seed, ch + 1);
    Rng noise(derive_seed(channel_seed, 0));
    std::size_t pos = 0;
    for (std::size_t seg = 0; seg < lengths.size(); ++seg) {
      const std::size_t len = lengths[seg];
      const bool is_word = seg % 2 == 1;
      if (is_word && ch == 0) events.push_back({pos, pos + len});
      double* out = channels[ch].data() + pos;
      if (is_word && spec.word_model.kind == WordModel::Kind::FBm) {
        const auto path = generate_fbm(len, spec.word_model.hurst, derive_seed(channel_seed, seg + 1));
        for (std::size_t t = 0; t < len; ++t) out[t] = spec.word_model.scale * path[t];
      } else {
        const double sigma = is_word ? spec.word_model.sigma : spec.idle_model.sigma;
        for (std::size_t t = 0; t < len; ++t) out[t] = sigma * noise.normal();
      }
      pos += len;
    }
  }

  auto signal =
      MultichannelSignal::from_channels(default_channel_names(spec.channels), channels, spec.rate_hz);
  return MarkedSignal{"sig" + std::to_string(signal_index + 1), std::move(signal),
                      MarkerTrack(std::move(events), total)};
}

SubjectData generate_subject(const SynthSpec& spec) {
  spec.validate();
  SubjectData subject{spec.subject_id, {}};
  for (std::size_t k = 0; k < spec.n_signals; ++k) subject.signals.push_back(generate_signal(spec, k));
  return subject;
}

}  // namespace onset
