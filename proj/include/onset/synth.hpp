#pragma once

#include "onset/evaluation.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace onset {

struct LengthRange {
  std::size_t min = 0;
  std::size_t max = 0;  // inclusive

  friend bool operator==(const LengthRange&, const LengthRange&) = default;
};

struct WordModel {
  enum class Kind { FBm, HighVarianceNoise };
  Kind kind = Kind::FBm;
  double hurst = 0.8;  // FBm
  double scale = 1.0;  // FBm: standard deviation of the underlying increments
  double sigma = 3.0;  // HighVarianceNoise

  friend bool operator==(const WordModel&, const WordModel&) = default;
};

struct IdleModel {
  double sigma = 1.0;  // white Gaussian noise

  friend bool operator==(const IdleModel&, const IdleModel&) = default;
};

struct SynthSpec {
  std::size_t channels = 14;
  double rate_hz = 128.0;
  std::size_t n_events = 33;
  std::size_t n_signals = 5;
  LengthRange word_len{200, 300};
  LengthRange idle_len{300, 600};
  WordModel word_model;
  IdleModel idle_model;
  std::uint64_t seed = 0;
  std::string subject_id = "synthetic";

  // Throws InvalidConfig (or InvalidHurst) naming the offending field.
  void validate() const;

  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

// Fractional Gaussian noise with unit variance, exact covariance via
// circulant embedding (Davies-Harte). Throws InvalidHurst outside (0, 1).
std::vector<double> generate_fgn(std::size_t length, double hurst, std::uint64_t seed);

// Cumulative sum of generate_fgn: fBm sampled at t = 1..length with
// Var X(t) = t^(2h). Throws InvalidHurst outside (0, 1), SeriesTooShort
// below 16 samples.
std::vector<double> generate_fbm(std::size_t length, double hurst, std::uint64_t seed);

// Signals alternate idle and word segments, starting and ending with idle.
// Signal k (0-based) draws from derive_seed(spec.seed, k), so each signal is
// reproducible on its own.
MarkedSignal generate_signal(const SynthSpec& spec, std::size_t signal_index);
SubjectData generate_subject(const SynthSpec& spec);

// 14 standard electrode names for 14 channels, otherwise C1..Cn.
std::vector<std::string> default_channel_names(std::size_t channels);

}  // namespace onset
