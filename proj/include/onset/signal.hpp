#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace onset {

inline constexpr double kDefaultSamplingRateHz = 128.0;

// Continuous multichannel recording. Samples are stored channel-major:
// data()[ch * samples() + t].
class MultichannelSignal {
 public:
  // Throws TooFewChannels for < 2 channels, DimensionMismatch when data does
  // not hold exactly channel_names.size() * samples values, InvalidConfig for
  // a non-positive rate.
  MultichannelSignal(std::vector<std::string> channel_names, std::size_t samples,
                     std::vector<double> data, double sampling_rate_hz = kDefaultSamplingRateHz);

  // One inner vector per channel; all must have equal length.
  static MultichannelSignal from_channels(std::vector<std::string> channel_names,
                                          const std::vector<std::vector<double>>& channels,
                                          double sampling_rate_hz = kDefaultSamplingRateHz);

  std::size_t channels() const noexcept { return names_.size(); }
  std::size_t samples() const noexcept { return samples_; }
  double sampling_rate_hz() const noexcept { return rate_; }
  const std::vector<std::string>& channel_names() const noexcept { return names_; }
  const std::vector<double>& data() const noexcept { return data_; }

  std::span<const double> channel(std::size_t ch) const {
    return {data_.data() + ch * samples_, samples_};
  }
  double at(std::size_t ch, std::size_t t) const { return data_[ch * samples_ + t]; }

  // Copy of samples [begin, end). Throws WindowOutOfBounds when the range is
  // empty or exceeds the signal.
  MultichannelSignal slice(std::size_t begin, std::size_t end) const;

  friend bool operator==(const MultichannelSignal&, const MultichannelSignal&) = default;

 private:
  std::vector<std::string> names_;
  std::size_t samples_ = 0;
  std::vector<double> data_;
  double rate_ = kDefaultSamplingRateHz;
};

struct Event {
  std::size_t start_sample = 0;  // inclusive
  std::size_t end_sample = 0;    // exclusive

  std::size_t length() const noexcept { return end_sample - start_sample; }
  friend bool operator==(const Event&, const Event&) = default;
};

// Ground-truth annotations: ordered, non-overlapping, in bounds.
class MarkerTrack {
 public:
  // Throws OutOfRangeEvent or OverlappingEvents.
  MarkerTrack(std::vector<Event> events, std::size_t signal_length);

  const std::vector<Event>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  std::size_t signal_length() const noexcept { return signal_length_; }
  std::vector<std::size_t> onsets() const;

  friend bool operator==(const MarkerTrack&, const MarkerTrack&) = default;

 private:
  std::vector<Event> events_;
  std::size_t signal_length_ = 0;
};

// Signal CSV:
//   # rate=<float>
//   t,<ch1>,...,<chN>
//   <sample index>,<v1>,...,<vN>
MultichannelSignal read_signal(const std::filesystem::path& path);
MultichannelSignal parse_signal(const std::string& text);
void write_signal(const std::filesystem::path& path, const MultichannelSignal& signal);
std::string format_signal(const MultichannelSignal& signal);

// Markers CSV: header "start_sample,end_sample", one integer pair per row.
MarkerTrack read_markers(const std::filesystem::path& path, std::size_t signal_length);
MarkerTrack parse_markers(const std::string& text, std::size_t signal_length);
void write_markers(const std::filesystem::path& path, const MarkerTrack& markers);
std::string format_markers(const MarkerTrack& markers);

// Common Average Reference: subtracts the across-channel mean from every
// sample column.
MultichannelSignal apply_car(const MultichannelSignal& signal);

}  // namespace onset
