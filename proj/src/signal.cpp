#include "onset/signal.hpp"

#include "onset/error.hpp"
#include "onset/text_io.hpp"

#include <cmath>
#include <string_view>

namespace onset {

namespace {

std::string line_ref(std::size_t line_no) { return "line " + std::to_string(line_no); }

}  // namespace

MultichannelSignal::MultichannelSignal(std::vector<std::string> channel_names, std::size_t samples,
                                       std::vector<double> data, double sampling_rate_hz)
    : names_(std::move(channel_names)), samples_(samples), data_(std::move(data)), rate_(sampling_rate_hz) {
  if (names_.size() < 2) {
    throw Error(ErrorKind::TooFewChannels,
                "signal needs at least 2 channels, got " + std::to_string(names_.size()));
  }
  if (data_.size() != names_.size() * samples_) {
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(names_.size() * samples_) +
                                                  " values, got " + std::to_string(data_.size()));
  }
  if (!(rate_ > 0.0) || !std::isfinite(rate_)) {
    throw Error(ErrorKind::InvalidConfig, "sampling rate must be positive");
  }
}

MultichannelSignal MultichannelSignal::from_channels(std::vector<std::string> channel_names,
                                                     const std::vector<std::vector<double>>& channels,
                                                     double sampling_rate_hz) {
  if (channels.size() != channel_names.size()) {
    throw Error(ErrorKind::DimensionMismatch, "channel name count does not match channel count");
  }
  const std::size_t n = channels.empty() ? 0 : channels.front().size();
  std::vector<double> data;
  data.reserve(n * channels.size());
  for (const auto& ch : channels) {
    if (ch.size() != n) throw Error(ErrorKind::DimensionMismatch, "channels have unequal lengths");
    data.insert(data.end(), ch.begin(), ch.end());
  }
  return MultichannelSignal(std::move(channel_names), n, std::move(data), sampling_rate_hz);
}

MultichannelSignal MultichannelSignal::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > samples_) {
    throw Error(ErrorKind::WindowOutOfBounds, "slice [" + std::to_string(begin) + "," + std::to_string(end) +
                                                  ") outside signal of length " + std::to_string(samples_));
  }
  const std::size_t len = end - begin;
  std::vector<double> out;
  out.reserve(len * channels());
  for (std::size_t ch = 0; ch < channels(); ++ch) {
    const auto src = channel(ch).subspan(begin, len);
    out.insert(out.end(), src.begin(), src.end());
  }
  return MultichannelSignal(names_, len, std::move(out), rate_);
}

MarkerTrack::MarkerTrack(std::vector<Event> events, std::size_t signal_length)
    : events_(std::move(events)), signal_length_(signal_length) {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (e.start_sample >= e.end_sample || e.end_sample > signal_length_) {
      throw Error(ErrorKind::OutOfRangeEvent, "event " + std::to_string(i) + " (" +
                                                  std::to_string(e.start_sample) + "," +
                                                  std::to_string(e.end_sample) + ") invalid for length " +
                                                  std::to_string(signal_length_));
    }
    if (i > 0 && events_[i - 1].end_sample > e.start_sample) {
      throw Error(ErrorKind::OverlappingEvents,
                  "event " + std::to_string(i) + " starts before event " + std::to_string(i - 1) + " ends");
    }
  }
}

std::vector<std::size_t> MarkerTrack::onsets() const {
  std::vector<std::size_t> out;
  out.reserve(events_.size());
  for (const auto& e : events_) out.push_back(e.start_sample);
  return out;
}

MultichannelSignal parse_signal(const std::string& text) {
  const auto lines = text::split_lines(text);
  if (lines.size() < 2) throw Error(ErrorKind::MalformedFile, "missing rate line or header");

  constexpr std::string_view kRatePrefix = "# rate=";
  if (lines[0].rfind(kRatePrefix, 0) != 0) {
    throw Error(ErrorKind::MalformedFile, "first line must be '# rate=<float>'");
  }
  double rate = 0.0;
  if (!text::parse_double(lines[0].substr(kRatePrefix.size()), rate) || !(rate > 0.0)) {
    throw Error(ErrorKind::MalformedFile, "invalid sampling rate in '" + std::string(lines[0]) + "'");
  }

  const auto header = text::split(lines[1], ',');
  if (header.empty() || header[0] != "t") {
    throw Error(ErrorKind::MalformedFile, "header must start with 't'");
  }
  std::vector<std::string> names;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].empty()) throw Error(ErrorKind::MalformedFile, "empty channel name in header");
    names.emplace_back(header[i]);
  }
  if (names.size() < 2) {
    throw Error(ErrorKind::TooFewChannels, "signal needs at least 2 channels, got " + std::to_string(names.size()));
  }

  const std::size_t n_ch = names.size();
  std::vector<std::vector<double>> cols(n_ch);
  for (std::size_t li = 2; li < lines.size(); ++li) {
    if (lines[li].empty()) {
      if (li + 1 == lines.size()) break;
      throw Error(ErrorKind::MalformedFile, line_ref(li + 1) + ": empty row");
    }
    const auto cells = text::split(lines[li], ',');
    if (cells.size() != n_ch + 1) {
      throw Error(ErrorKind::MalformedFile, line_ref(li + 1) + ": expected " + std::to_string(n_ch + 1) +
                                                " cells, got " + std::to_string(cells.size()));
    }
    std::size_t index = 0;
    if (!text::parse_size(cells[0], index)) {
      throw Error(ErrorKind::MalformedFile, line_ref(li + 1) + ": sample index is not an integer");
    }
    for (std::size_t c = 0; c < n_ch; ++c) {
      double v = 0.0;
      if (!text::parse_double(cells[c + 1], v) || !std::isfinite(v)) {
        throw Error(ErrorKind::MalformedFile,
                    line_ref(li + 1) + ": non-numeric cell '" + std::string(cells[c + 1]) + "'");
      }
      cols[c].push_back(v);
    }
  }
  return MultichannelSignal::from_channels(std::move(names), cols, rate);
}

MultichannelSignal read_signal(const std::filesystem::path& path) {
  try {
    return parse_signal(text::read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    rethrow_with_context(e, path.string());
  }
}

std::string format_signal(const MultichannelSignal& signal) {
  std::string out = "# rate=";
  text::append_double(out, signal.sampling_rate_hz());
  out += "\nt";
  for (const auto& name : signal.channel_names()) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (std::size_t t = 0; t < signal.samples(); ++t) {
    out += std::to_string(t);
    for (std::size_t ch = 0; ch < signal.channels(); ++ch) {
      out += ',';
      text::append_double(out, signal.at(ch, t));
    }
    out += '\n';
  }
  return out;
}

void write_signal(const std::filesystem::path& path, const MultichannelSignal& signal) {
  text::write_file(path, format_signal(signal));
}

MarkerTrack parse_markers(const std::string& text, std::size_t signal_length) {
  const auto lines = text::split_lines(text);
  if (lines.empty() || lines[0] != "start_sample,end_sample") {
    throw Error(ErrorKind::MalformedFile, "markers header must be 'start_sample,end_sample'");
  }
  std::vector<Event> events;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) {
      if (li + 1 == lines.size()) break;
      throw Error(ErrorKind::MalformedFile, line_ref(li + 1) + ": empty row");
    }
    const auto cells = text::split(lines[li], ',');
    Event e;
    if (cells.size() != 2 || !text::parse_size(cells[0], e.start_sample) ||
        !text::parse_size(cells[1], e.end_sample)) {
      throw Error(ErrorKind::MalformedFile, line_ref(li + 1) + ": expected two non-negative integers");
    }
    events.push_back(e);
  }
  return MarkerTrack(std::move(events), signal_length);
}

MarkerTrack read_markers(const std::filesystem::path& path, std::size_t signal_length) {
  try {
    return parse_markers(text::read_file(path), signal_length);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    rethrow_with_context(e, path.string());
  }
}

std::string format_markers(const MarkerTrack& markers) {
  std::string out = "start_sample,end_sample\n";
  for (const auto& e : markers.events()) {
    out += std::to_string(e.start_sample);
    out += ',';
    out += std::to_string(e.end_sample);
    out += '\n';
  }
  return out;
}

void write_markers(const std::filesystem::path& path, const MarkerTrack& markers) {
  text::write_file(path, format_markers(markers));
}

MultichannelSignal apply_car(const MultichannelSignal& signal) {
  const std::size_t n_ch = signal.channels();
  const std::size_t n = signal.samples();
  const double inv = 1.0 / static_cast<double>(n_ch);
  std::vector<double> mean(n, 0.0);
  for (std::size_t ch = 0; ch < n_ch; ++ch) {
    const auto x = signal.channel(ch);
    for (std::size_t t = 0; t < n; ++t) mean[t] += x[t];
  }
  for (double& m : mean) m *= inv;

  std::vector<double> out(signal.data());
  for (std::size_t ch = 0; ch < n_ch; ++ch) {
    double* row = out.data() + ch * n;
    for (std::size_t t = 0; t < n; ++t) row[t] -= mean[t];
  }
  return MultichannelSignal(signal.channel_names(), n, std::move(out), signal.sampling_rate_hz());
}

}  // namespace onset
