#include "onset/dataset.hpp"

#include "onset/error.hpp"

#include <algorithm>

namespace onset {

namespace {

constexpr std::string_view kSignalSuffix = "_signal.csv";
constexpr std::string_view kMarkersSuffix = "_markers.csv";

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::filesystem::path signal_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / (id + std::string(kSignalSuffix));
}

std::filesystem::path markers_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / (id + std::string(kMarkersSuffix));
}

SubjectData load_subject_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorKind::Io, "'" + dir.string() + "' is not a directory");
  }
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (ends_with(name, kSignalSuffix)) ids.push_back(name.substr(0, name.size() - kSignalSuffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) {
    throw Error(ErrorKind::MalformedFile, "no '*" + std::string(kSignalSuffix) + "' files in " + dir.string());
  }

  SubjectData subject;
  subject.subject_id = std::filesystem::absolute(dir).lexically_normal().filename().string();
  if (subject.subject_id.empty()) subject.subject_id = std::filesystem::absolute(dir).parent_path().filename().string();
  for (const auto& id : ids) {
    const auto mpath = markers_path(dir, id);
    if (!std::filesystem::exists(mpath)) {
      throw Error(ErrorKind::MalformedFile, "signal '" + id + "' has no markers file " + mpath.string());
    }
    MultichannelSignal signal = read_signal(signal_path(dir, id));
    MarkerTrack markers = read_markers(mpath, signal.samples());
    subject.signals.push_back({id, std::move(signal), std::move(markers)});
  }
  return subject;
}

void write_subject_dir(const std::filesystem::path& dir, const SubjectData& subject) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + dir.string() + "': " + ec.message());
  for (const auto& s : subject.signals) {
    write_signal(signal_path(dir, s.id), s.signal);
    write_markers(markers_path(dir, s.id), s.markers);
  }
}

}  // namespace onset
