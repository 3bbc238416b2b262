#pragma once

#include "onset/evaluation.hpp"

#include <filesystem>
#include <vector>

namespace onset {

// Subject directory layout shared by synthetic and real recordings:
//
//   <subject>/<id>_signal.csv    signal CSV
//   <subject>/<id>_markers.csv   markers CSV for the same recording
//
// Signals are ordered by id (lexicographic); the subject id is the directory
// name. A signal without markers is MalformedFile.
SubjectData load_subject_dir(const std::filesystem::path& dir);
void write_subject_dir(const std::filesystem::path& dir, const SubjectData& subject);

std::filesystem::path signal_path(const std::filesystem::path& dir, const std::string& id);
std::filesystem::path markers_path(const std::filesystem::path& dir, const std::string& id);

}  // namespace onset
