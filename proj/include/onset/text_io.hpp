#pragma once

// Small helpers shared by the CSV readers and writers. Locale independent.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace onset::text {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split(std::string_view line, char delim);

bool parse_double(std::string_view cell, double& out);
bool parse_size(std::string_view cell, std::size_t& out);

// Shortest representation that round-trips exactly.
void append_double(std::string& out, double value);

}  // namespace onset::text
