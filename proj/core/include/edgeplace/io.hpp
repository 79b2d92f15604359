#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace edgeplace {

/// Whole-file read; throws ParseError naming the path when it cannot be read.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace edgeplace
