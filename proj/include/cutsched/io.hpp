#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cutsched {

/// Reads a whole file. Throws std::runtime_error if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames it over `path`, so readers never
/// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

} // namespace cutsched
