#pragma once

#include <filesystem>
#include <string>

namespace reflab {

std::string read_file(const std::filesystem::path& path);

// Writes via a temp file in the same directory followed by rename, so readers
// never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace reflab
