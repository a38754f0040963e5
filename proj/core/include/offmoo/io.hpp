#pragma once

#include <filesystem>
#include <string>

namespace offmoo {

std::string read_text_file(const std::filesystem::path& path);

/// Writes atomically enough for our purposes: to a temporary sibling, then
/// renamed over the target.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace offmoo
