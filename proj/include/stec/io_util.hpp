#pragma once

#include <filesystem>
#include <string>

namespace stec {

/// Shortest decimal form that round-trips a double exactly.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);

/// Write via a temp file in the same directory plus rename, so partially
/// written outputs are never observed.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace stec
