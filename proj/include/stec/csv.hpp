#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stec/series.hpp"

namespace stec {

/// Parse a `timestamp,value` CSV; timestamps must be nondecreasing reals.
std::vector<TimedSample> load_sensor_csv(const std::filesystem::path& path);

/// Parse a `timestamp,kind` CSV (kind: kill|death|assist, case-insensitive)
/// and return the events sorted by time.
std::vector<MoiEvent> load_moi(const std::filesystem::path& path, const std::string& match_id,
                               const std::string& player_id);

// Low-level helpers shared by the loaders and adapt-dataset.
std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path);
double parse_double_field(const std::string& field, const std::filesystem::path& path, std::size_t line);

}  // namespace stec
