#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stec/preprocess.hpp"
#include "stec/series.hpp"

namespace stec {

struct SensorSource {
    std::filesystem::path path;                 // resolved against the manifest directory
    std::optional<ResampleMode> resample;       // overrides the per-sensor default
};

struct PlayerRecord {
    std::string player_id;
    std::map<SensorId, SensorSource> sensors;
    std::vector<SensorId> missing_sensors;      // declared, never silently absent
    std::filesystem::path moi_path;

    bool has_all_sensors() const { return missing_sensors.empty(); }
};

struct MatchRecord {
    std::string match_id;
    SkillLabel team_label = SkillLabel::Amateur;
    std::vector<PlayerRecord> players;
};

struct Manifest {
    std::filesystem::path root;                 // directory the manifest was loaded from
    std::vector<MatchRecord> matches;
};

/// Load and validate a manifest JSON. Throws ParseError on malformed
/// input, DataError on duplicate ids or dangling file paths.
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace stec
