#pragma once

// Conversion of an on-disk dataset tree into the manifest + CSV layout the
// pipeline consumes. All knowledge about external dataset layouts lives
// here, behind the `adapt-dataset` command.

#include <filesystem>
#include <string>
#include <vector>

namespace stec::adapt {

struct Options {
    std::filesystem::path input_dir;
    std::filesystem::path output_manifest;
    std::filesystem::path map_file;    // optional alias/column map JSON
    std::filesystem::path teams_file;  // optional {match_dir: team label} JSON
};

struct Report {
    int matches = 0;
    int players = 0;
    std::vector<std::string> warnings;  // anything that could not be mapped
};

/// Scan input_dir (match dirs -> player dirs -> per-sensor CSVs + MoI CSV),
/// convert every recognized file, and write a manifest next to the
/// converted CSVs. Throws DataError when nothing recognizable is found.
Report run(const Options& options);

}  // namespace stec::adapt
