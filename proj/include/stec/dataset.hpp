#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "stec/sensors.hpp"
#include "stec/series.hpp"

namespace stec {

struct Provenance {
    std::string player_id;
    std::string match_id;
    int subsequence_index = 0;

    friend bool operator==(const Provenance&, const Provenance&) = default;
    friend auto operator<=>(const Provenance& a, const Provenance& b) {
        return std::tie(a.player_id, a.match_id, a.subsequence_index) <=>
               std::tie(b.player_id, b.match_id, b.subsequence_index);
    }
};

struct LabeledSample {
    std::vector<double> features;
    SkillLabel label = SkillLabel::Amateur;
    Provenance prov;
};

struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<LabeledSample> samples;

    std::size_t num_features() const { return feature_names.size(); }
};

inline constexpr int kSteFeatureCount = kSensorCount * kSensorCount;  // 144

/// Feature index -> "STE_<SRC>_to_<DST>" in canonical row-major order
/// (source sensor is the row).
std::string ste_feature_name(int index);
int ste_feature_index(const std::string& name);  // throws DataError on unknown names
std::vector<std::string> ste_feature_names();

/// Downsample the majority class (without replacement, seeded) to the
/// minority count and shuffle deterministically.
std::vector<LabeledSample> balance_classes(const std::vector<LabeledSample>& samples,
                                           std::uint64_t seed);

void write_feature_csv(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_feature_csv(const std::filesystem::path& path);

}  // namespace stec
