#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stec/classify.hpp"
#include "stec/evaluate.hpp"
#include "stec/manifest.hpp"
#include "stec/selection.hpp"
#include "stec/ste.hpp"
#include "stec/windowing.hpp"

namespace stec {

struct PreprocessConfig {
    bool enabled = true;                 // off when the dataset ships preprocessed
    double outlier_threshold = 3.5;
    double ema_alpha = 0.3;
    std::set<SensorId> sum_sensors = {SensorId::KA, SensorId::MA1, SensorId::MA2};
};

struct GroupingConfig {
    int min_events = 4;
    int max_events = 10;
    int ks_override = 0;  // 0 = derive K_s from the min/max rule
};

struct PipelineConfig {
    std::filesystem::path manifest_path;
    std::optional<std::filesystem::path> features_csv;  // skip extraction when set
    PreprocessConfig preprocess;
    GroupingConfig grouping;
    SteParams ste;
    int td = 4;
    bool tune_td = false;
    EventFilter events = EventFilter::All;
    bool balance = true;
    CnCvParams cncv;
    ClassifierKind classifier = ClassifierKind::Svm;
    ClassifierParams clf;
    RankMode selection_mode = RankMode::WholeDataset;
    int k_all = 5;
    std::uint64_t seed = 1;
    int threads = 0;
    std::filesystem::path out_dir = "out";

    void validate() const;
    std::string to_json() const;  // resolved values, echoed for provenance

    static PipelineConfig from_json_file(const std::filesystem::path& path);
    static PipelineConfig from_json_text(const std::string& text,
                                         const std::filesystem::path& base_dir);
};

/// One (match, player)'s preprocessed channels and events.
struct PlayerData {
    std::string match_id;
    std::string player_id;
    SkillLabel label = SkillLabel::Amateur;
    std::array<SensorSeries, kSensorCount> series;
    std::vector<MoiEvent> events;
    bool complete = true;  // false when the manifest declared missing sensors
};

std::vector<PlayerData> load_players(const Manifest& manifest, const PreprocessConfig& cfg,
                                     int threads);

/// events filter -> subsequences -> per-group STE features -> balancing.
Dataset build_dataset(const std::vector<PlayerData>& players, int td, EventFilter filter,
                      const GroupingConfig& grouping, const SteParams& ste_params, bool balance,
                      std::uint64_t seed, int threads, std::vector<std::string>* warnings = nullptr);

/// Caches datasets per (td, filter) so sweeps and tuning recompute only
/// from the windowing stage onward.
class DatasetCache {
public:
    DatasetCache(std::vector<PlayerData> players, GroupingConfig grouping, SteParams ste_params,
                 bool balance, std::uint64_t seed, int threads);

    const Dataset& get(int td, EventFilter filter);
    std::vector<std::string> take_warnings();

private:
    std::vector<PlayerData> players_;
    GroupingConfig grouping_;
    SteParams ste_params_;
    bool balance_;
    std::uint64_t seed_;
    int threads_;
    std::map<std::pair<int, int>, Dataset> cache_;
    std::vector<std::string> warnings_;
};

// Seed tags for the independent RNG streams of one pipeline run.
namespace seed_tag {
inline constexpr std::uint64_t kBalance = 0xba1a;
inline constexpr std::uint64_t kFolds = 0xf01d;
inline constexpr std::uint64_t kFit = 0xf17;
inline constexpr std::uint64_t kTune = 0x1dd;
}  // namespace seed_tag

}  // namespace stec
