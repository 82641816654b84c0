#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stec/sensors.hpp"

namespace stec {

struct TimedSample {
    double t = 0.0;
    double value = 0.0;
};

/// One uniformly sampled signal for one (player, match, sensor).
struct SensorSeries {
    SensorId sensor = SensorId::LHM;
    std::string player_id;
    std::string match_id;
    double start_time = 0.0;
    double sample_period = 1.0;
    std::vector<double> values;

    double end_time() const {
        return values.empty() ? start_time
                              : start_time + sample_period * static_cast<double>(values.size() - 1);
    }
};

enum class MoiKind { Kill, Death, Assist };

/// A timestamped game event (moment of interest) for one player.
struct MoiEvent {
    std::string match_id;
    std::string player_id;
    double t_e = 0.0;
    MoiKind kind = MoiKind::Kill;
};

enum class EventFilter { Kill, Death, Assist, All };

enum class SkillLabel { Amateur, Professional };

std::string_view to_string(MoiKind kind);
std::string_view to_string(EventFilter filter);
std::string_view to_string(SkillLabel label);

std::optional<MoiKind> parse_moi_kind(std::string_view text);          // case-insensitive
std::optional<EventFilter> parse_event_filter(std::string_view text);  // case-insensitive
std::optional<SkillLabel> parse_skill_label(std::string_view text);

inline bool filter_matches(EventFilter filter, MoiKind kind) {
    switch (filter) {
        case EventFilter::Kill: return kind == MoiKind::Kill;
        case EventFilter::Death: return kind == MoiKind::Death;
        case EventFilter::Assist: return kind == MoiKind::Assist;
        case EventFilter::All: return true;
    }
    return false;
}

}  // namespace stec
