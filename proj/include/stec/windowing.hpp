#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "stec/series.hpp"

namespace stec {

/// Extraction window of length 2*td around an event; S = td / T samples
/// per side, which must be a positive integer.
struct WindowParams {
    int td = 4;         // half-window, seconds
    double T = 1.0;     // sample period, seconds

    int samples_per_side() const;
    void validate() const;
};

struct Segment {
    SensorId sensor = SensorId::LHM;
    MoiEvent event;
    std::vector<double> values;  // exactly 2S+1, centered on t_e
};

/// Returns std::nullopt when the window would cross the series span.
std::optional<Segment> try_extract_segment(const SensorSeries& series, const MoiEvent& event,
                                           const WindowParams& params);

/// Throwing variant of try_extract_segment (DataError on boundary).
Segment extract_segment(const SensorSeries& series, const MoiEvent& event,
                        const WindowParams& params);

struct SubsequenceSplit {
    std::vector<std::vector<MoiEvent>> groups;  // contiguous, chronological
    bool undersized = false;                    // single group below min_events
};

/// Break a chronological event list into K_s contiguous groups of
/// near-equal size within [min_events, max_events]; fewer than min_events
/// yields a single group flagged undersized.
SubsequenceSplit split_subsequences(const std::vector<MoiEvent>& events, int min_events = 4,
                                    int max_events = 10);

/// Per-sensor concatenation of the event segments of one subsequence.
/// All 12 sequences share the same event order and block boundaries.
struct EventGroup {
    std::string player_id;
    std::string match_id;
    int subsequence_index = 0;
    std::vector<MoiEvent> events;
    int block_length = 0;  // 2S+1
    std::array<std::vector<double>, kSensorCount> sequences;

    int num_blocks() const { return static_cast<int>(events.size()); }
};

struct BuildGroupResult {
    std::optional<EventGroup> group;   // nullopt when the group shrank below min_events
    std::vector<MoiEvent> dropped;     // events removed group-wide by boundary checks
};

/// Filter events, extract the window for every sensor, and concatenate.
/// An event that fails the boundary check on any sensor is dropped from
/// all sensors; if fewer than min_events remain the group is rejected.
BuildGroupResult build_event_group(const std::array<SensorSeries, kSensorCount>& series,
                                   const std::vector<MoiEvent>& events, const WindowParams& params,
                                   EventFilter filter = EventFilter::All, int min_events = 4);

}  // namespace stec
