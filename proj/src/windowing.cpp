#include "stec/windowing.hpp"

#include <algorithm>
#include <cmath>

#include "stec/error.hpp"

namespace stec {

int WindowParams::samples_per_side() const {
    const double s = static_cast<double>(td) / T;
    const int rounded = static_cast<int>(std::llround(s));
    if (rounded < 1 || std::abs(s - rounded) > 1e-9) {
        throw ConfigError("window: td must be a positive integer multiple of the sample period");
    }
    return rounded;
}

void WindowParams::validate() const {
    if (!(T > 0.0)) throw ConfigError("window: sample period must be positive");
    (void)samples_per_side();
}

std::optional<Segment> try_extract_segment(const SensorSeries& series, const MoiEvent& event,
                                           const WindowParams& params) {
    const int side = params.samples_per_side();
    const long center = std::lround((event.t_e - series.start_time) / series.sample_period);
    const long last = static_cast<long>(series.values.size()) - 1;
    if (center - side < 0 || center + side > last) return std::nullopt;

    Segment seg;
    seg.sensor = series.sensor;
    seg.event = event;
    seg.values.assign(series.values.begin() + (center - side),
                      series.values.begin() + (center + side + 1));
    return seg;
}

Segment extract_segment(const SensorSeries& series, const MoiEvent& event,
                        const WindowParams& params) {
    auto seg = try_extract_segment(series, event, params);
    if (!seg) {
        throw DataError("extract_segment: window around t=" + std::to_string(event.t_e) +
                        " exceeds the series span");
    }
    return std::move(*seg);
}

SubsequenceSplit split_subsequences(const std::vector<MoiEvent>& events, int min_events,
                                    int max_events) {
    if (events.empty()) throw DataError("split_subsequences: empty event list");
    if (min_events < 1 || max_events < min_events) {
        throw ConfigError("split_subsequences: need 1 <= min_events <= max_events");
    }

    SubsequenceSplit result;
    const int count = static_cast<int>(events.size());
    if (count < min_events) {
        result.groups.push_back(events);
        result.undersized = true;
        return result;
    }

    const int k = (count + max_events - 1) / max_events;
    if (count / k < min_events) {
        throw ConfigError("split_subsequences: no contiguous partition satisfies [" +
                          std::to_string(min_events) + ", " + std::to_string(max_events) + "]");
    }
    const int base = count / k;
    const int extra = count % k;  // first `extra` groups take one more
    int offset = 0;
    for (int g = 0; g < k; ++g) {
        const int size = base + (g < extra ? 1 : 0);
        result.groups.emplace_back(events.begin() + offset, events.begin() + offset + size);
        offset += size;
    }
    return result;
}

BuildGroupResult build_event_group(const std::array<SensorSeries, kSensorCount>& series,
                                   const std::vector<MoiEvent>& events, const WindowParams& params,
                                   EventFilter filter, int min_events) {
    const int side = params.samples_per_side();
    BuildGroupResult result;

    std::vector<MoiEvent> selected;
    for (const auto& e : events) {
        if (filter_matches(filter, e.kind)) selected.push_back(e);
    }

    // an event must fit the window on every sensor or it is dropped everywhere
    std::vector<MoiEvent> usable;
    for (const auto& e : selected) {
        bool ok = true;
        for (const auto& s : series) {
            if (!try_extract_segment(s, e, params)) {
                ok = false;
                break;
            }
        }
        (ok ? usable : result.dropped).push_back(e);
    }

    if (static_cast<int>(usable.size()) < min_events) return result;

    EventGroup group;
    group.events = usable;
    group.block_length = 2 * side + 1;
    for (int s = 0; s < kSensorCount; ++s) {
        auto& seq = group.sequences[static_cast<std::size_t>(s)];
        seq.reserve(usable.size() * static_cast<std::size_t>(group.block_length));
        for (const auto& e : usable) {
            const auto seg = try_extract_segment(series[static_cast<std::size_t>(s)], e, params);
            seq.insert(seq.end(), seg->values.begin(), seg->values.end());
        }
    }
    result.group = std::move(group);
    return result;
}

}  // namespace stec
