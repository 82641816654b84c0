#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace stec {

// The 12 sensor channels in their canonical order. This order fixes the
// row/column indexing of every connectivity feature matrix, so it must
// never be reordered.
enum class SensorId : int {
    LHM,   // left hand movements (IMU)
    RHM,   // right hand movements (IMU)
    CM,    // chair movements (IMU)
    GP,    // gaze position
    PD,    // pupil diameter
    EA,    // electrodermal activity
    LHMA,  // left hand muscle activity (EMG)
    RHMA,  // right hand muscle activity (EMG)
    HR,    // heart rate
    KA,    // keyboard activity (presses in last 5 s)
    MA1,   // mouse distance in last 5 s
    MA2,   // mouse clicks in last 5 s
};

inline constexpr int kSensorCount = 12;

inline constexpr std::array<std::string_view, kSensorCount> kSensorNames = {
    "LHM", "RHM", "CM", "GP", "PD", "EA", "LHMA", "RHMA", "HR", "KA", "MA1", "MA2"};

inline std::string_view sensor_name(SensorId id) {
    return kSensorNames[static_cast<int>(id)];
}

std::optional<SensorId> parse_sensor_id(std::string_view name);

/// Count-like channels (events per trailing window) default to Sum
/// resampling; everything else is averaged.
bool sum_resampled_by_default(SensorId id);

}  // namespace stec
