#include "stec/sensors.hpp"

namespace stec {

std::optional<SensorId> parse_sensor_id(std::string_view name) {
    for (int i = 0; i < kSensorCount; ++i) {
        if (kSensorNames[i] == name) return static_cast<SensorId>(i);
    }
    return std::nullopt;
}

bool sum_resampled_by_default(SensorId id) {
    return id == SensorId::KA || id == SensorId::MA1 || id == SensorId::MA2;
}

}  // namespace stec
