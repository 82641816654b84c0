#pragma once

#include <vector>

#include "stec/series.hpp"

namespace stec {

enum class ResampleMode { Mean, Sum };

/// Replace robust-z outliers (|x - median| / (1.4826 * MAD) > threshold)
/// by linear interpolation between the nearest surviving neighbors;
/// endpoints take the nearest surviving value. Length is preserved.
SensorSeries remove_outliers(const SensorSeries& series, double threshold);

/// s_0 = x_0; s_k = alpha * x_k + (1 - alpha) * s_{k-1}; alpha in (0, 1].
SensorSeries ema_smooth(const SensorSeries& series, double alpha);

/// Bin raw timestamped samples into 1-second bins [t, t+1). Mean mode
/// averages and fills empty bins by linear interpolation; Sum mode totals
/// and fills empty bins with zero. Output sample_period is exactly 1.
SensorSeries resample_1s(const std::vector<TimedSample>& raw, ResampleMode mode);

}  // namespace stec
