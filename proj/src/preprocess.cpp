#include "stec/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stec/error.hpp"

namespace stec {

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double hi = *mid;
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

}  // namespace

SensorSeries remove_outliers(const SensorSeries& series, double threshold) {
    if (series.values.empty()) throw DataError("remove_outliers: empty series");
    if (!(threshold > 0.0)) throw ConfigError("remove_outliers: threshold must be > 0");

    const auto& x = series.values;
    const std::size_t n = x.size();
    const double med = median_of(x);

    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(x[i] - med);
    const double mad = median_of(dev);
    const double scale = 1.4826 * mad;

    std::vector<char> keep(n, 1);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
        // zero deviation is never an outlier, even when MAD is zero
        const bool flagged = dev[i] > 0.0 && (scale <= 0.0 || dev[i] / scale > threshold);
        keep[i] = flagged ? 0 : 1;
        kept += keep[i];
    }
    if (kept == n) return series;
    if (kept == 0) throw DataError("remove_outliers: degenerate series, every sample flagged");

    SensorSeries out = series;
    std::ptrdiff_t prev = -1;
    const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
        if (keep[static_cast<std::size_t>(i)]) {
            prev = i;
            continue;
        }
        std::ptrdiff_t next = i + 1;
        while (next < sn && !keep[static_cast<std::size_t>(next)]) ++next;
        if (prev < 0) {
            out.values[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(next)];
        } else if (next >= sn) {
            out.values[static_cast<std::size_t>(i)] = out.values[static_cast<std::size_t>(prev)];
        } else {
            const double w = static_cast<double>(i - prev) / static_cast<double>(next - prev);
            out.values[static_cast<std::size_t>(i)] =
                out.values[static_cast<std::size_t>(prev)] * (1.0 - w) +
                x[static_cast<std::size_t>(next)] * w;
        }
    }
    return out;
}

SensorSeries ema_smooth(const SensorSeries& series, double alpha) {
    if (series.values.empty()) throw DataError("ema_smooth: empty series");
    if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("ema_smooth: alpha must be in (0, 1]");

    SensorSeries out = series;
    double state = series.values.front();
    out.values[0] = state;
    for (std::size_t i = 1; i < series.values.size(); ++i) {
        state = alpha * series.values[i] + (1.0 - alpha) * state;
        out.values[i] = state;
    }
    return out;
}

SensorSeries resample_1s(const std::vector<TimedSample>& raw, ResampleMode mode) {
    if (raw.empty()) throw DataError("resample_1s: empty input");
    for (std::size_t i = 1; i < raw.size(); ++i) {
        if (raw[i].t < raw[i - 1].t) throw DataError("resample_1s: timestamps not nondecreasing");
    }

    const long first_bin = static_cast<long>(std::floor(raw.front().t));
    const long last_bin = static_cast<long>(std::floor(raw.back().t));
    const std::size_t nbins = static_cast<std::size_t>(last_bin - first_bin + 1);

    std::vector<double> sum(nbins, 0.0);
    std::vector<std::size_t> count(nbins, 0);
    for (const auto& s : raw) {
        const std::size_t b = static_cast<std::size_t>(static_cast<long>(std::floor(s.t)) - first_bin);
        sum[b] += s.value;
        ++count[b];
    }

    SensorSeries out;
    out.start_time = static_cast<double>(first_bin);
    out.sample_period = 1.0;
    out.values.resize(nbins);

    if (mode == ResampleMode::Sum) {
        for (std::size_t b = 0; b < nbins; ++b) out.values[b] = sum[b];
        return out;
    }

    // Mean: first and last bins always contain a sample, so every empty
    // run is interior and interpolates between two filled bins.
    for (std::size_t b = 0; b < nbins; ++b) {
        if (count[b]) out.values[b] = sum[b] / static_cast<double>(count[b]);
    }
    std::size_t prev = 0;
    for (std::size_t b = 1; b < nbins; ++b) {
        if (!count[b]) continue;
        if (b > prev + 1) {
            for (std::size_t i = prev + 1; i < b; ++i) {
                const double w = static_cast<double>(i - prev) / static_cast<double>(b - prev);
                out.values[i] = out.values[prev] * (1.0 - w) + out.values[b] * w;
            }
        }
        prev = b;
    }
    return out;
}

}  // namespace stec
