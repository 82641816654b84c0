#include "stec/ste.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "stec/dataset.hpp"
#include "stec/error.hpp"

namespace stec {

namespace {

constexpr std::array<int, 8> kFactorial = {1, 1, 2, 6, 24, 120, 720, 5040};

// Lehmer rank of the argsort permutation; bijective onto [0, m!).
int pattern_code(std::span<const double> window) {
    const int m = static_cast<int>(window.size());
    std::array<int, 8> order;
    for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.begin() + m, [&](int a, int b) {
        return window[static_cast<std::size_t>(a)] < window[static_cast<std::size_t>(b)];
    });
    int code = 0;
    for (int j = 0; j < m; ++j) {
        int smaller_after = 0;
        for (int k = j + 1; k < m; ++k) {
            if (order[static_cast<std::size_t>(k)] < order[static_cast<std::size_t>(j)]) ++smaller_after;
        }
        code += smaller_after * kFactorial[static_cast<std::size_t>(m - 1 - j)];
    }
    return code;
}

}  // namespace

void SteParams::validate() const {
    if (m < 2 || m > 7) throw ConfigError("ste: embedding dimension m must be in [2, 7]");
    if (d < 1) throw ConfigError("ste: time delay d must be >= 1");
    if (t < 1) throw ConfigError("ste: prediction horizon t must be >= 1");
}

int SteParams::alphabet_size() const {
    return kFactorial[static_cast<std::size_t>(m)];
}

std::vector<int> ordinal_pattern(std::span<const double> window) {
    const int m = static_cast<int>(window.size());
    if (m < 1 || m > 7) throw DataError("ordinal_pattern: window size must be in [1, 7]");
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return window[static_cast<std::size_t>(a)] < window[static_cast<std::size_t>(b)];
    });
    for (auto& v : order) v += 1;  // 1-based window positions
    return order;
}

SymbolSequence symbol_sequence(std::span<const double> values, std::span<const int> block_lengths,
                               const SteParams& params) {
    params.validate();
    const int reach = (params.m - 1) * params.d;
    const int min_block = reach + params.t + 1;

    SymbolSequence seq;
    seq.m = params.m;
    seq.d = params.d;

    std::size_t total = 0;
    for (const int len : block_lengths) total += static_cast<std::size_t>(len);
    if (total != values.size()) throw DataError("symbol_sequence: block lengths do not cover the sequence");

    std::size_t offset = 0;
    std::array<double, 8> window;
    for (std::size_t b = 0; b < block_lengths.size(); ++b) {
        const int len = block_lengths[b];
        if (len < min_block) {
            throw DataError("symbol_sequence: block " + std::to_string(b) + " has " +
                            std::to_string(len) + " samples, need at least " +
                            std::to_string(min_block));
        }
        const int n_symbols = len - reach;
        for (int i = 0; i < n_symbols; ++i) {
            for (int j = 0; j < params.m; ++j) {
                window[static_cast<std::size_t>(j)] =
                    values[offset + static_cast<std::size_t>(i + j * params.d)];
            }
            seq.symbols.push_back(pattern_code({window.data(), static_cast<std::size_t>(params.m)}));
        }
        seq.block_sizes.push_back(n_symbols);
        offset += static_cast<std::size_t>(len);
    }
    return seq;
}

double ste(const SymbolSequence& src, const SymbolSequence& dst, const SteParams& params) {
    params.validate();
    if (src.m != params.m || dst.m != params.m || src.d != params.d || dst.d != params.d) {
        throw DataError("ste: symbol sequences built with different parameters");
    }
    if (src.block_sizes != dst.block_sizes) {
        throw DataError("ste: sequences are not block-aligned");
    }

    const std::uint64_t M = static_cast<std::uint64_t>(params.alphabet_size());
    std::unordered_map<std::uint64_t, std::uint64_t> joint;     // (x_next, x_now, y_now)
    std::unordered_map<std::uint64_t, std::uint64_t> now_pair;  // (x_now, y_now)
    std::unordered_map<std::uint64_t, std::uint64_t> step_pair; // (x_next, x_now)
    std::vector<std::uint64_t> now_count(M, 0);

    std::uint64_t total = 0;
    std::size_t offset = 0;
    for (const int block : src.block_sizes) {
        for (int i = 0; i + params.t < block; ++i) {
            const auto x_now = static_cast<std::uint64_t>(dst.symbols[offset + static_cast<std::size_t>(i)]);
            const auto x_next =
                static_cast<std::uint64_t>(dst.symbols[offset + static_cast<std::size_t>(i + params.t)]);
            const auto y_now = static_cast<std::uint64_t>(src.symbols[offset + static_cast<std::size_t>(i)]);
            ++joint[(x_next * M + x_now) * M + y_now];
            ++now_pair[x_now * M + y_now];
            ++step_pair[x_next * M + x_now];
            ++now_count[x_now];
            ++total;
        }
        offset += static_cast<std::size_t>(block);
    }
    if (total == 0) throw DataError("ste: no admissible symbol triples");

    // fixed summation order keeps parallel and serial runs bit-identical
    std::vector<std::pair<std::uint64_t, std::uint64_t>> triples(joint.begin(), joint.end());
    std::sort(triples.begin(), triples.end());

    double sum = 0.0;
    for (const auto& [key, count] : triples) {
        const std::uint64_t y_now = key % M;
        const std::uint64_t x_now = (key / M) % M;
        const std::uint64_t x_next = key / (M * M);
        const double c_xy = static_cast<double>(now_pair.at(x_now * M + y_now));
        const double c_xx = static_cast<double>(step_pair.at(x_next * M + x_now));
        const double c_x = static_cast<double>(now_count[x_now]);
        const double ratio = (static_cast<double>(count) * c_x) / (c_xy * c_xx);
        sum += (static_cast<double>(count) / static_cast<double>(total)) * std::log2(ratio);
    }
    return sum > 0.0 ? sum : 0.0;
}

std::vector<double> ste_feature_vector(const EventGroup& group, const SteParams& params) {
    params.validate();
    const std::vector<int> blocks(static_cast<std::size_t>(group.num_blocks()), group.block_length);

    std::array<SymbolSequence, kSensorCount> sequences;
    for (int s = 0; s < kSensorCount; ++s) {
        sequences[static_cast<std::size_t>(s)] =
            symbol_sequence(group.sequences[static_cast<std::size_t>(s)], blocks, params);
    }

    std::vector<double> features(kSteFeatureCount, 0.0);
    for (int src = 0; src < kSensorCount; ++src) {
        for (int dst = 0; dst < kSensorCount; ++dst) {
            features[static_cast<std::size_t>(src * kSensorCount + dst)] =
                ste(sequences[static_cast<std::size_t>(src)], sequences[static_cast<std::size_t>(dst)],
                    params);
        }
    }
    return features;
}

}  // namespace stec
