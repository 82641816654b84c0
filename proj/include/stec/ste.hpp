#pragma once

#include <span>
#include <vector>

#include "stec/windowing.hpp"

namespace stec {

/// Ordinal-pattern embedding parameters: m values taken at spacing d form
/// one symbol; t is the prediction horizon of the transfer-entropy target.
struct SteParams {
    int m = 3;
    int d = 1;
    int t = 1;

    void validate() const;  // 2 <= m <= 7, d >= 1, t >= 1
    int alphabet_size() const;  // m!

    /// Shortest block that admits one full embedding plus the horizon.
    int min_block_length() const { return (m - 1) * d + t + 1; }

    /// Smallest half-window whose 2*td+1 blocks can be symbolized.
    int min_td() const { return (min_block_length()) / 2; }
};

/// Rank pattern of a window: pattern[j] is the 1-based window position of
/// the j-th smallest value; equal values rank by temporal order.
std::vector<int> ordinal_pattern(std::span<const double> window);

/// Ordinal symbols of a block-structured sequence, one per admissible
/// embedding start; windows never straddle block boundaries.
struct SymbolSequence {
    int m = 0;
    int d = 0;
    std::vector<int> symbols;      // pattern codes in [0, m!)
    std::vector<int> block_sizes;  // symbols emitted per block
};

SymbolSequence symbol_sequence(std::span<const double> values, std::span<const int> block_lengths,
                               const SteParams& params);

/// Symbolic transfer entropy from src to dst (bits): the plug-in estimate
/// of sum p(X_{i+t}, X_i, Y_i) * log2(p(X_{i+t}|X_i,Y_i) / p(X_{i+t}|X_i))
/// over all indices whose i and i+t symbols fall in the same block, where
/// X is dst and Y is src. Result lies in [0, log2(m!)].
double ste(const SymbolSequence& src, const SymbolSequence& dst, const SteParams& params);

/// All 144 directed pair values for one event group, row-major with the
/// source sensor as the row; diagonal entries are exactly zero.
std::vector<double> ste_feature_vector(const EventGroup& group, const SteParams& params);

}  // namespace stec
