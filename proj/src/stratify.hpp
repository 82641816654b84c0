#pragma once

// Internal helpers shared by the selection and evaluation translation units.

#include <array>
#include <span>
#include <vector>

#include "stec/dataset.hpp"
#include "stec/rng.hpp"

namespace stec::detail {

inline bool has_both_classes(const Dataset& data, std::span<const std::size_t> rows) {
    bool a = false, p = false;
    for (const auto r : rows) {
        (data.samples[r].label == SkillLabel::Professional ? p : a) = true;
        if (a && p) return true;
    }
    return false;
}

// Per class: shuffle, then deal round-robin starting at a rotating offset so
// per-class counts and fold totals both differ by at most one across folds.
inline std::vector<std::vector<std::size_t>> stratified_partition(const Dataset& data,
                                                                  std::span<const std::size_t> rows,
                                                                  int k, std::mt19937_64& rng) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (const auto r : rows) {
        by_class[data.samples[r].label == SkillLabel::Professional ? 1 : 0].push_back(r);
    }
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    std::size_t offset = 0;
    for (auto& members : by_class) {
        deterministic_shuffle(members, rng);
        for (std::size_t i = 0; i < members.size(); ++i) {
            folds[(offset + i) % static_cast<std::size_t>(k)].push_back(members[i]);
        }
        offset = (offset + members.size()) % static_cast<std::size_t>(k);
    }
    return folds;
}

}  // namespace stec::detail
