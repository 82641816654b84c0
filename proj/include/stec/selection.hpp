#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "stec/dataset.hpp"

namespace stec {

/// Consensus nested cross-validation geometry.
struct CnCvParams {
    int k_train = 5;  // outer folds of the training data
    int l = 5;        // inner folds per outer training fold
    int n_i = 20;     // mRMR picks per inner fold
    int n_r = 8;      // final consensus size
    std::uint64_t seed = 0;

    void validate(int num_features) const;
};

/// Three-level discretization: -1 below mu - sigma, +1 above mu + sigma,
/// else 0 (mu, sigma computed on the column itself; population sigma).
std::vector<std::int8_t> discretize(std::span<const double> column);

/// Plug-in mutual information in bits between two small-alphabet columns.
double mutual_information(std::span<const std::int8_t> a, std::span<const std::int8_t> b);

struct FeatureRanking {
    std::vector<int> indices;     // selection order (greedy), not score-sorted
    std::vector<double> scores;   // MID score at selection time
};

/// Greedy mRMR with the MID criterion: first pick maximizes I(f; label),
/// each next pick maximizes I(f; label) - mean_{s in S} I(f; s) over the
/// discretized columns. Ties break to the lower feature index.
FeatureRanking mrmr_rank(const Dataset& data, std::span<const std::size_t> rows,
                         std::span<const int> features, int k);

struct ConsensusResult {
    std::vector<std::vector<int>> per_outer_fold;  // selected set per outer fold
    std::vector<int> consensus;                    // N_r features, selection order
    std::map<int, int> frequency;                  // feature -> outer-fold count
};

/// The 7-step consensus selection: split the given rows into k_train
/// outer folds, re-split each outer training fold into l inner folds, run
/// mRMR top-n_i on every inner fold, keep the n_i most frequent per outer
/// fold, and return the n_r most frequent across outer folds. Frequency
/// ties break by better mean mRMR rank, then lower index.
ConsensusResult cncv_select(const Dataset& data, std::span<const std::size_t> rows,
                            const CnCvParams& params);

std::set<int> consensus_intersection(const std::vector<std::set<int>>& sets);

enum class RankMode { WholeDataset, CvIntersection };

struct DistinguishResult {
    FeatureRanking ranking;
    std::vector<std::set<int>> per_iteration_sets;  // CvIntersection: one per CV iteration
    std::set<int> intersection;
    std::map<int, int> frequency;                   // feature -> appearances across sets
    bool empty_intersection_fallback = false;
};

/// Seed used for fold f's selection inside a K_all-fold evaluation; shared
/// by crossval_evaluate so CvIntersection reuses identical per-fold sets.
std::uint64_t fold_selection_seed(std::uint64_t seed, int fold);

/// WholeDataset: consensus over all samples, then mRMR-rank the consensus.
/// CvIntersection: per-evaluation-fold consensus sets (same folds as the
/// evaluation module for (k_all, fold_seed)) intersected across all
/// iterations, then mRMR-ranked; an empty intersection falls back to
/// frequency order with a warning flag.
DistinguishResult rank_distinguishing_features(const Dataset& data, RankMode mode,
                                               const CnCvParams& params, int k_all,
                                               std::uint64_t fold_seed);

}  // namespace stec
