#include "stec/selection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "stec/error.hpp"
#include "stec/evaluate.hpp"
#include "stec/rng.hpp"
#include "stratify.hpp"

namespace stec {

using detail::has_both_classes;
using detail::stratified_partition;

namespace {

std::vector<std::int8_t> label_column(const Dataset& data, std::span<const std::size_t> rows) {
    std::vector<std::int8_t> labels;
    labels.reserve(rows.size());
    for (const auto r : rows) {
        labels.push_back(data.samples[r].label == SkillLabel::Professional ? 1 : 0);
    }
    return labels;
}

struct RankTally {
    int count = 0;
    long rank_sum = 0;
    int rank_n = 0;

    double mean_rank() const {
        return rank_n ? static_cast<double>(rank_sum) / rank_n
                      : std::numeric_limits<double>::infinity();
    }
};

// highest frequency first; ties by better (lower) mean mRMR rank, then index
std::vector<int> top_by_frequency(const std::map<int, RankTally>& tally, int take) {
    std::vector<int> features;
    features.reserve(tally.size());
    for (const auto& [f, _] : tally) features.push_back(f);
    std::stable_sort(features.begin(), features.end(), [&](int a, int b) {
        const auto& ta = tally.at(a);
        const auto& tb = tally.at(b);
        if (ta.count != tb.count) return ta.count > tb.count;
        if (ta.mean_rank() != tb.mean_rank()) return ta.mean_rank() < tb.mean_rank();
        return a < b;
    });
    if (static_cast<int>(features.size()) > take) features.resize(static_cast<std::size_t>(take));
    return features;
}

}  // namespace

void CnCvParams::validate(int num_features) const {
    if (k_train < 2) throw ConfigError("cncv: k_train must be >= 2");
    if (l < 2) throw ConfigError("cncv: l must be >= 2");
    if (n_r < 1 || n_i < n_r || n_i > num_features) {
        throw ConfigError("cncv: need 1 <= n_r <= n_i <= feature count");
    }
}

std::vector<std::int8_t> discretize(std::span<const double> column) {
    if (column.empty()) throw DataError("discretize: empty column");
    const double n = static_cast<double>(column.size());
    double mu = 0.0;
    for (const double x : column) mu += x;
    mu /= n;
    double var = 0.0;
    for (const double x : column) var += (x - mu) * (x - mu);
    const double sigma = std::sqrt(var / n);

    std::vector<std::int8_t> labels(column.size(), 0);
    for (std::size_t i = 0; i < column.size(); ++i) {
        if (column[i] < mu - sigma) labels[i] = -1;
        else if (column[i] > mu + sigma) labels[i] = 1;
    }
    return labels;
}

double mutual_information(std::span<const std::int8_t> a, std::span<const std::int8_t> b) {
    if (a.size() != b.size()) throw DataError("mutual_information: length mismatch");
    if (a.empty()) throw DataError("mutual_information: empty input");

    // alphabet is {-1, 0, +1}; shift to [0, 3)
    double joint[3][3] = {};
    double pa[3] = {}, pb[3] = {};
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int ia = a[i] + 1;
        const int ib = b[i] + 1;
        joint[ia][ib] += 1.0;
        pa[ia] += 1.0;
        pb[ib] += 1.0;
    }
    double mi = 0.0;
    for (int ia = 0; ia < 3; ++ia) {
        for (int ib = 0; ib < 3; ++ib) {
            if (joint[ia][ib] == 0.0) continue;
            const double pxy = joint[ia][ib] / n;
            mi += pxy * std::log2(pxy * n * n / (pa[ia] * pb[ib]));
        }
    }
    return mi > 0.0 ? mi : 0.0;
}

FeatureRanking mrmr_rank(const Dataset& data, std::span<const std::size_t> rows,
                         std::span<const int> features, int k) {
    FeatureRanking ranking;
    if (k == 0) return ranking;
    if (k < 0 || k > static_cast<int>(features.size())) {
        throw ConfigError("mrmr_rank: k out of range");
    }
    if (rows.empty()) throw DataError("mrmr_rank: no samples");
    if (!has_both_classes(data, rows)) throw DataError("mrmr_rank: need both classes present");

    const std::size_t nf = features.size();
    std::vector<std::vector<std::int8_t>> columns(nf);
    std::vector<double> column_values(rows.size());
    for (std::size_t j = 0; j < nf; ++j) {
        const int f = features[j];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            column_values[i] = data.samples[rows[i]].features[static_cast<std::size_t>(f)];
        }
        columns[j] = discretize(column_values);
    }
    const auto labels = label_column(data, rows);

    std::vector<double> relevance(nf);
    for (std::size_t j = 0; j < nf; ++j) relevance[j] = mutual_information(columns[j], labels);

    std::vector<char> picked(nf, 0);
    std::vector<double> redundancy(nf, 0.0);
    for (int step = 0; step < k; ++step) {
        int best = -1;
        double best_score = 0.0;
        for (std::size_t j = 0; j < nf; ++j) {
            if (picked[j]) continue;
            const double score =
                step == 0 ? relevance[j] : relevance[j] - redundancy[j] / static_cast<double>(step);
            if (best < 0 || score > best_score) {
                best = static_cast<int>(j);
                best_score = score;
            }
        }
        picked[static_cast<std::size_t>(best)] = 1;
        ranking.indices.push_back(features[static_cast<std::size_t>(best)]);
        ranking.scores.push_back(best_score);
        for (std::size_t j = 0; j < nf; ++j) {
            if (!picked[j]) {
                redundancy[j] += mutual_information(columns[j], columns[static_cast<std::size_t>(best)]);
            }
        }
    }
    return ranking;
}

ConsensusResult cncv_select(const Dataset& data, std::span<const std::size_t> rows,
                            const CnCvParams& params) {
    const int nf = static_cast<int>(data.num_features());
    params.validate(nf);
    if (!has_both_classes(data, rows)) throw DataError("cncv_select: need both classes present");

    std::vector<int> all_features(static_cast<std::size_t>(nf));
    std::iota(all_features.begin(), all_features.end(), 0);

    auto outer_rng = make_rng(params.seed, 0xcc01);
    const auto outer_folds = stratified_partition(data, rows, params.k_train, outer_rng);

    ConsensusResult result;
    std::map<int, RankTally> outer_tally;      // Step 7 frequencies
    std::map<int, RankTally> inner_rank_pool;  // mean mRMR rank across every inner fold

    for (int o = 0; o < params.k_train; ++o) {
        std::vector<std::size_t> merged;  // the outer training fold K_oi
        for (int j = 0; j < params.k_train; ++j) {
            if (j != o) merged.insert(merged.end(), outer_folds[static_cast<std::size_t>(j)].begin(),
                                      outer_folds[static_cast<std::size_t>(j)].end());
        }
        auto inner_rng = make_rng(params.seed, 0xcc02, static_cast<std::uint64_t>(o));
        const auto inner_folds = stratified_partition(data, merged, params.l, inner_rng);

        std::map<int, RankTally> inner_tally;
        for (const auto& fold : inner_folds) {
            if (fold.size() < 2 || !has_both_classes(data, fold)) {
                throw DataError("cncv_select: inner fold too small to rank");
            }
            const auto ranking = mrmr_rank(data, fold, all_features, params.n_i);
            for (std::size_t pos = 0; pos < ranking.indices.size(); ++pos) {
                for (auto* tally : {&inner_tally, &inner_rank_pool}) {
                    auto& entry = (*tally)[ranking.indices[pos]];
                    ++entry.count;
                    entry.rank_sum += static_cast<long>(pos);
                    ++entry.rank_n;
                }
            }
        }

        auto selected = top_by_frequency(inner_tally, params.n_i);
        for (const int f : selected) ++outer_tally[f].count;
        result.per_outer_fold.push_back(std::move(selected));
    }

    // Step 7 tie-break reuses the pooled inner-fold mRMR ranks
    for (auto& [f, tally] : outer_tally) {
        const auto& pooled = inner_rank_pool[f];
        tally.rank_sum = pooled.rank_sum;
        tally.rank_n = pooled.rank_n;
    }
    result.consensus = top_by_frequency(outer_tally, params.n_r);
    for (const auto& [f, tally] : outer_tally) result.frequency[f] = tally.count;
    return result;
}

std::set<int> consensus_intersection(const std::vector<std::set<int>>& sets) {
    if (sets.empty()) throw DataError("consensus_intersection: need at least one set");
    std::set<int> out = sets.front();
    for (std::size_t i = 1; i < sets.size(); ++i) {
        std::set<int> next;
        std::set_intersection(out.begin(), out.end(), sets[i].begin(), sets[i].end(),
                              std::inserter(next, next.begin()));
        out = std::move(next);
    }
    return out;
}

std::uint64_t fold_selection_seed(std::uint64_t seed, int fold) {
    return seed_stream(seed, 0xcc, static_cast<std::uint64_t>(fold));
}

DistinguishResult rank_distinguishing_features(const Dataset& data, RankMode mode,
                                               const CnCvParams& params, int k_all,
                                               std::uint64_t fold_seed) {
    DistinguishResult result;
    std::vector<std::size_t> all_rows(data.samples.size());
    std::iota(all_rows.begin(), all_rows.end(), 0);

    if (mode == RankMode::WholeDataset) {
        const auto consensus = cncv_select(data, all_rows, params);
        std::vector<int> subset = consensus.consensus;
        std::sort(subset.begin(), subset.end());
        result.ranking = mrmr_rank(data, all_rows, subset, static_cast<int>(subset.size()));
        result.per_iteration_sets.push_back(std::set<int>(subset.begin(), subset.end()));
        result.intersection = result.per_iteration_sets.front();
        result.frequency.insert(consensus.frequency.begin(), consensus.frequency.end());
        return result;
    }

    // CvIntersection: one consensus per evaluation iteration, intersected
    // across all k_all iterations.
    const auto folds = make_folds(data, k_all, FoldScheme::StratifiedRandom, fold_seed);
    for (int f = 0; f < folds.k; ++f) {
        const auto training = folds.rows_not_in(f);
        CnCvParams per_fold = params;
        per_fold.seed = fold_selection_seed(params.seed, f);
        const auto consensus = cncv_select(data, training, per_fold);
        result.per_iteration_sets.emplace_back(consensus.consensus.begin(), consensus.consensus.end());
    }
    result.intersection = consensus_intersection(result.per_iteration_sets);
    for (const auto& s : result.per_iteration_sets) {
        for (const int f : s) ++result.frequency[f];
    }

    if (result.intersection.empty()) {
        // fall back to frequency order across the per-iteration sets
        result.empty_intersection_fallback = true;
        std::vector<int> order;
        for (const auto& [f, _] : result.frequency) order.push_back(f);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (result.frequency[a] != result.frequency[b]) {
                return result.frequency[a] > result.frequency[b];
            }
            return a < b;
        });
        if (static_cast<int>(order.size()) > params.n_r) order.resize(static_cast<std::size_t>(params.n_r));
        result.ranking.indices = order;
        for (const int f : order) result.ranking.scores.push_back(result.frequency[f]);
        return result;
    }

    std::vector<int> subset(result.intersection.begin(), result.intersection.end());
    result.ranking = mrmr_rank(data, all_rows, subset, static_cast<int>(subset.size()));
    return result;
}

}  // namespace stec
