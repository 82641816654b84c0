#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "stec/error.hpp"
#include "stec/rng.hpp"
#include "stec/selection.hpp"

using namespace stec;

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) / 9007199254740992.0;
}

double gaussian(std::mt19937_64& rng) {
    // Box-Muller, deterministic across platforms
    const double u1 = std::max(uniform01(rng), 1e-12);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    Dataset d;
    d.feature_names.resize(rows[0].size());
    for (std::size_t j = 0; j < d.feature_names.size(); ++j) {
        d.feature_names[j] = "f" + std::to_string(j);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        LabeledSample s;
        s.features = rows[i];
        s.label = labels[i] ? SkillLabel::Professional : SkillLabel::Amateur;
        s.prov = {"p" + std::to_string(i), "m", 0};
        d.samples.push_back(std::move(s));
    }
    return d;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
    std::vector<std::size_t> rows(d.samples.size());
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

// Independent greedy oracle over discretized columns; mirrors the MID
// definition directly (relevance minus mean redundancy, accumulated in
// selection order), ties to the lower feature index.
std::vector<int> oracle_mrmr(const std::vector<std::vector<std::int8_t>>& columns,
                             const std::vector<std::int8_t>& labels, int k) {
    const int nf = static_cast<int>(columns.size());
    std::vector<int> selected;
    std::vector<char> used(static_cast<std::size_t>(nf), 0);
    while (static_cast<int>(selected.size()) < k) {
        int best = -1;
        double best_score = 0.0;
        for (int f = 0; f < nf; ++f) {
            if (used[static_cast<std::size_t>(f)]) continue;
            double score = mutual_information(columns[static_cast<std::size_t>(f)], labels);
            if (!selected.empty()) {
                double red = 0.0;
                for (const int s : selected) {
                    red += mutual_information(columns[static_cast<std::size_t>(f)],
                                              columns[static_cast<std::size_t>(s)]);
                }
                score -= red / static_cast<double>(selected.size());
            }
            if (best < 0 || score > best_score) {
                best = f;
                best_score = score;
            }
        }
        used[static_cast<std::size_t>(best)] = 1;
        selected.push_back(best);
    }
    return selected;
}

// synthetic generator used by the CN-CV recovery checks: the first
// `informative` features drive a thresholded-sum label, the rest are noise
Dataset synthetic_dataset(std::mt19937_64& rng, int n_samples, int n_features, int informative,
                          double label_noise) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < n_samples; ++i) {
        std::vector<double> row(static_cast<std::size_t>(n_features));
        for (auto& v : row) v = gaussian(rng);
        double score = 0.0;
        for (int f = 0; f < informative; ++f) score += row[static_cast<std::size_t>(f)];
        score += label_noise * gaussian(rng);
        rows.push_back(std::move(row));
        labels.push_back(score > 0.0 ? 1 : 0);
    }
    return make_dataset(rows, labels);
}

}  // namespace

TEST_CASE("discretize uses mu +- sigma thresholds") {
    const auto constant = discretize(std::vector<double>{7.0, 7.0, 7.0});
    CHECK(constant == std::vector<std::int8_t>{0, 0, 0});

    // mu = 0, population sigma = sqrt(200/3) ~ 8.165
    const auto spread = discretize(std::vector<double>{-10.0, 0.0, 10.0});
    CHECK(spread == std::vector<std::int8_t>{-1, 0, 1});

    // symmetric three-level column keeps its own labels
    const auto ternary = discretize(std::vector<double>{-1, 0, 1, -1, 0, 1});
    CHECK(ternary == std::vector<std::int8_t>{-1, 0, 1, -1, 0, 1});
}

TEST_CASE("mutual_information on canonical cases") {
    const std::vector<std::int8_t> a = {0, 0, 1, 1};
    const std::vector<std::int8_t> b = {0, 1, 0, 1};
    CHECK(mutual_information(a, a) == doctest::Approx(1.0));  // identical binary uniform
    CHECK(mutual_information(a, b) == doctest::Approx(0.0));  // exactly independent

    const std::vector<std::int8_t> constant = {1, 1, 1, 1};
    CHECK(mutual_information(a, constant) == doctest::Approx(0.0));

    CHECK_THROWS_AS(mutual_information(a, std::vector<std::int8_t>{0}), DataError);
}

TEST_CASE("mrmr_rank puts a label-equal feature first") {
    auto rng = make_rng(101);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
        const int label = i % 2;
        std::vector<double> row(6);
        for (auto& v : row) v = gaussian(rng);
        row[3] = (label ? 2.0 : -2.0) + gaussian(rng);  // feature 3 encodes the label
        rows.push_back(row);
        labels.push_back(label);
    }
    const auto data = make_dataset(rows, labels);
    const auto rows_idx = all_rows(data);
    const std::vector<int> features = {0, 1, 2, 3, 4, 5};
    const auto ranking = mrmr_rank(data, rows_idx, features, 6);
    CHECK(ranking.indices[0] == 3);
}

TEST_CASE("mrmr_rank penalizes a duplicate of the first pick") {
    auto rng = make_rng(102);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 400; ++i) {
        const int label = i % 2;
        std::vector<double> row(4);
        const double informative = (label ? 1.6 : -1.6) + 0.6 * gaussian(rng);
        row[0] = informative;
        row[1] = informative;  // exact duplicate of feature 0
        row[2] = (label ? 1.0 : -1.0) + 1.1 * gaussian(rng);  // weaker but independent
        row[3] = gaussian(rng);
        rows.push_back(row);
        labels.push_back(label);
    }
    const auto data = make_dataset(rows, labels);
    const std::vector<int> features = {0, 1, 2, 3};
    const auto ranking = mrmr_rank(data, all_rows(data), features, 4);
    CHECK(ranking.indices[0] == 0);
    CHECK(ranking.indices[1] == 2);  // duplicate deferred below the independent feature
}

TEST_CASE("mrmr_rank boundary and degenerate cases") {
    const auto data = make_dataset({{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}, {0, 1, 0, 1});
    const std::vector<int> features = {0, 1};
    CHECK(mrmr_rank(data, all_rows(data), features, 0).indices.empty());

    // all-constant features rank by index with zero scores
    const auto ranking = mrmr_rank(data, all_rows(data), features, 2);
    CHECK(ranking.indices == std::vector<int>{0, 1});
    CHECK(ranking.scores[0] == doctest::Approx(0.0));
}

TEST_CASE("mrmr_rank equals the exhaustive greedy oracle") {
    auto rng = make_rng(103);
    for (int trial = 0; trial < 50; ++trial) {
        const int nf = 2 + static_cast<int>(bounded_u64(rng, 7));  // up to 8 features
        const int n = 8 + static_cast<int>(bounded_u64(rng, 57));  // up to 64 samples
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        for (int i = 0; i < n; ++i) {
            std::vector<double> row(static_cast<std::size_t>(nf));
            for (auto& v : row) v = gaussian(rng);
            int label = static_cast<int>(bounded_u64(rng, 2));
            if (i == n - 2) label = 0;  // force both classes
            if (i == n - 1) label = 1;
            if (bounded_u64(rng, 2)) row[0] = label ? 1.0 : -1.0;
            rows.push_back(row);
            labels.push_back(label);
        }
        const auto data = make_dataset(rows, labels);
        std::vector<int> features(static_cast<std::size_t>(nf));
        std::iota(features.begin(), features.end(), 0);
        const auto ranking = mrmr_rank(data, all_rows(data), features, nf);

        std::vector<std::vector<std::int8_t>> columns;
        std::vector<double> column(static_cast<std::size_t>(n));
        for (int f = 0; f < nf; ++f) {
            for (int i = 0; i < n; ++i) {
                column[static_cast<std::size_t>(i)] =
                    rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)];
            }
            columns.push_back(discretize(column));
        }
        std::vector<std::int8_t> label_col;
        for (const int l : labels) label_col.push_back(static_cast<std::int8_t>(l));
        CHECK(ranking.indices == oracle_mrmr(columns, label_col, nf));
    }
}

TEST_CASE("mrmr first pick is always the univariate MI argmax") {
    auto rng = make_rng(104);
    for (int trial = 0; trial < 20; ++trial) {
        const auto data = synthetic_dataset(rng, 60, 6, 2, 0.5);
        std::vector<int> features = {0, 1, 2, 3, 4, 5};
        const auto ranking = mrmr_rank(data, all_rows(data), features, 1);

        std::vector<std::int8_t> labels;
        for (const auto& s : data.samples) {
            labels.push_back(s.label == SkillLabel::Professional ? 1 : 0);
        }
        int best = -1;
        double best_mi = -1.0;
        std::vector<double> column(data.samples.size());
        for (int f = 0; f < 6; ++f) {
            for (std::size_t i = 0; i < data.samples.size(); ++i) {
                column[i] = data.samples[i].features[static_cast<std::size_t>(f)];
            }
            const double mi = mutual_information(discretize(column), labels);
            if (mi > best_mi) {
                best_mi = mi;
                best = f;
            }
        }
        CHECK(ranking.indices[0] == best);
    }
}

TEST_CASE("selection is invariant to positive rescaling of a feature") {
    auto rng = make_rng(105);
    auto data = synthetic_dataset(rng, 80, 10, 3, 0.5);
    CnCvParams params{2, 2, 5, 3, 7};
    const auto before = cncv_select(data, all_rows(data), params);
    for (auto& s : data.samples) s.features[2] *= 1000.0;
    const auto after = cncv_select(data, all_rows(data), params);
    CHECK(before.consensus == after.consensus);
    CHECK(before.per_outer_fold == after.per_outer_fold);
}

TEST_CASE("cncv_select keeps an always-selected feature and is deterministic") {
    auto rng = make_rng(106);
    auto data = synthetic_dataset(rng, 120, 12, 1, 0.05);  // feature 0 dominates
    CnCvParams params{4, 3, 4, 2, 9};
    const auto result = cncv_select(data, all_rows(data), params);
    REQUIRE(result.consensus.size() == 2);
    CHECK(result.consensus[0] == 0);
    CHECK(result.frequency.at(0) == 4);  // present in every outer fold

    const auto again = cncv_select(data, all_rows(data), params);
    CHECK(result.consensus == again.consensus);
    CHECK(result.per_outer_fold == again.per_outer_fold);

    // consensus members always come from some inner-fold selection
    for (const int f : result.consensus) {
        bool appears = false;
        for (const auto& fold : result.per_outer_fold) {
            appears |= std::find(fold.begin(), fold.end(), f) != fold.end();
        }
        CHECK(appears);
    }
}

TEST_CASE("cncv_select with n_r = n_c pads by index order") {
    auto rng = make_rng(107);
    const auto data = synthetic_dataset(rng, 60, 6, 2, 0.3);
    CnCvParams params{2, 2, 6, 6, 3};
    const auto result = cncv_select(data, all_rows(data), params);
    auto sorted = result.consensus;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("cncv_select recovers informative features from noise") {
    int hits = 0;
    for (int seed = 0; seed < 6; ++seed) {
        auto rng = make_rng(static_cast<std::uint64_t>(seed) + 200);
        const auto data = synthetic_dataset(rng, 220, 144, 5, 0.5);
        CnCvParams params{5, 5, 20, 8, static_cast<std::uint64_t>(seed)};
        const auto result = cncv_select(data, all_rows(data), params);
        int informative = 0;
        for (const int f : result.consensus) informative += f < 5;
        hits += informative >= 4;
    }
    CHECK(hits >= 5);
}

TEST_CASE("consensus_intersection is exact set algebra") {
    CHECK(consensus_intersection({{1, 2, 3}, {2, 3, 4}, {2, 3}}) == std::set<int>{2, 3});
    CHECK(consensus_intersection({{5, 6}, {5, 6}}) == std::set<int>{5, 6});
    CHECK(consensus_intersection({{1}, {2}}).empty());
    CHECK_THROWS_AS(consensus_intersection({}), DataError);
}

TEST_CASE("rank_distinguishing_features in both modes") {
    auto rng = make_rng(108);
    const auto data = synthetic_dataset(rng, 150, 20, 3, 0.3);
    CnCvParams params{4, 3, 8, 4, 11};

    const auto whole = rank_distinguishing_features(data, RankMode::WholeDataset, params, 5, 21);
    CHECK(whole.ranking.indices.size() == 4);
    CHECK_FALSE(whole.empty_intersection_fallback);

    const auto cv = rank_distinguishing_features(data, RankMode::CvIntersection, params, 5, 21);
    CHECK(cv.per_iteration_sets.size() == 5);
    for (const int f : cv.ranking.indices) {
        CHECK(cv.intersection.count(f) == 1);
    }
    // intersection is contained in every per-iteration set
    for (const auto& s : cv.per_iteration_sets) {
        for (const int f : cv.intersection) CHECK(s.count(f) == 1);
    }
}

TEST_CASE("disjoint per-fold selections fall back to frequency order") {
    // pure-noise features with a single-feature consensus per iteration make
    // the intersection empty
    auto rng = make_rng(110);
    const auto data = synthetic_dataset(rng, 90, 40, 0, 1.0);
    CnCvParams params{3, 2, 3, 1, 13};
    const auto cv = rank_distinguishing_features(data, RankMode::CvIntersection, params, 5, 31);
    REQUIRE(cv.intersection.empty());
    CHECK(cv.empty_intersection_fallback);
    CHECK(cv.ranking.indices.size() == 1);  // n_r from the frequency fallback
    CHECK(cv.frequency.count(cv.ranking.indices[0]) == 1);
}

TEST_CASE("cncv_select validates its inputs") {
    auto rng = make_rng(109);
    const auto data = synthetic_dataset(rng, 30, 4, 1, 0.1);
    CnCvParams bad{1, 2, 2, 2, 0};
    CHECK_THROWS_AS(cncv_select(data, all_rows(data), bad), ConfigError);
    CnCvParams too_many{2, 2, 5, 2, 0};
    CHECK_THROWS_AS(cncv_select(data, all_rows(data), too_many), ConfigError);

    // single-class rows are rejected
    std::vector<std::size_t> professional_rows;
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        if (data.samples[i].label == SkillLabel::Professional) professional_rows.push_back(i);
    }
    CnCvParams params{2, 2, 2, 2, 0};
    CHECK_THROWS_AS(cncv_select(data, professional_rows, params), DataError);
}
