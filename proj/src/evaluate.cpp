#include "stec/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "stec/error.hpp"
#include "stec/parallel.hpp"
#include "stec/rng.hpp"
#include "stratify.hpp"

namespace stec {

std::vector<std::size_t> FoldAssignment::rows_in(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] == fold) rows.push_back(i);
    }
    return rows;
}

std::vector<std::size_t> FoldAssignment::rows_not_in(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] != fold) rows.push_back(i);
    }
    return rows;
}

FoldAssignment make_folds(const Dataset& data, int k_all, FoldScheme scheme, std::uint64_t seed) {
    const std::size_t n = data.samples.size();
    FoldAssignment assignment;
    assignment.scheme = scheme;
    assignment.seed = seed;
    assignment.fold_of.assign(n, -1);

    if (scheme == FoldScheme::StratifiedRandom) {
        if (k_all < 2) throw ConfigError("make_folds: k_all must be >= 2");
        if (static_cast<std::size_t>(k_all) > n) throw DataError("make_folds: k_all exceeds sample count");
        assignment.k = k_all;
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        auto rng = make_rng(seed, 0xf01d);
        const auto folds = detail::stratified_partition(data, rows, k_all, rng);
        for (int f = 0; f < k_all; ++f) {
            for (const auto r : folds[static_cast<std::size_t>(f)]) assignment.fold_of[r] = f;
        }
        return assignment;
    }

    // LOSO: one fold per distinct player, in sorted player order
    std::set<std::string> players;
    for (const auto& s : data.samples) players.insert(s.prov.player_id);
    if (players.size() < 2) throw DataError("make_folds: LOSO needs at least 2 distinct players");
    assignment.k = static_cast<int>(players.size());
    assignment.fold_player.assign(players.begin(), players.end());
    std::map<std::string, int> fold_by_player;
    for (int f = 0; f < assignment.k; ++f) fold_by_player[assignment.fold_player[static_cast<std::size_t>(f)]] = f;
    for (std::size_t i = 0; i < n; ++i) {
        assignment.fold_of[i] = fold_by_player.at(data.samples[i].prov.player_id);
    }
    return assignment;
}

double Metrics::pooled_accuracy() const {
    ConfusionMatrix pooled;
    for (const auto& c : folds) {
        pooled.tp += c.tp;
        pooled.fn += c.fn;
        pooled.tn += c.tn;
        pooled.fp += c.fp;
    }
    return pooled.accuracy();
}

namespace {

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return out;
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

}  // namespace

Metrics compute_metrics(const std::vector<ConfusionMatrix>& folds) {
    if (folds.empty()) throw DataError("compute_metrics: no folds");
    Metrics metrics;
    metrics.folds = folds;

    std::vector<double> acc, sens, spec;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& c = folds[f];
        if (c.tp < 0 || c.fn < 0 || c.tn < 0 || c.fp < 0 || c.total() == 0) {
            throw DataError("compute_metrics: invalid confusion matrix");
        }
        acc.push_back(c.accuracy());
        if (c.tp + c.fn > 0) {
            sens.push_back(static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn));
        } else {
            metrics.warnings.push_back("fold " + std::to_string(f) +
                                       " has no positives; excluded from sensitivity");
        }
        if (c.tn + c.fp > 0) {
            spec.push_back(static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp));
        } else {
            metrics.warnings.push_back("fold " + std::to_string(f) +
                                       " has no negatives; excluded from specificity");
        }
    }
    metrics.accuracy = mean_std(acc);
    metrics.sensitivity = mean_std(sens);
    metrics.specificity = mean_std(spec);
    return metrics;
}

CrossvalResult crossval_evaluate(const Dataset& data, ClassifierKind kind,
                                 const ClassifierParams& clf, const CnCvParams& cncv,
                                 const FoldAssignment& folds, int threads) {
    CrossvalResult result;
    result.folds.resize(static_cast<std::size_t>(folds.k));

    parallel_for(static_cast<std::size_t>(folds.k), threads, [&](std::size_t f) {
        const int fold = static_cast<int>(f);
        const auto train = folds.rows_not_in(fold);
        const auto test = folds.rows_in(fold);
        if (!detail::has_both_classes(data, train)) {
            throw DataError("crossval: training split for fold " + std::to_string(fold) +
                            " lacks a class");
        }

        CnCvParams fold_cncv = cncv;
        fold_cncv.seed = fold_selection_seed(cncv.seed, fold);
        const auto consensus = cncv_select(data, train, fold_cncv);
        std::vector<int> selected = consensus.consensus;
        std::sort(selected.begin(), selected.end());

        const auto model = TrainedModel::fit(kind, data, train, selected, clf,
                                             seed_stream(cncv.seed, 0xf17, static_cast<std::uint64_t>(fold)));

        ConfusionMatrix confusion;
        for (const auto r : test) {
            const auto& sample = data.samples[r];
            const SkillLabel predicted = model.predict(sample.features);
            const bool actual_pos = sample.label == SkillLabel::Professional;
            const bool predicted_pos = predicted == SkillLabel::Professional;
            if (actual_pos && predicted_pos) ++confusion.tp;
            else if (actual_pos) ++confusion.fn;
            else if (predicted_pos) ++confusion.fp;
            else ++confusion.tn;
        }

        auto& artifacts = result.folds[f];
        artifacts.selected_features = selected;
        artifacts.model_json = model.to_json();
        artifacts.confusion = confusion;
    });

    std::vector<ConfusionMatrix> confusions;
    confusions.reserve(result.folds.size());
    for (const auto& f : result.folds) confusions.push_back(f.confusion);
    result.metrics = compute_metrics(confusions);
    return result;
}

int round_half_up(double x) {
    return static_cast<int>(std::floor(x + 0.5));
}

namespace {

// deterministic stratified 80/20 split over `rows` (dataset order)
void split_80_20(const Dataset& data, const std::vector<std::size_t>& rows, std::mt19937_64&& rng,
                 std::vector<std::size_t>& train, std::vector<std::size_t>& val) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (const auto r : rows) {
        by_class[data.samples[r].label == SkillLabel::Professional ? 1 : 0].push_back(r);
    }
    for (auto& members : by_class) {
        if (members.size() < 2) throw DataError("tune_td: class too small for an 80/20 split");
        deterministic_shuffle(members, rng);
        const std::size_t n_val =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.2 * double(members.size()))));
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < n_val ? val : train).push_back(members[i]);
        }
    }
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
}

}  // namespace

TdTuningResult tune_td(const DatasetForTd& dataset_for_td, int td_min, int td_max,
                       const FoldAssignment& folds, const Dataset& reference, ClassifierKind kind,
                       const ClassifierParams& clf, const CnCvParams& cncv, std::uint64_t seed) {
    if (td_min < 1 || td_max < td_min) throw ConfigError("tune_td: bad td range");

    TdTuningResult result;
    for (int td = td_min; td <= td_max; ++td) result.td_values.push_back(td);
    result.validation_accuracy.assign(result.td_values.size(),
                                      std::vector<double>(static_cast<std::size_t>(folds.k), 0.0));

    for (int fold = 0; fold < folds.k; ++fold) {
        // provenance keys of the merged remainder on the reference dataset
        std::set<Provenance> remainder;
        for (std::size_t i = 0; i < reference.samples.size(); ++i) {
            if (folds.fold_of[i] != fold) remainder.insert(reference.samples[i].prov);
        }

        int best_td = td_min;
        double best_acc = -1.0;
        for (std::size_t ti = 0; ti < result.td_values.size(); ++ti) {
            const int td = result.td_values[ti];
            const Dataset& dataset = dataset_for_td(td);

            std::vector<std::size_t> available;
            for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
                if (remainder.count(dataset.samples[i].prov)) available.push_back(i);
            }

            std::vector<std::size_t> train, val;
            split_80_20(dataset, available, make_rng(seed, 0x1dd, static_cast<std::uint64_t>(fold)),
                        train, val);

            CnCvParams tune_cncv = cncv;
            tune_cncv.seed = seed_stream(seed, 0x1dd1, static_cast<std::uint64_t>(fold) * 64 +
                                                           static_cast<std::uint64_t>(td));
            const auto consensus = cncv_select(dataset, train, tune_cncv);
            std::vector<int> selected = consensus.consensus;
            std::sort(selected.begin(), selected.end());

            const auto model =
                TrainedModel::fit(kind, dataset, train, selected, clf,
                                  seed_stream(seed, 0x1dd2, static_cast<std::uint64_t>(fold) * 64 +
                                                                static_cast<std::uint64_t>(td)));
            std::size_t correct = 0;
            for (const auto r : val) {
                if (model.predict(dataset.samples[r].features) == dataset.samples[r].label) ++correct;
            }
            const double acc = static_cast<double>(correct) / static_cast<double>(val.size());
            result.validation_accuracy[ti][static_cast<std::size_t>(fold)] = acc;
            if (acc > best_acc) {  // ties keep the smaller td
                best_acc = acc;
                best_td = td;
            }
        }
        result.per_fold_best.push_back(best_td);
    }

    const double mean_td =
        std::accumulate(result.per_fold_best.begin(), result.per_fold_best.end(), 0.0) /
        static_cast<double>(result.per_fold_best.size());
    result.averaged_td = std::clamp(round_half_up(mean_td), td_min, td_max);
    return result;
}

std::vector<SweepRow> td_sweep(const DatasetForTdFilter& dataset_for, int td_min, int td_max,
                               const std::vector<EventFilter>& filters,
                               const std::vector<ClassifierKind>& kinds, const ClassifierParams& clf,
                               const CnCvParams& cncv, int k_all, std::uint64_t seed, int threads,
                               std::vector<std::string>* warnings) {
    std::vector<SweepRow> rows;
    for (int td = td_min; td <= td_max; ++td) {
        for (const auto filter : filters) {
            std::vector<double> means;
            const std::size_t checkpoint = rows.size();
            try {
                const Dataset& dataset = dataset_for(td, filter);
                const auto folds = make_folds(dataset, k_all, FoldScheme::StratifiedRandom, seed);
                for (const auto kind : kinds) {
                    const auto cv = crossval_evaluate(dataset, kind, clf, cncv, folds, threads);
                    rows.push_back({td, filter, std::string(to_string(kind)),
                                    cv.metrics.accuracy.mean, cv.metrics.accuracy.std});
                    means.push_back(cv.metrics.accuracy.mean);
                }
            } catch (const Error& e) {
                if (!warnings) throw;
                warnings->push_back("sweep cell (td=" + std::to_string(td) + ", " +
                                    std::string(to_string(filter)) + ") skipped: " + e.what());
                rows.resize(checkpoint);
                continue;
            }
            const auto agg = mean_std(means);
            rows.push_back({td, filter, "mean", agg.mean, agg.std});
        }
    }
    return rows;
}

// --- PCA ----------------------------------------------------------------

namespace {

// power iteration on a dense symmetric matrix
bool dominant_eigenpair(const std::vector<double>& matrix, std::size_t dim, std::uint64_t seed,
                        std::vector<double>& vec, double& value) {
    auto rng = make_rng(seed, 0xe16);
    vec.assign(dim, 0.0);
    for (auto& v : vec) v = (static_cast<double>(rng() >> 11) / 9007199254740992.0) - 0.5;
    double norm = std::sqrt(std::inner_product(vec.begin(), vec.end(), vec.begin(), 0.0));
    for (auto& v : vec) v /= norm;

    std::vector<double> next(dim, 0.0);
    value = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        for (std::size_t i = 0; i < dim; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < dim; ++j) acc += matrix[i * dim + j] * vec[j];
            next[i] = acc;
        }
        value = std::inner_product(vec.begin(), vec.end(), next.begin(), 0.0);  // Rayleigh quotient
        double residual = 0.0;
        for (std::size_t i = 0; i < dim; ++i) residual = std::max(residual, std::abs(next[i] - value * vec[i]));

        norm = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
        if (norm <= 0.0) return false;  // vector annihilated: remaining spectrum is zero
        for (std::size_t i = 0; i < dim; ++i) vec[i] = next[i] / norm;
        if (residual <= 1e-10 * std::max(1.0, std::abs(value))) return true;
    }
    return true;  // converged as far as the iteration cap allows
}

void fix_sign(std::vector<double>& vec) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < vec.size(); ++i) {
        if (std::abs(vec[i]) > std::abs(vec[arg])) arg = i;
    }
    if (vec[arg] < 0.0) {
        for (auto& v : vec) v = -v;
    }
}

}  // namespace

PcaResult pca_project(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    if (n < 3) throw DataError("pca_project: need at least 3 samples");
    const std::size_t dim = rows[0].size();
    if (dim < 2) throw DataError("pca_project: need at least 2 features");
    for (const auto& row : rows) {
        if (row.size() != dim) throw DataError("pca_project: ragged feature matrix");
    }

    PcaResult result;

    std::vector<double> mean(dim, 0.0);
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
    }
    for (auto& m : mean) m /= static_cast<double>(n);

    std::vector<double> centered(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) centered[i * dim + j] = rows[i][j] - mean[j];
    }

    std::vector<double> cov(dim * dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < dim; ++a) {
            const double va = centered[i * dim + a];
            if (va == 0.0) continue;
            for (std::size_t b = a; b < dim; ++b) cov[a * dim + b] += va * centered[i * dim + b];
        }
    }
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = a; b < dim; ++b) {
            cov[a * dim + b] /= static_cast<double>(n - 1);
            cov[b * dim + a] = cov[a * dim + b];
        }
    }

    std::vector<double> pc1, pc2;
    double lambda1 = 0.0, lambda2 = 0.0;
    const bool ok1 = dominant_eigenpair(cov, dim, 1, pc1, lambda1);
    if (!ok1 || lambda1 <= 0.0) {
        throw DataError("pca_project: covariance has no positive spectrum");
    }
    fix_sign(pc1);

    // deflate and repeat for the second component
    std::vector<double> deflated = cov;
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = 0; b < dim; ++b) deflated[a * dim + b] -= lambda1 * pc1[a] * pc1[b];
    }
    const bool ok2 = dominant_eigenpair(deflated, dim, 2, pc2, lambda2);
    const bool rank_deficient = !ok2 || lambda2 <= 1e-12 * lambda1;
    if (rank_deficient) {
        result.warnings.push_back("covariance is rank deficient; second component set to zero");
        pc2.assign(dim, 0.0);
        lambda2 = 0.0;
    } else {
        fix_sign(pc2);
    }
    result.eigenvalues = {lambda1, lambda2};

    result.raw_scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            s1 += centered[i * dim + j] * pc1[j];
            s2 += centered[i * dim + j] * pc2[j];
        }
        result.raw_scores[i] = {s1, s2};
    }

    // drop |score| > 3 sigma on either component (scores are zero-mean)
    std::array<double, 2> sigma{0.0, 0.0};
    for (const auto& s : result.raw_scores) {
        sigma[0] += s[0] * s[0];
        sigma[1] += s[1] * s[1];
    }
    sigma[0] = std::sqrt(sigma[0] / static_cast<double>(n));
    sigma[1] = std::sqrt(sigma[1] / static_cast<double>(n));

    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = result.raw_scores[i];
        const bool out1 = sigma[0] > 0.0 && std::abs(s[0]) > 3.0 * sigma[0];
        const bool out2 = sigma[1] > 0.0 && std::abs(s[1]) > 3.0 * sigma[1];
        if (!out1 && !out2) result.kept.push_back(i);
    }

    std::array<double, 2> lo{0.0, 0.0}, hi{0.0, 0.0};
    for (int c = 0; c < 2; ++c) {
        lo[static_cast<std::size_t>(c)] = std::numeric_limits<double>::infinity();
        hi[static_cast<std::size_t>(c)] = -std::numeric_limits<double>::infinity();
    }
    for (const auto i : result.kept) {
        for (std::size_t c = 0; c < 2; ++c) {
            lo[c] = std::min(lo[c], result.raw_scores[i][c]);
            hi[c] = std::max(hi[c], result.raw_scores[i][c]);
        }
    }
    for (const auto i : result.kept) {
        std::array<double, 2> norm{};
        for (std::size_t c = 0; c < 2; ++c) {
            const double range = hi[c] - lo[c];
            // a degenerate component (rank-deficient PC2) stays at zero
            norm[c] = range > 0.0 ? (result.raw_scores[i][c] - lo[c]) / range : 0.0;
        }
        result.normalized.push_back(norm);
    }
    return result;
}

}  // namespace stec
