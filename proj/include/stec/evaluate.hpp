#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stec/classify.hpp"
#include "stec/selection.hpp"

namespace stec {

enum class FoldScheme { StratifiedRandom, LeaveOneSubjectOut };

struct FoldAssignment {
    int k = 0;
    FoldScheme scheme = FoldScheme::StratifiedRandom;
    std::uint64_t seed = 0;
    std::vector<int> fold_of;              // sample index -> fold id
    std::vector<std::string> fold_player;  // LOSO: player per fold

    std::vector<std::size_t> rows_in(int fold) const;
    std::vector<std::size_t> rows_not_in(int fold) const;
};

FoldAssignment make_folds(const Dataset& data, int k_all, FoldScheme scheme, std::uint64_t seed);

struct ConfusionMatrix {
    long tp = 0, fn = 0, tn = 0, fp = 0;  // positive class = Professional

    long total() const { return tp + fn + tn + fp; }
    double accuracy() const { return total() ? double(tp + tn) / double(total()) : 0.0; }
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation across folds
};

struct Metrics {
    MeanStd accuracy, sensitivity, specificity;
    std::vector<ConfusionMatrix> folds;
    std::vector<std::string> warnings;

    double pooled_accuracy() const;
};

/// Aggregate per-fold confusions; folds with no positives (negatives) are
/// excluded from the sensitivity (specificity) mean with a warning.
Metrics compute_metrics(const std::vector<ConfusionMatrix>& folds);

struct FoldArtifacts {
    std::vector<int> selected_features;
    std::string model_json;
    ConfusionMatrix confusion;
};

struct CrossvalResult {
    Metrics metrics;
    std::vector<FoldArtifacts> folds;
};

/// Leakage-safe K-fold evaluation: per fold, consensus selection and the
/// model fit see only the training folds.
CrossvalResult crossval_evaluate(const Dataset& data, ClassifierKind kind,
                                 const ClassifierParams& clf, const CnCvParams& cncv,
                                 const FoldAssignment& folds, int threads = 1);

struct TdTuningResult {
    std::vector<int> td_values;
    std::vector<int> per_fold_best;
    int averaged_td = 0;  // round-half-up mean of per-fold bests
    std::vector<std::vector<double>> validation_accuracy;  // [td][fold]
};

using DatasetForTd = std::function<const Dataset&(int td)>;

int round_half_up(double x);

/// The 8-step window tuning: per evaluation fold, hold the fold out, split
/// the remainder 80/20 (stratified, seeded), select + train on the 80%,
/// score each candidate td on the 20%, take the per-fold argmax (ties to
/// the smaller td), then average across folds and round half-up. Folds are
/// fixed on `reference` and carried to other td datasets by provenance.
TdTuningResult tune_td(const DatasetForTd& dataset_for_td, int td_min, int td_max,
                       const FoldAssignment& folds, const Dataset& reference, ClassifierKind kind,
                       const ClassifierParams& clf, const CnCvParams& cncv, std::uint64_t seed);

struct SweepRow {
    int td = 0;
    EventFilter filter = EventFilter::All;
    std::string classifier;  // "svm" | "rf" | "knn" | "mean"
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
};

using DatasetForTdFilter = std::function<const Dataset&(int td, EventFilter filter)>;

/// Mean CV accuracy for every (td, event filter, classifier) cell plus the
/// all-classifier mean row per (td, filter). With a warnings sink, cells
/// that cannot be evaluated are noted and omitted instead of throwing.
std::vector<SweepRow> td_sweep(const DatasetForTdFilter& dataset_for, int td_min, int td_max,
                               const std::vector<EventFilter>& filters,
                               const std::vector<ClassifierKind>& kinds, const ClassifierParams& clf,
                               const CnCvParams& cncv, int k_all, std::uint64_t seed, int threads = 1,
                               std::vector<std::string>* warnings = nullptr);

struct PcaResult {
    std::vector<std::array<double, 2>> normalized;  // surviving rows, min-max to [0,1]
    std::vector<std::size_t> kept;                  // original row indices of survivors
    std::vector<std::array<double, 2>> raw_scores;  // all rows, centered projections
    std::array<double, 2> eigenvalues{0.0, 0.0};
    std::vector<std::string> warnings;
};

/// Project rows onto the two leading principal components (power iteration
/// with deflation, residual 1e-10), drop |score| > 3 sigma outliers, and
/// min-max normalize both components. Each eigenvector's largest-magnitude
/// entry is made positive.
PcaResult pca_project(const std::vector<std::vector<double>>& rows);

}  // namespace stec
