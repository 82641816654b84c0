#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stec/dataset.hpp"

namespace stec {

enum class ClassifierKind { Svm, Rf, Knn };

std::string_view to_string(ClassifierKind kind);
std::optional<ClassifierKind> parse_classifier_kind(std::string_view text);

struct ClassifierParams {
    int knn_k = 5;
    int rf_trees = 100;
    int rf_max_depth = 0;     // 0 = unlimited
    double svm_c = 1.0;
    double svm_gamma = 0.0;   // 0 = auto: 1 / (n_features * mean feature variance)
    double svm_tol = 1e-3;

    void validate() const;
};

/// Per-column z-scoring fitted on training data; sigma = 0 columns pass
/// through unchanged.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const std::vector<std::vector<double>>& rows);
    std::vector<double> apply(std::span<const double> row) const;
};

/// One of SVM / RF / KNN behind a single train/predict surface. Predict
/// uses only parameters computed from training samples (standardization
/// included). Ties always resolve to Professional.
class TrainedModel {
public:
    static TrainedModel fit(ClassifierKind kind, const Dataset& data,
                            std::span<const std::size_t> rows, std::span<const int> features,
                            const ClassifierParams& params, std::uint64_t seed);

    SkillLabel predict(std::span<const double> full_features) const;

    ClassifierKind kind() const { return kind_; }
    const std::vector<int>& features() const { return features_; }

    std::string to_json() const;
    static TrainedModel from_json(const std::string& text);

private:
    ClassifierKind kind_ = ClassifierKind::Knn;
    std::vector<int> features_;
    std::size_t full_length_ = 0;
    Standardizer scaler_;

    // knn
    int knn_k_ = 5;
    std::vector<std::vector<double>> knn_points_;
    std::vector<SkillLabel> knn_labels_;

    // rf: nodes as (feature, threshold, left, right, label); feature < 0 marks a leaf
    struct RfNode {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int label = 0;
    };
    std::vector<std::vector<RfNode>> rf_trees_;

    // svm (RBF): decision(x) = sum_i coef_i * K(sv_i, x) - bias
    std::vector<std::vector<double>> svm_support_;
    std::vector<double> svm_coef_;
    double svm_bias_ = 0.0;
    double svm_gamma_ = 1.0;

    SkillLabel predict_standardized(std::span<const double> z) const;
    double svm_decision(std::span<const double> z) const;
    static void grow_tree(std::vector<RfNode>& nodes, const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y, std::vector<std::size_t>& idx, int mtry,
                          int max_depth, int depth, std::mt19937_64& rng);
};

/// Free-function spellings of the model surface.
TrainedModel fit(ClassifierKind kind, const Dataset& data, std::span<const std::size_t> rows,
                 std::span<const int> features, const ClassifierParams& params, std::uint64_t seed);
SkillLabel predict(const TrainedModel& model, std::span<const double> full_features);

/// n draws with replacement; exposed so the bootstrap distribution is
/// testable on its own.
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::mt19937_64& rng);

}  // namespace stec
