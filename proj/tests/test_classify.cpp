#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "stec/classify.hpp"
#include "stec/error.hpp"
#include "stec/rng.hpp"

using namespace stec;

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) / 9007199254740992.0;
}

double gaussian(std::mt19937_64& rng) {
    const double u1 = std::max(uniform01(rng), 1e-12);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Dataset cluster_dataset(std::mt19937_64& rng, int per_class, int dims, double separation,
                        double noise = 1.0) {
    Dataset d;
    for (int j = 0; j < dims; ++j) d.feature_names.push_back("f" + std::to_string(j));
    for (int i = 0; i < 2 * per_class; ++i) {
        const int label = i % 2;
        LabeledSample s;
        s.label = label ? SkillLabel::Professional : SkillLabel::Amateur;
        s.prov = {"p" + std::to_string(i), "m", 0};
        for (int j = 0; j < dims; ++j) {
            s.features.push_back((label ? separation : -separation) + noise * gaussian(rng));
        }
        d.samples.push_back(std::move(s));
    }
    return d;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
    std::vector<std::size_t> rows(d.samples.size());
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

std::vector<int> all_features(const Dataset& d) {
    std::vector<int> f(d.num_features());
    std::iota(f.begin(), f.end(), 0);
    return f;
}

double training_accuracy(const TrainedModel& model, const Dataset& d) {
    std::size_t correct = 0;
    for (const auto& s : d.samples) correct += model.predict(s.features) == s.label;
    return static_cast<double>(correct) / static_cast<double>(d.samples.size());
}

}  // namespace

TEST_CASE("knn k=1 reproduces a training point's own label") {
    auto rng = make_rng(301);
    const auto data = cluster_dataset(rng, 20, 4, 1.0);
    ClassifierParams params;
    params.knn_k = 1;
    const auto model = fit(ClassifierKind::Knn, data, all_rows(data), all_features(data), params, 1);
    for (const auto& s : data.samples) CHECK(model.predict(s.features) == s.label);
}

TEST_CASE("knn majority vote and professional tie rule") {
    // 2 amateurs + 1 professional near the origin, k=3 -> Amateur
    Dataset d;
    d.feature_names = {"f0"};
    const auto add = [&](double x, SkillLabel l, const char* p) {
        d.samples.push_back({{x}, l, {p, "m", 0}});
    };
    add(-0.2, SkillLabel::Amateur, "a1");
    add(-0.1, SkillLabel::Amateur, "a2");
    add(0.1, SkillLabel::Professional, "p1");
    add(5.0, SkillLabel::Professional, "p2");
    ClassifierParams params;
    params.knn_k = 3;
    const auto model = fit(ClassifierKind::Knn, d, all_rows(d), all_features(d), params, 1);
    const std::vector<double> query = {0.0};
    CHECK(model.predict(query) == SkillLabel::Amateur);

    // k=4 splits 2-2: ties go to Professional
    params.knn_k = 4;
    const auto tie_model = fit(ClassifierKind::Knn, d, all_rows(d), all_features(d), params, 1);
    CHECK(tie_model.predict(query) == SkillLabel::Professional);
}

TEST_CASE("rf refuses a single-class training set") {
    auto rng = make_rng(302);
    auto data = cluster_dataset(rng, 10, 3, 1.0);
    std::vector<std::size_t> amateur_rows;
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        if (data.samples[i].label == SkillLabel::Amateur) amateur_rows.push_back(i);
    }
    ClassifierParams params;
    CHECK_THROWS_AS(fit(ClassifierKind::Rf, data, amateur_rows, all_features(data), params, 1),
                    DataError);
}

TEST_CASE("rf separates well-separated clusters and is deterministic") {
    auto rng = make_rng(303);
    const auto data = cluster_dataset(rng, 40, 5, 3.0);
    ClassifierParams params;
    params.rf_trees = 25;
    const auto a = fit(ClassifierKind::Rf, data, all_rows(data), all_features(data), params, 7);
    const auto b = fit(ClassifierKind::Rf, data, all_rows(data), all_features(data), params, 7);
    CHECK(a.to_json() == b.to_json());
    CHECK(training_accuracy(a, data) >= 0.99);
}

TEST_CASE("svm separates seeded linearly separable clusters") {
    auto rng = make_rng(304);
    const auto data = cluster_dataset(rng, 50, 6, 3.0);  // means +-3, unit noise
    ClassifierParams params;
    const auto model = fit(ClassifierKind::Svm, data, all_rows(data), all_features(data), params, 1);
    CHECK(training_accuracy(model, data) >= 0.99);
}

TEST_CASE("svm zero decision value predicts Professional") {
    // hand-built model with no support vectors: decision is exactly 0
    const std::string text = R"({"format":"stec-model","version":1,"kind":"svm",
        "features":[0],"full_length":1,
        "scaler":{"mean":[0.0],"scale":[1.0]},
        "svm":{"gamma":1.0,"bias":0.0,"coef":[],"support":[]}})";
    const auto model = TrainedModel::from_json(text);
    const std::vector<double> query = {0.3};
    CHECK(model.predict(query) == SkillLabel::Professional);
}

TEST_CASE("standardization is fitted on training data only") {
    auto rng = make_rng(305);
    auto data = cluster_dataset(rng, 30, 4, 2.0);
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < 40; ++i) train.push_back(i);

    ClassifierParams params;
    for (const auto kind : {ClassifierKind::Knn, ClassifierKind::Rf, ClassifierKind::Svm}) {
        const auto before = fit(kind, data, train, all_features(data), params, 9).to_json();
        // mutate every held-out sample wildly
        auto mutated = data;
        for (std::size_t i = 40; i < mutated.samples.size(); ++i) {
            for (auto& v : mutated.samples[i].features) v = 1e6 + v * 17.0;
        }
        const auto after = fit(kind, mutated, train, all_features(mutated), params, 9).to_json();
        CHECK(before == after);
    }
}

TEST_CASE("identical affine rescaling of train and test leaves knn predictions unchanged") {
    auto rng = make_rng(306);
    const auto data = cluster_dataset(rng, 25, 3, 1.0);
    ClassifierParams params;
    const auto model = fit(ClassifierKind::Knn, data, all_rows(data), all_features(data), params, 3);

    auto scaled = data;
    for (auto& s : scaled.samples) {
        for (auto& v : s.features) v = 4.0 * v + 11.0;  // positive-slope affine map
    }
    const auto scaled_model =
        fit(ClassifierKind::Knn, scaled, all_rows(scaled), all_features(scaled), params, 3);

    auto rng2 = make_rng(307);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> q = {gaussian(rng2), gaussian(rng2), gaussian(rng2)};
        std::vector<double> q_scaled = {4.0 * q[0] + 11.0, 4.0 * q[1] + 11.0, 4.0 * q[2] + 11.0};
        CHECK(model.predict(q) == scaled_model.predict(q_scaled));
    }
}

TEST_CASE("bootstrap OOB fraction is near 1/e") {
    double total = 0.0;
    int runs = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto rng = make_rng(seed, 0xb007);
        const auto idx = bootstrap_indices(1000, rng);
        std::vector<char> seen(1000, 0);
        for (const auto i : idx) seen[i] = 1;
        const double oob = 1.0 - std::accumulate(seen.begin(), seen.end(), 0.0) / 1000.0;
        total += oob;
        ++runs;
    }
    CHECK(std::abs(total / runs - 1.0 / M_E) < 0.05);
}

TEST_CASE("models survive a JSON round trip exactly") {
    auto rng = make_rng(308);
    const auto data = cluster_dataset(rng, 15, 4, 1.5);
    ClassifierParams params;
    params.rf_trees = 10;
    for (const auto kind : {ClassifierKind::Knn, ClassifierKind::Rf, ClassifierKind::Svm}) {
        const auto model = fit(kind, data, all_rows(data), all_features(data), params, 5);
        const auto text = model.to_json();
        const auto loaded = TrainedModel::from_json(text);
        CHECK(loaded.to_json() == text);  // byte-exact second serialization
        for (const auto& s : data.samples) {
            CHECK(loaded.predict(s.features) == model.predict(s.features));
        }
    }
}

TEST_CASE("fit validates inputs") {
    auto rng = make_rng(309);
    const auto data = cluster_dataset(rng, 5, 2, 1.0);
    ClassifierParams params;
    const std::vector<int> none;
    CHECK_THROWS_AS(fit(ClassifierKind::Knn, data, all_rows(data), none, params, 1), DataError);
    const std::vector<int> bad = {7};
    CHECK_THROWS_AS(fit(ClassifierKind::Knn, data, all_rows(data), bad, params, 1), DataError);

    const auto model = fit(ClassifierKind::Knn, data, all_rows(data), all_features(data), params, 1);
    const std::vector<double> short_query = {1.0};
    CHECK_THROWS_AS(model.predict(short_query), DataError);
}

TEST_CASE("constant columns pass through standardization") {
    Dataset d;
    d.feature_names = {"f0", "f1"};
    for (int i = 0; i < 10; ++i) {
        LabeledSample s;
        s.features = {5.0, static_cast<double>(i)};  // f0 constant
        s.label = i % 2 ? SkillLabel::Professional : SkillLabel::Amateur;
        s.prov = {"p" + std::to_string(i), "m", 0};
        d.samples.push_back(std::move(s));
    }
    const auto scaler = Standardizer::fit({{5.0, 0.0}, {5.0, 2.0}, {5.0, 4.0}});
    const std::vector<double> row = {5.0, 2.0};
    const auto z = scaler.apply(row);
    CHECK(z[0] == doctest::Approx(5.0));  // untouched
    CHECK(z[1] == doctest::Approx(0.0));
}
