#include "stec/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "stec/error.hpp"
#include "stec/rng.hpp"
#include "stratify.hpp"

namespace stec {

using nlohmann::json;

std::string_view to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Svm: return "svm";
        case ClassifierKind::Rf: return "rf";
        case ClassifierKind::Knn: return "knn";
    }
    return "?";
}

std::optional<ClassifierKind> parse_classifier_kind(std::string_view text) {
    if (text == "svm") return ClassifierKind::Svm;
    if (text == "rf") return ClassifierKind::Rf;
    if (text == "knn") return ClassifierKind::Knn;
    return std::nullopt;
}

void ClassifierParams::validate() const {
    if (knn_k < 1) throw ConfigError("classifier: knn_k must be >= 1");
    if (rf_trees < 1) throw ConfigError("classifier: rf_trees must be >= 1");
    if (rf_max_depth < 0) throw ConfigError("classifier: rf_max_depth must be >= 0");
    if (!(svm_c > 0.0)) throw ConfigError("classifier: svm_c must be > 0");
    if (svm_gamma < 0.0) throw ConfigError("classifier: svm_gamma must be >= 0");
    if (!(svm_tol > 0.0)) throw ConfigError("classifier: svm_tol must be > 0");
}

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw DataError("standardizer: no rows");
    const std::size_t nf = rows[0].size();
    Standardizer s;
    s.mean.assign(nf, 0.0);
    s.scale.assign(nf, 1.0);
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < nf; ++j) s.mean[j] += row[j];
    }
    for (auto& m : s.mean) m /= static_cast<double>(rows.size());
    for (std::size_t j = 0; j < nf; ++j) {
        double var = 0.0;
        for (const auto& row : rows) var += (row[j] - s.mean[j]) * (row[j] - s.mean[j]);
        const double sigma = std::sqrt(var / static_cast<double>(rows.size()));
        if (sigma > 0.0) {
            s.scale[j] = sigma;
        } else {
            s.mean[j] = 0.0;  // constant column passes through unchanged
            s.scale[j] = 1.0;
        }
    }
    return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
    return out;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::size_t> idx(n);
    for (auto& v : idx) v = bounded_u64(rng, n);
    return idx;
}

namespace {

int majority_label(int amateur_votes, int professional_votes) {
    // ties resolve to Professional
    return professional_votes >= amateur_votes ? 1 : 0;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

double gini(int n0, int n1) {
    const double n = n0 + n1;
    if (n == 0.0) return 0.0;
    const double p0 = n0 / n;
    const double p1 = n1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

// Deterministic RBF-SVM via sequential minimal optimization (Platt-style
// working-set selection without the randomized fallbacks).
class SmoSolver {
public:
    SmoSolver(const std::vector<std::vector<double>>& x, const std::vector<double>& y, double c,
              double gamma, double tol)
        : x_(x), y_(y), c_(c), gamma_(gamma), tol_(tol), n_(x.size()) {
        alpha_.assign(n_, 0.0);
        fcache_.assign(n_, 0.0);  // sum_j alpha_j y_j K(i, j), no bias
        kernel_.assign(n_ * n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i; j < n_; ++j) {
                const double k = std::exp(-gamma_ * squared_distance(x_[i], x_[j]));
                kernel_[i * n_ + j] = k;
                kernel_[j * n_ + i] = k;
            }
        }
    }

    void solve() {
        bool examine_all = true;
        int changed = 0;
        int passes = 0;
        const int max_passes = 10000;
        while ((changed > 0 || examine_all) && passes++ < max_passes) {
            changed = 0;
            if (examine_all) {
                for (std::size_t i = 0; i < n_; ++i) changed += examine(i);
            } else {
                for (std::size_t i = 0; i < n_; ++i) {
                    if (alpha_[i] > 0.0 && alpha_[i] < c_) changed += examine(i);
                }
            }
            if (examine_all) examine_all = false;
            else if (changed == 0) examine_all = true;
        }
    }

    const std::vector<double>& alpha() const { return alpha_; }
    double bias() const { return b_; }

private:
    double error(std::size_t i) const { return fcache_[i] - b_ - y_[i]; }

    int examine(std::size_t i2) {
        const double y2 = y_[i2];
        const double a2 = alpha_[i2];
        const double e2 = error(i2);
        const double r2 = e2 * y2;
        if (!((r2 < -tol_ && a2 < c_) || (r2 > tol_ && a2 > 0.0))) return 0;

        // second-choice heuristic: largest |E1 - E2| among non-bound points
        std::size_t best = n_;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (i == i2 || alpha_[i] <= 0.0 || alpha_[i] >= c_) continue;
            const double gap = std::abs(error(i) - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n_ && take_step(best, i2)) return 1;
        for (std::size_t i = 0; i < n_; ++i) {
            if (i != i2 && alpha_[i] > 0.0 && alpha_[i] < c_ && take_step(i, i2)) return 1;
        }
        for (std::size_t i = 0; i < n_; ++i) {
            if (i != i2 && take_step(i, i2)) return 1;
        }
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        const double a1 = alpha_[i1];
        const double a2 = alpha_[i2];
        const double y1 = y_[i1];
        const double y2 = y_[i2];
        const double e1 = error(i1);
        const double e2 = error(i2);
        const double s = y1 * y2;

        double lo, hi;
        if (s < 0.0) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(c_, c_ + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - c_);
            hi = std::min(c_, a1 + a2);
        }
        if (lo >= hi) return false;

        const double k11 = kernel_[i1 * n_ + i1];
        const double k12 = kernel_[i1 * n_ + i2];
        const double k22 = kernel_[i2 * n_ + i2];
        const double eta = k11 + k22 - 2.0 * k12;

        double a2_new;
        if (eta > 0.0) {
            a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
        } else {
            // objective is flat or concave along the pair; test the bounds
            const double f1 = y1 * (e1 + b_) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (e2 + b_) - s * a1 * k12 - a2 * k22;
            const double l1 = a1 + s * (a2 - lo);
            const double h1 = a1 + s * (a2 - hi);
            const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                                  s * lo * l1 * k12;
            const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                                  s * hi * h1 * k12;
            if (obj_lo < obj_hi - 1e-12) a2_new = lo;
            else if (obj_lo > obj_hi + 1e-12) a2_new = hi;
            else return false;
        }
        if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;

        const double a1_new = a1 + s * (a2 - a2_new);
        const double d1 = y1 * (a1_new - a1);
        const double d2 = y2 * (a2_new - a2);

        const double b1 = e1 + d1 * k11 + d2 * k12 + b_;
        const double b2 = e2 + d1 * k12 + d2 * k22 + b_;
        if (a1_new > 0.0 && a1_new < c_) b_ = b1;
        else if (a2_new > 0.0 && a2_new < c_) b_ = b2;
        else b_ = 0.5 * (b1 + b2);

        alpha_[i1] = a1_new;
        alpha_[i2] = a2_new;
        for (std::size_t i = 0; i < n_; ++i) {
            fcache_[i] += d1 * kernel_[i1 * n_ + i] + d2 * kernel_[i2 * n_ + i];
        }
        return true;
    }

    const std::vector<std::vector<double>>& x_;
    const std::vector<double>& y_;
    double c_;
    double gamma_;
    double tol_;
    std::size_t n_;
    double b_ = 0.0;
    std::vector<double> alpha_;
    std::vector<double> fcache_;
    std::vector<double> kernel_;
};

}  // namespace

TrainedModel TrainedModel::fit(ClassifierKind kind, const Dataset& data,
                               std::span<const std::size_t> rows, std::span<const int> features,
                               const ClassifierParams& params, std::uint64_t seed) {
    params.validate();
    if (features.empty()) throw DataError("fit: empty feature subset");
    if (rows.empty()) throw DataError("fit: no training samples");
    if (!detail::has_both_classes(data, rows)) throw DataError("fit: single-class training set");

    TrainedModel model;
    model.kind_ = kind;
    model.features_.assign(features.begin(), features.end());
    model.full_length_ = data.num_features();
    for (const int f : features) {
        if (f < 0 || static_cast<std::size_t>(f) >= model.full_length_) {
            throw DataError("fit: feature index out of range");
        }
    }

    std::vector<std::vector<double>> raw;
    std::vector<int> labels;
    raw.reserve(rows.size());
    labels.reserve(rows.size());
    for (const auto r : rows) {
        const auto& sample = data.samples[r];
        std::vector<double> row;
        row.reserve(features.size());
        for (const int f : features) row.push_back(sample.features[static_cast<std::size_t>(f)]);
        raw.push_back(std::move(row));
        labels.push_back(sample.label == SkillLabel::Professional ? 1 : 0);
    }

    model.scaler_ = Standardizer::fit(raw);
    std::vector<std::vector<double>> z;
    z.reserve(raw.size());
    for (const auto& row : raw) z.push_back(model.scaler_.apply(row));

    const std::size_t n = z.size();
    const std::size_t nf = features.size();

    switch (kind) {
        case ClassifierKind::Knn: {
            model.knn_k_ = params.knn_k;
            model.knn_points_ = z;
            model.knn_labels_.reserve(n);
            for (const int l : labels) {
                model.knn_labels_.push_back(l ? SkillLabel::Professional : SkillLabel::Amateur);
            }
            break;
        }
        case ClassifierKind::Rf: {
            const int mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(double(nf)))));
            model.rf_trees_.reserve(static_cast<std::size_t>(params.rf_trees));
            for (int t = 0; t < params.rf_trees; ++t) {
                auto rng = make_rng(seed, 0x2f01, static_cast<std::uint64_t>(t));
                auto sample = bootstrap_indices(n, rng);
                std::vector<RfNode> nodes;
                grow_tree(nodes, z, labels, sample, mtry, params.rf_max_depth, 0, rng);
                model.rf_trees_.push_back(std::move(nodes));
            }
            break;
        }
        case ClassifierKind::Svm: {
            double gamma = params.svm_gamma;
            if (gamma <= 0.0) {
                // 1 / (n_features * mean feature variance) on the matrix the
                // kernel sees; all-constant fallback 1 / n_features
                double mean_var = 0.0;
                for (std::size_t j = 0; j < nf; ++j) {
                    double mu = 0.0;
                    for (const auto& row : z) mu += row[j];
                    mu /= static_cast<double>(n);
                    double var = 0.0;
                    for (const auto& row : z) var += (row[j] - mu) * (row[j] - mu);
                    mean_var += var / static_cast<double>(n);
                }
                mean_var /= static_cast<double>(nf);
                gamma = mean_var > 0.0 ? 1.0 / (static_cast<double>(nf) * mean_var)
                                       : 1.0 / static_cast<double>(nf);
            }
            std::vector<double> y;
            y.reserve(n);
            for (const int l : labels) y.push_back(l ? 1.0 : -1.0);

            SmoSolver solver(z, y, params.svm_c, gamma, params.svm_tol);
            solver.solve();

            model.svm_gamma_ = gamma;
            model.svm_bias_ = solver.bias();
            for (std::size_t i = 0; i < n; ++i) {
                if (solver.alpha()[i] > 0.0) {
                    model.svm_support_.push_back(z[i]);
                    model.svm_coef_.push_back(solver.alpha()[i] * y[i]);
                }
            }
            break;
        }
    }
    return model;
}

void TrainedModel::grow_tree(std::vector<RfNode>& nodes, const std::vector<std::vector<double>>& x,
                             const std::vector<int>& y, std::vector<std::size_t>& idx, int mtry,
                             int max_depth, int depth, std::mt19937_64& rng) {
    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();

    int n0 = 0, n1 = 0;
    for (const auto i : idx) (y[i] ? n1 : n0)++;

    auto make_leaf = [&] { nodes[static_cast<std::size_t>(node_id)].label = majority_label(n0, n1); };

    if (n0 == 0 || n1 == 0 || idx.size() < 2 || (max_depth > 0 && depth >= max_depth)) {
        make_leaf();
        return;
    }

    // draw mtry distinct candidate features
    const std::size_t nf = x[0].size();
    std::vector<int> pool(nf);
    std::iota(pool.begin(), pool.end(), 0);
    const int draws = std::min<int>(mtry, static_cast<int>(nf));
    for (int i = 0; i < draws; ++i) {
        const std::size_t j = i + bounded_u64(rng, nf - static_cast<std::size_t>(i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }

    const double parent = gini(n0, n1);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> sorted;
    sorted.reserve(idx.size());
    for (int c = 0; c < draws; ++c) {
        const int f = pool[static_cast<std::size_t>(c)];
        sorted.clear();
        for (const auto i : idx) sorted.emplace_back(x[i][static_cast<std::size_t>(f)], y[i]);
        std::sort(sorted.begin(), sorted.end());

        int left0 = 0, left1 = 0;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            (sorted[i].second ? left1 : left0)++;
            if (sorted[i].first == sorted[i + 1].first) continue;
            const int right0 = n0 - left0;
            const int right1 = n1 - left1;
            const double nl = static_cast<double>(left0 + left1);
            const double nr = static_cast<double>(right0 + right1);
            const double weighted =
                (nl * gini(left0, left1) + nr * gini(right0, right1)) / static_cast<double>(idx.size());
            const double gain = parent - weighted;
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = f;
                best_threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
            }
        }
    }

    if (best_feature < 0) {
        make_leaf();
        return;
    }

    std::vector<std::size_t> left, right;
    for (const auto i : idx) {
        (x[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(i);
    }
    if (left.empty() || right.empty()) {
        make_leaf();
        return;
    }

    nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
    nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
    idx.clear();
    idx.shrink_to_fit();

    nodes[static_cast<std::size_t>(node_id)].left = static_cast<int>(nodes.size());
    grow_tree(nodes, x, y, left, mtry, max_depth, depth + 1, rng);
    nodes[static_cast<std::size_t>(node_id)].right = static_cast<int>(nodes.size());
    grow_tree(nodes, x, y, right, mtry, max_depth, depth + 1, rng);
}

SkillLabel TrainedModel::predict(std::span<const double> full_features) const {
    if (full_features.size() != full_length_) {
        throw DataError("predict: feature length mismatch (got " +
                        std::to_string(full_features.size()) + ", expected " +
                        std::to_string(full_length_) + ")");
    }
    std::vector<double> row;
    row.reserve(features_.size());
    for (const int f : features_) row.push_back(full_features[static_cast<std::size_t>(f)]);
    return predict_standardized(scaler_.apply(row));
}

SkillLabel TrainedModel::predict_standardized(std::span<const double> z) const {
    switch (kind_) {
        case ClassifierKind::Knn: {
            std::vector<std::pair<double, std::size_t>> dist;
            dist.reserve(knn_points_.size());
            for (std::size_t i = 0; i < knn_points_.size(); ++i) {
                dist.emplace_back(squared_distance(knn_points_[i], z), i);
            }
            const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(knn_k_), dist.size());
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
            int votes0 = 0, votes1 = 0;
            for (std::size_t i = 0; i < k; ++i) {
                (knn_labels_[dist[i].second] == SkillLabel::Professional ? votes1 : votes0)++;
            }
            return majority_label(votes0, votes1) ? SkillLabel::Professional : SkillLabel::Amateur;
        }
        case ClassifierKind::Rf: {
            int votes0 = 0, votes1 = 0;
            for (const auto& tree : rf_trees_) {
                int node = 0;
                while (tree[static_cast<std::size_t>(node)].feature >= 0) {
                    const auto& nd = tree[static_cast<std::size_t>(node)];
                    node = z[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
                }
                (tree[static_cast<std::size_t>(node)].label ? votes1 : votes0)++;
            }
            return majority_label(votes0, votes1) ? SkillLabel::Professional : SkillLabel::Amateur;
        }
        case ClassifierKind::Svm:
            return svm_decision(z) >= 0.0 ? SkillLabel::Professional : SkillLabel::Amateur;
    }
    throw Error("predict: unreachable");
}

double TrainedModel::svm_decision(std::span<const double> z) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < svm_support_.size(); ++i) {
        sum += svm_coef_[i] * std::exp(-svm_gamma_ * squared_distance(svm_support_[i], z));
    }
    return sum - svm_bias_;
}

TrainedModel fit(ClassifierKind kind, const Dataset& data, std::span<const std::size_t> rows,
                 std::span<const int> features, const ClassifierParams& params, std::uint64_t seed) {
    return TrainedModel::fit(kind, data, rows, features, params, seed);
}

SkillLabel predict(const TrainedModel& model, std::span<const double> full_features) {
    return model.predict(full_features);
}

// --- versioned JSON model serialization -------------------------------

namespace {
constexpr const char* kModelFormat = "stec-model";
constexpr int kModelVersion = 1;
}  // namespace

std::string TrainedModel::to_json() const {
    json doc;
    doc["format"] = kModelFormat;
    doc["version"] = kModelVersion;
    doc["kind"] = std::string(to_string(kind_));
    doc["features"] = features_;
    doc["full_length"] = full_length_;
    doc["scaler"] = {{"mean", scaler_.mean}, {"scale", scaler_.scale}};
    switch (kind_) {
        case ClassifierKind::Knn: {
            json labels = json::array();
            for (const auto l : knn_labels_) labels.push_back(l == SkillLabel::Professional ? 1 : 0);
            doc["knn"] = {{"k", knn_k_}, {"points", knn_points_}, {"labels", labels}};
            break;
        }
        case ClassifierKind::Rf: {
            json trees = json::array();
            for (const auto& tree : rf_trees_) {
                json nodes = json::array();
                for (const auto& nd : tree) {
                    nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.label});
                }
                trees.push_back(std::move(nodes));
            }
            doc["rf"] = {{"trees", std::move(trees)}};
            break;
        }
        case ClassifierKind::Svm: {
            doc["svm"] = {{"gamma", svm_gamma_},
                          {"bias", svm_bias_},
                          {"coef", svm_coef_},
                          {"support", svm_support_}};
            break;
        }
    }
    return doc.dump();
}

TrainedModel TrainedModel::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("model: " + std::string(e.what()));
    }
    if (doc.value("format", "") != kModelFormat || doc.value("version", -1) != kModelVersion) {
        throw ParseError("model: unsupported format or version");
    }

    TrainedModel model;
    const auto kind = parse_classifier_kind(doc.at("kind").get<std::string>());
    if (!kind) throw ParseError("model: unknown kind");
    model.kind_ = *kind;
    model.features_ = doc.at("features").get<std::vector<int>>();
    model.full_length_ = doc.at("full_length").get<std::size_t>();
    model.scaler_.mean = doc.at("scaler").at("mean").get<std::vector<double>>();
    model.scaler_.scale = doc.at("scaler").at("scale").get<std::vector<double>>();

    switch (model.kind_) {
        case ClassifierKind::Knn: {
            const auto& knn = doc.at("knn");
            model.knn_k_ = knn.at("k").get<int>();
            model.knn_points_ = knn.at("points").get<std::vector<std::vector<double>>>();
            for (const auto& l : knn.at("labels")) {
                model.knn_labels_.push_back(l.get<int>() ? SkillLabel::Professional
                                                         : SkillLabel::Amateur);
            }
            break;
        }
        case ClassifierKind::Rf: {
            for (const auto& tree_json : doc.at("rf").at("trees")) {
                std::vector<RfNode> tree;
                for (const auto& nd : tree_json) {
                    tree.push_back({nd.at(0).get<int>(), nd.at(1).get<double>(), nd.at(2).get<int>(),
                                    nd.at(3).get<int>(), nd.at(4).get<int>()});
                }
                model.rf_trees_.push_back(std::move(tree));
            }
            break;
        }
        case ClassifierKind::Svm: {
            const auto& svm = doc.at("svm");
            model.svm_gamma_ = svm.at("gamma").get<double>();
            model.svm_bias_ = svm.at("bias").get<double>();
            model.svm_coef_ = svm.at("coef").get<std::vector<double>>();
            model.svm_support_ = svm.at("support").get<std::vector<std::vector<double>>>();
            break;
        }
    }
    return model;
}

}  // namespace stec
