#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <numeric>
#include <stdexcept>

#include "stec/classify.hpp"
#include "stec/dataset.hpp"
#include "stec/error.hpp"
#include "stec/evaluate.hpp"
#include "stec/pipeline.hpp"
#include "stec/preprocess.hpp"
#include "stec/selection.hpp"
#include "stec/ste.hpp"

namespace py = pybind11;
using namespace stec;

namespace {

// labels cross the boundary as ints: 0 = Amateur, 1 = Professional
SkillLabel to_label(int value) {
    return value ? SkillLabel::Professional : SkillLabel::Amateur;
}

Dataset make_dataset(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     const std::vector<std::string>& feature_names,
                     const std::vector<std::string>& players) {
    if (x.size() != y.size()) throw DataError("X and y must have equal length");
    if (x.empty()) throw DataError("empty dataset");
    Dataset d;
    if (feature_names.empty()) {
        for (std::size_t j = 0; j < x[0].size(); ++j) d.feature_names.push_back("f" + std::to_string(j));
    } else {
        d.feature_names = feature_names;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        LabeledSample s;
        s.features = x[i];
        s.label = to_label(y[i]);
        s.prov = {players.empty() ? "p" + std::to_string(i) : players[i], "m", 0};
        d.samples.push_back(std::move(s));
    }
    return d;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
    std::vector<std::size_t> rows(d.samples.size());
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

SteParams ste_params(int m, int d, int t) {
    SteParams params{m, d, t};
    params.validate();
    return params;
}

ClassifierKind parse_kind_or_throw(const std::string& kind) {
    const auto parsed = parse_classifier_kind(kind);
    if (!parsed) throw ConfigError("classifier must be svm|rf|knn");
    return *parsed;
}

py::dict metrics_dict(const Metrics& metrics) {
    py::dict out;
    out["accuracy"] = py::make_tuple(metrics.accuracy.mean, metrics.accuracy.std);
    out["sensitivity"] = py::make_tuple(metrics.sensitivity.mean, metrics.sensitivity.std);
    out["specificity"] = py::make_tuple(metrics.specificity.mean, metrics.specificity.std);
    py::list folds;
    for (const auto& c : metrics.folds) {
        py::dict fold;
        fold["tp"] = c.tp;
        fold["fn"] = c.fn;
        fold["tn"] = c.tn;
        fold["fp"] = c.fp;
        folds.append(fold);
    }
    out["folds"] = folds;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "symbolic-transfer-entropy connectivity features and consensus selection";

    py::register_exception<Error>(m, "StecError");

    // --- preprocessing ---------------------------------------------------
    m.def(
        "remove_outliers",
        [](const std::vector<double>& values, double threshold) {
            SensorSeries s;
            s.values = values;
            return remove_outliers(s, threshold).values;
        },
        py::arg("values"), py::arg("threshold") = 3.5,
        "Replace robust-z outliers by interpolation between surviving neighbors.");

    m.def(
        "ema_smooth",
        [](const std::vector<double>& values, double alpha) {
            SensorSeries s;
            s.values = values;
            return ema_smooth(s, alpha).values;
        },
        py::arg("values"), py::arg("alpha") = 0.3);

    m.def(
        "resample_1s",
        [](const std::vector<double>& times, const std::vector<double>& values,
           const std::string& mode) {
            if (times.size() != values.size()) throw DataError("times and values length mismatch");
            std::vector<TimedSample> raw(times.size());
            for (std::size_t i = 0; i < times.size(); ++i) raw[i] = {times[i], values[i]};
            const auto mode_enum = mode == "sum" ? ResampleMode::Sum : ResampleMode::Mean;
            const auto out = resample_1s(raw, mode_enum);
            return py::make_tuple(out.start_time, out.values);
        },
        py::arg("times"), py::arg("values"), py::arg("mode") = "mean",
        "Bin to a 1-second grid; returns (start_time, values).");

    // --- symbolic transfer entropy ----------------------------------------
    m.def(
        "ordinal_pattern",
        [](const std::vector<double>& window) { return ordinal_pattern(window); },
        py::arg("window"), "1-based window positions of the sorted values.");

    m.def(
        "ste",
        [](const std::vector<double>& src, const std::vector<double>& dst, int m_, int d_, int t_) {
            const auto params = ste_params(m_, d_, t_);
            const std::vector<int> blocks = {static_cast<int>(dst.size())};
            return ste(symbol_sequence(src, blocks, params), symbol_sequence(dst, blocks, params),
                       params);
        },
        py::arg("src"), py::arg("dst"), py::arg("m") = 3, py::arg("d") = 1, py::arg("t") = 1,
        "Symbolic transfer entropy src -> dst in bits (single-block sequences).");

    m.def(
        "ste_matrix",
        [](const std::vector<std::vector<double>>& sequences, const std::vector<int>& block_lengths,
           int m_, int d_, int t_) {
            if (sequences.size() != kSensorCount) {
                throw DataError("ste_matrix expects exactly 12 sequences");
            }
            const auto params = ste_params(m_, d_, t_);
            EventGroup group;
            group.block_length = block_lengths.empty() ? 0 : block_lengths[0];
            for (const int len : block_lengths) {
                if (len != group.block_length) throw DataError("blocks must have equal length");
            }
            group.events.resize(block_lengths.size());
            for (std::size_t s = 0; s < kSensorCount; ++s) group.sequences[s] = sequences[s];
            return ste_feature_vector(group, params);
        },
        py::arg("sequences"), py::arg("block_lengths"), py::arg("m") = 3, py::arg("d") = 1,
        py::arg("t") = 1, "All 144 directed pair values, row-major by source sensor.");

    m.def("feature_names", &ste_feature_names, "canonical names of the 144 features");

    // --- selection ---------------------------------------------------------
    m.def(
        "discretize", [](const std::vector<double>& column) { return discretize(column); },
        py::arg("column"));

    m.def(
        "mutual_information",
        [](const std::vector<std::int8_t>& a, const std::vector<std::int8_t>& b) {
            return mutual_information(a, b);
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "mrmr_rank",
        [](const std::vector<std::vector<double>>& x, const std::vector<int>& y, int k) {
            const auto d = make_dataset(x, y, {}, {});
            std::vector<int> features(d.num_features());
            std::iota(features.begin(), features.end(), 0);
            const auto ranking = mrmr_rank(d, all_rows(d), features, k);
            return py::make_tuple(ranking.indices, ranking.scores);
        },
        py::arg("X"), py::arg("y"), py::arg("k"),
        "Greedy MID ranking; returns (indices, scores) in selection order.");

    m.def(
        "cncv_select",
        [](const std::vector<std::vector<double>>& x, const std::vector<int>& y, int k_train, int l,
           int n_i, int n_r, std::uint64_t seed) {
            const auto d = make_dataset(x, y, {}, {});
            CnCvParams params{k_train, l, n_i, n_r, seed};
            const auto result = cncv_select(d, all_rows(d), params);
            py::dict out;
            out["consensus"] = result.consensus;
            out["per_outer_fold"] = result.per_outer_fold;
            out["frequency"] = result.frequency;
            return out;
        },
        py::arg("X"), py::arg("y"), py::arg("k_train") = 5, py::arg("l") = 5, py::arg("n_i") = 20,
        py::arg("n_r") = 8, py::arg("seed") = 0);

    // --- classification ------------------------------------------------------
    py::class_<TrainedModel>(m, "Model")
        .def("predict",
             [](const TrainedModel& model, const std::vector<double>& features) {
                 return model.predict(features) == SkillLabel::Professional ? 1 : 0;
             })
        .def("to_json", &TrainedModel::to_json)
        .def_static("from_json", &TrainedModel::from_json)
        .def_property_readonly("features", &TrainedModel::features);

    m.def(
        "fit",
        [](const std::string& kind, const std::vector<std::vector<double>>& x,
           const std::vector<int>& y, std::vector<int> features, std::uint64_t seed, int knn_k,
           int rf_trees, double svm_c, double svm_gamma) {
            const auto d = make_dataset(x, y, {}, {});
            if (features.empty()) {
                features.resize(d.num_features());
                std::iota(features.begin(), features.end(), 0);
            }
            ClassifierParams params;
            params.knn_k = knn_k;
            params.rf_trees = rf_trees;
            params.svm_c = svm_c;
            params.svm_gamma = svm_gamma;
            return TrainedModel::fit(parse_kind_or_throw(kind), d, all_rows(d), features, params,
                                     seed);
        },
        py::arg("kind"), py::arg("X"), py::arg("y"), py::arg("features") = std::vector<int>{},
        py::arg("seed") = 0, py::arg("knn_k") = 5, py::arg("rf_trees") = 100,
        py::arg("svm_c") = 1.0, py::arg("svm_gamma") = 0.0);

    // --- evaluation ------------------------------------------------------------
    m.def(
        "make_folds",
        [](const std::vector<int>& y, int k, std::uint64_t seed,
           const std::vector<std::string>& players) {
            std::vector<std::vector<double>> x(y.size(), std::vector<double>{0.0});
            const auto d = make_dataset(x, y, {}, players);
            const auto scheme =
                players.empty() ? FoldScheme::StratifiedRandom : FoldScheme::LeaveOneSubjectOut;
            return make_folds(d, k, scheme, seed).fold_of;
        },
        py::arg("y"), py::arg("k") = 5, py::arg("seed") = 0,
        py::arg("players") = std::vector<std::string>{},
        "Stratified folds, or LOSO folds when player ids are given.");

    m.def(
        "crossval",
        [](const std::vector<std::vector<double>>& x, const std::vector<int>& y,
           const std::string& kind, int k_all, int k_train, int l, int n_i, int n_r,
           std::uint64_t seed) {
            const auto d = make_dataset(x, y, {}, {});
            const auto folds = make_folds(d, k_all, FoldScheme::StratifiedRandom, seed);
            CnCvParams cncv{k_train, l, n_i, n_r, seed};
            ClassifierParams clf;
            const auto result =
                crossval_evaluate(d, parse_kind_or_throw(kind), clf, cncv, folds, 0);
            auto out = metrics_dict(result.metrics);
            py::list selected;
            for (const auto& fold : result.folds) selected.append(fold.selected_features);
            out["selected_features"] = selected;
            return out;
        },
        py::arg("X"), py::arg("y"), py::arg("kind") = "svm", py::arg("k_all") = 5,
        py::arg("k_train") = 5, py::arg("l") = 5, py::arg("n_i") = 20, py::arg("n_r") = 8,
        py::arg("seed") = 0, "Leakage-safe K-fold evaluation with consensus selection per fold.");

    m.def(
        "pca_project",
        [](const std::vector<std::vector<double>>& x) {
            const auto result = pca_project(x);
            py::dict out;
            out["normalized"] = result.normalized;
            out["kept"] = result.kept;
            out["raw_scores"] = result.raw_scores;
            out["eigenvalues"] = result.eigenvalues;
            return out;
        },
        py::arg("X"));

    // --- the full extraction pipeline -----------------------------------------
    m.def(
        "features_from_manifest",
        [](const std::string& manifest_path, int td, const std::string& events, int m_, int d_,
           int t_, bool balance, std::uint64_t seed) {
            const auto filter = parse_event_filter(events);
            if (!filter) throw ConfigError("events must be kill|death|assist|all");
            const auto manifest = load_manifest(manifest_path);
            PreprocessConfig preprocess;
            const auto players = load_players(manifest, preprocess, 0);
            const auto data = build_dataset(players, td, *filter, GroupingConfig{},
                                            ste_params(m_, d_, t_), balance, seed, 0);
            py::dict out;
            out["feature_names"] = data.feature_names;
            py::list x, y, provenance;
            for (const auto& s : data.samples) {
                x.append(s.features);
                y.append(s.label == SkillLabel::Professional ? 1 : 0);
                provenance.append(py::make_tuple(s.prov.player_id, s.prov.match_id,
                                                 s.prov.subsequence_index));
            }
            out["X"] = x;
            out["y"] = y;
            out["provenance"] = provenance;
            return out;
        },
        py::arg("manifest_path"), py::arg("td") = 4, py::arg("events") = "all", py::arg("m") = 3,
        py::arg("d") = 1, py::arg("t") = 1, py::arg("balance") = true, py::arg("seed") = 1,
        "Run ingest -> windowing -> STE for a manifest and return the labeled matrix.");

    m.attr("SENSORS") = kSensorNames;
    m.attr("__version__") = "0.1.0";
}
