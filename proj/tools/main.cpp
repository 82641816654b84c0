#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "adapt_dataset.hpp"
#include "stec/dataset.hpp"
#include "stec/error.hpp"
#include "stec/evaluate.hpp"
#include "stec/io_util.hpp"
#include "stec/pipeline.hpp"
#include "stec/rng.hpp"

using namespace stec;
using nlohmann::json;

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<std::string> events;
    std::optional<std::string> classifier;
    std::optional<std::string> td;
};

void add_common_options(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--config", opts.config_path, "pipeline config JSON")->required();
    cmd->add_option("--seed", opts.seed, "override the config seed");
    cmd->add_option("--out", opts.out, "override the output directory");
    cmd->add_option("--threads", opts.threads, "worker count (0 = all cores)");
    cmd->add_option("--events", opts.events, "event filter: kill|death|assist|all");
    cmd->add_option("--classifier", opts.classifier, "classifier: svm|rf|knn");
    cmd->add_option("--td", opts.td, "half-window seconds 1..10, or 'tune'");
}

PipelineConfig resolve_config(const CliOptions& opts) {
    auto cfg = PipelineConfig::from_json_file(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out) cfg.out_dir = *opts.out;
    if (opts.threads) cfg.threads = *opts.threads;
    if (opts.events) {
        const auto filter = parse_event_filter(*opts.events);
        if (!filter) throw ConfigError("--events must be kill|death|assist|all");
        cfg.events = *filter;
    }
    if (opts.classifier) {
        const auto kind = parse_classifier_kind(*opts.classifier);
        if (!kind) throw ConfigError("--classifier must be svm|rf|knn");
        cfg.classifier = *kind;
    }
    if (opts.td) {
        if (*opts.td == "tune") {
            cfg.tune_td = true;
        } else {
            cfg.tune_td = false;
            try {
                cfg.td = std::stoi(*opts.td);
            } catch (const std::exception&) {
                throw ConfigError("--td must be an integer in 1..10 or 'tune'");
            }
        }
    }
    cfg.validate();
    return cfg;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// Lazily materialized datasets for one run: either recomputed per (td,
// filter) from the manifest, or pinned to a previously written feature CSV.
class Context {
public:
    explicit Context(PipelineConfig cfg) : cfg_(std::move(cfg)) {
        std::filesystem::create_directories(cfg_.out_dir);
        atomic_write_file(cfg_.out_dir / "resolved_config.json", cfg_.to_json());
        if (cfg_.features_csv) csv_dataset_ = read_feature_csv(*cfg_.features_csv);
    }

    const PipelineConfig& cfg() const { return cfg_; }

    const Dataset& dataset(int td, EventFilter filter) {
        if (csv_dataset_) {
            if (td != cfg_.td || filter != cfg_.events) {
                throw ConfigError(
                    "features_csv is pinned to the configured td/events; tuning and sweeps "
                    "need a manifest");
            }
            return *csv_dataset_;
        }
        ensure_cache();
        const Dataset& data = cache_->get(td, filter);
        print_warnings(cache_->take_warnings());
        return data;
    }

    bool can_vary_td() const { return !cfg_.features_csv.has_value(); }

    /// Chosen td: the configured value, or the tuned average when td="tune".
    int resolve_td(EventFilter filter, std::optional<TdTuningResult>& tuning) {
        if (!cfg_.tune_td) return cfg_.td;
        tuning = run_tuning(filter);
        return tuning->averaged_td;
    }

    TdTuningResult run_tuning(EventFilter filter) {
        if (!can_vary_td()) throw ConfigError("td tuning needs a manifest, not features_csv");
        // window values whose blocks cannot hold the embedding are skipped
        const int td_lo = std::max(1, cfg_.ste.min_td());
        if (td_lo > 1) {
            std::cerr << "warning: td < " << td_lo << " cannot fit the ste embedding; sweeping "
                      << td_lo << "..10\n";
        }
        const Dataset& reference = dataset(td_lo, filter);  // tuning folds anchor here
        const auto folds = make_folds(reference, cfg_.k_all, FoldScheme::StratifiedRandom,
                                      seed_stream(cfg_.seed, seed_tag::kFolds));
        CnCvParams cncv = cfg_.cncv;
        cncv.seed = cfg_.seed;
        return tune_td([&](int td) -> const Dataset& { return dataset(td, filter); }, td_lo, 10,
                       folds, reference, cfg_.classifier, cfg_.clf, cncv,
                       seed_stream(cfg_.seed, seed_tag::kTune));
    }

private:
    void ensure_cache() {
        if (cache_) return;
        if (cfg_.manifest_path.empty()) {
            throw ConfigError("config: 'manifest' (or 'features_csv') is required");
        }
        const auto manifest = load_manifest(cfg_.manifest_path);
        auto players = load_players(manifest, cfg_.preprocess, cfg_.threads);
        cache_.emplace(std::move(players), cfg_.grouping, cfg_.ste, cfg_.balance, cfg_.seed,
                       cfg_.threads);
    }

    PipelineConfig cfg_;
    std::optional<DatasetCache> cache_;
    std::optional<Dataset> csv_dataset_;
};

json metrics_json(const Metrics& metrics) {
    json doc;
    doc["accuracy"] = {{"mean", metrics.accuracy.mean}, {"std", metrics.accuracy.std}};
    doc["sensitivity"] = {{"mean", metrics.sensitivity.mean}, {"std", metrics.sensitivity.std}};
    doc["specificity"] = {{"mean", metrics.specificity.mean}, {"std", metrics.specificity.std}};
    doc["pooled_accuracy"] = metrics.pooled_accuracy();
    return doc;
}

json crossval_json(const CrossvalResult& result, const Dataset& data) {
    json doc = metrics_json(result.metrics);
    json folds = json::array();
    for (const auto& fold : result.folds) {
        json names = json::array();
        for (const int feature : fold.selected_features) {
            names.push_back(data.feature_names[static_cast<std::size_t>(feature)]);
        }
        folds.push_back({{"tp", fold.confusion.tp},
                         {"fn", fold.confusion.fn},
                         {"tn", fold.confusion.tn},
                         {"fp", fold.confusion.fp},
                         {"selected_features", std::move(names)}});
    }
    doc["folds"] = std::move(folds);
    doc["warnings"] = result.metrics.warnings;
    return doc;
}

int cmd_features(const CliOptions& opts) {
    Context ctx(resolve_config(opts));
    const auto& cfg = ctx.cfg();
    if (cfg.tune_td) throw ConfigError("features: td must be a number (run tune-td first)");
    const Dataset& data = ctx.dataset(cfg.td, cfg.events);
    if (data.samples.empty()) std::cerr << "warning: empty feature matrix\n";
    write_feature_csv(cfg.out_dir / "features.csv", data);
    std::cout << "wrote " << (cfg.out_dir / "features.csv").string() << " (" << data.samples.size()
              << " samples)\n";
    return 0;
}

int cmd_tune_td(const CliOptions& opts) {
    Context ctx(resolve_config(opts));
    const auto result = ctx.run_tuning(ctx.cfg().events);
    json doc;
    doc["td_values"] = result.td_values;
    doc["per_fold_best"] = result.per_fold_best;
    doc["averaged_td"] = result.averaged_td;
    doc["validation_accuracy"] = result.validation_accuracy;
    atomic_write_file(ctx.cfg().out_dir / "td_tuning.json", doc.dump(2) + "\n");
    std::cout << "selected td = " << result.averaged_td << "\n";
    return 0;
}

int cmd_select(const CliOptions& opts) {
    Context ctx(resolve_config(opts));
    const auto& cfg = ctx.cfg();
    std::optional<TdTuningResult> tuning;
    const int td = ctx.resolve_td(cfg.events, tuning);
    const Dataset& data = ctx.dataset(td, cfg.events);

    CnCvParams cncv = cfg.cncv;
    cncv.seed = cfg.seed;
    const auto result = rank_distinguishing_features(data, cfg.selection_mode, cncv, cfg.k_all,
                                                     seed_stream(cfg.seed, seed_tag::kFolds));
    if (result.empty_intersection_fallback) {
        std::cerr << "warning: empty consensus intersection; falling back to frequency order\n";
    }

    json ranking = json::array();
    for (std::size_t i = 0; i < result.ranking.indices.size(); ++i) {
        const int feature = result.ranking.indices[i];
        const auto it = result.frequency.find(feature);
        ranking.push_back({{"feature", data.feature_names[static_cast<std::size_t>(feature)]},
                           {"score", result.ranking.scores[i]},
                           {"frequency", it == result.frequency.end() ? 0 : it->second}});
    }
    atomic_write_file(cfg.out_dir / "ranking.json", ranking.dump(2) + "\n");

    json consensus;
    consensus["mode"] = cfg.selection_mode == RankMode::WholeDataset ? "whole" : "cv-intersection";
    consensus["td"] = td;
    json sets = json::array();
    for (const auto& s : result.per_iteration_sets) {
        json names = json::array();
        for (const int f : s) names.push_back(data.feature_names[static_cast<std::size_t>(f)]);
        sets.push_back(std::move(names));
    }
    consensus["per_fold_sets"] = std::move(sets);
    json inter = json::array();
    for (const int f : result.intersection) {
        inter.push_back(data.feature_names[static_cast<std::size_t>(f)]);
    }
    consensus["intersection"] = std::move(inter);
    consensus["empty_intersection_fallback"] = result.empty_intersection_fallback;
    atomic_write_file(cfg.out_dir / "consensus.json", consensus.dump(2) + "\n");

    std::cout << "wrote " << (cfg.out_dir / "ranking.json").string() << "\n";
    return 0;
}

int cmd_evaluate(const CliOptions& opts, FoldScheme scheme) {
    Context ctx(resolve_config(opts));
    const auto& cfg = ctx.cfg();
    std::optional<TdTuningResult> tuning;
    const int td = ctx.resolve_td(cfg.events, tuning);
    const Dataset& data = ctx.dataset(td, cfg.events);

    const auto folds = make_folds(data, cfg.k_all, scheme, seed_stream(cfg.seed, seed_tag::kFolds));
    CnCvParams cncv = cfg.cncv;
    cncv.seed = cfg.seed;
    const auto result = crossval_evaluate(data, cfg.classifier, cfg.clf, cncv, folds, cfg.threads);

    json doc = crossval_json(result, data);
    doc["classifier"] = std::string(to_string(cfg.classifier));
    doc["events"] = std::string(to_string(cfg.events));
    doc["td"] = td;
    doc["scheme"] = scheme == FoldScheme::LeaveOneSubjectOut ? "loso" : "stratified";
    doc["k_all"] = folds.k;
    if (tuning) doc["tuning"] = {{"per_fold_best", tuning->per_fold_best}};

    const char* name =
        scheme == FoldScheme::LeaveOneSubjectOut ? "metrics_loso.json" : "metrics.json";
    atomic_write_file(cfg.out_dir / name, doc.dump(2) + "\n");
    print_warnings(result.metrics.warnings);
    std::cout << "accuracy " << result.metrics.accuracy.mean << " +- " << result.metrics.accuracy.std
              << " -> " << (cfg.out_dir / name).string() << "\n";
    return 0;
}

int cmd_pca(const CliOptions& opts) {
    Context ctx(resolve_config(opts));
    const auto& cfg = ctx.cfg();
    std::optional<TdTuningResult> tuning;
    const int td = ctx.resolve_td(cfg.events, tuning);
    const Dataset& data = ctx.dataset(td, cfg.events);

    std::vector<std::vector<double>> rows;
    rows.reserve(data.samples.size());
    for (const auto& s : data.samples) rows.push_back(s.features);
    const auto result = pca_project(rows);
    print_warnings(result.warnings);

    std::ostringstream csv;
    csv << "player_id,match_id,subseq,label,pc1,pc2\n";
    for (std::size_t i = 0; i < result.kept.size(); ++i) {
        const auto& sample = data.samples[result.kept[i]];
        csv << sample.prov.player_id << ',' << sample.prov.match_id << ','
            << sample.prov.subsequence_index << ',' << to_string(sample.label) << ','
            << format_double(result.normalized[i][0]) << ','
            << format_double(result.normalized[i][1]) << '\n';
    }
    atomic_write_file(cfg.out_dir / "pca.csv", csv.str());
    std::cout << "wrote " << (cfg.out_dir / "pca.csv").string() << " (" << result.kept.size()
              << " points, " << rows.size() - result.kept.size() << " outliers dropped)\n";
    return 0;
}

int cmd_report(const CliOptions& opts) {
    Context ctx(resolve_config(opts));
    const auto& cfg = ctx.cfg();
    if (!ctx.can_vary_td()) throw ConfigError("report needs a manifest, not features_csv");

    const std::vector<ClassifierKind> kinds = {ClassifierKind::Svm, ClassifierKind::Rf,
                                               ClassifierKind::Knn};
    CnCvParams cncv = cfg.cncv;
    cncv.seed = cfg.seed;

    // filters without enough samples to fold are skipped, not fatal
    const int td_lo = std::max(1, cfg.ste.min_td());
    std::vector<EventFilter> filters;
    for (const auto filter : {EventFilter::Kill, EventFilter::Death, EventFilter::Assist,
                              EventFilter::All}) {
        const auto n = ctx.dataset(td_lo, filter).samples.size();
        if (n >= static_cast<std::size_t>(2 * cfg.k_all)) {
            filters.push_back(filter);
        } else {
            std::cerr << "warning: skipping '" << to_string(filter) << "' events (only " << n
                      << " samples)\n";
        }
    }
    if (filters.empty()) throw DataError("report: no event filter yields enough samples");

    std::vector<std::string> sweep_warnings;
    const auto sweep =
        td_sweep([&](int td, EventFilter f) -> const Dataset& { return ctx.dataset(td, f); }, td_lo,
                 10, filters, kinds, cfg.clf, cncv, cfg.k_all,
                 seed_stream(cfg.seed, seed_tag::kFolds), cfg.threads, &sweep_warnings);
    print_warnings(sweep_warnings);
    std::ostringstream csv;
    csv << "td,event_filter,classifier,accuracy_mean,accuracy_std\n";
    for (const auto& row : sweep) {
        csv << row.td << ',' << to_string(row.filter) << ',' << row.classifier << ','
            << format_double(row.accuracy_mean) << ',' << format_double(row.accuracy_std) << '\n';
    }
    atomic_write_file(cfg.out_dir / "sweep.csv", csv.str());

    // full metrics tables at the tuned window per filter; a filter whose
    // tuning or evaluation cannot run on this dataset is skipped
    json report;
    report["five_fold"] = json::object();
    for (const auto filter : filters) {
        try {
            const auto tuning = ctx.run_tuning(filter);
            const Dataset& data = ctx.dataset(tuning.averaged_td, filter);
            const auto folds = make_folds(data, cfg.k_all, FoldScheme::StratifiedRandom,
                                          seed_stream(cfg.seed, seed_tag::kFolds));
            json per_filter;
            per_filter["td"] = tuning.averaged_td;
            per_filter["per_fold_best_td"] = tuning.per_fold_best;
            for (const auto kind : kinds) {
                const auto cv = crossval_evaluate(data, kind, cfg.clf, cncv, folds, cfg.threads);
                per_filter[std::string(to_string(kind))] = metrics_json(cv.metrics);
            }
            report["five_fold"][std::string(to_string(filter))] = std::move(per_filter);
            if (filter == EventFilter::All) {
                const auto loso = make_folds(data, cfg.k_all, FoldScheme::LeaveOneSubjectOut,
                                             seed_stream(cfg.seed, seed_tag::kFolds));
                json loso_json;
                loso_json["td"] = tuning.averaged_td;
                for (const auto kind : kinds) {
                    const auto cv = crossval_evaluate(data, kind, cfg.clf, cncv, loso, cfg.threads);
                    loso_json[std::string(to_string(kind))] = metrics_json(cv.metrics);
                }
                report["loso"] = std::move(loso_json);
            }
        } catch (const Error& e) {
            std::cerr << "warning: '" << to_string(filter)
                      << "' metrics skipped: " << e.what() << "\n";
        }
    }
    if (report["five_fold"].empty()) throw DataError("report: no event filter could be evaluated");
    atomic_write_file(cfg.out_dir / "report.json", report.dump(2) + "\n");
    std::cout << "wrote " << (cfg.out_dir / "report.json").string() << " and sweep.csv\n";
    return 0;
}

int cmd_adapt(const adapt::Options& options) {
    const auto report = adapt::run(options);
    print_warnings(report.warnings);
    std::cout << "adapted " << report.matches << " match(es), " << report.players << " player(s) -> "
              << options.output_manifest.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symbolic-transfer-entropy connectivity pipeline for player skill classification"};
    app.require_subcommand(1);

    adapt::Options adapt_options;
    auto* adapt_cmd = app.add_subcommand("adapt-dataset", "convert a dataset tree to a manifest");
    adapt_cmd->add_option("--input", adapt_options.input_dir, "dataset root directory")->required();
    adapt_cmd->add_option("--output", adapt_options.output_manifest, "manifest path to write")
        ->required();
    adapt_cmd->add_option("--map", adapt_options.map_file, "filename/column mapping JSON");
    adapt_cmd->add_option("--teams", adapt_options.teams_file, "match directory -> team label JSON");

    CliOptions features_opts, tune_opts, select_opts, eval_opts, loso_opts, pca_opts, report_opts;
    add_common_options(app.add_subcommand("features", "extract the STE feature matrix"),
                       features_opts);
    add_common_options(app.add_subcommand("tune-td", "tune the extraction half-window"), tune_opts);
    add_common_options(app.add_subcommand("select", "rank the most distinguishing features"),
                       select_opts);
    add_common_options(app.add_subcommand("evaluate", "K-fold cross-validated metrics"), eval_opts);
    add_common_options(app.add_subcommand("loso", "leave-one-subject-out metrics"), loso_opts);
    add_common_options(app.add_subcommand("pca", "two-component projection of all samples"),
                       pca_opts);
    add_common_options(app.add_subcommand("report", "td sweep plus full metrics tables"),
                       report_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("adapt-dataset")) return cmd_adapt(adapt_options);
        if (app.got_subcommand("features")) return cmd_features(features_opts);
        if (app.got_subcommand("tune-td")) return cmd_tune_td(tune_opts);
        if (app.got_subcommand("select")) return cmd_select(select_opts);
        if (app.got_subcommand("evaluate")) {
            return cmd_evaluate(eval_opts, FoldScheme::StratifiedRandom);
        }
        if (app.got_subcommand("loso")) return cmd_evaluate(loso_opts, FoldScheme::LeaveOneSubjectOut);
        if (app.got_subcommand("pca")) return cmd_pca(pca_opts);
        if (app.got_subcommand("report")) return cmd_report(report_opts);
    } catch (const std::exception& e) {
        const json error = {{"error", e.what()}};
        std::cerr << error.dump() << "\n";
        return 1;
    }
    return 0;
}
