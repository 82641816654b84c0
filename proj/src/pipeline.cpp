#include "stec/pipeline.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include <json.hpp>

#include "stec/csv.hpp"
#include "stec/error.hpp"
#include "stec/io_util.hpp"
#include "stec/parallel.hpp"
#include "stec/rng.hpp"

namespace stec {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(preprocess.outlier_threshold > 0.0)) {
        throw ConfigError("config: preprocess.outlier_threshold must be > 0");
    }
    if (!(preprocess.ema_alpha > 0.0) || preprocess.ema_alpha > 1.0) {
        throw ConfigError("config: preprocess.ema_alpha must be in (0, 1]");
    }
    if (grouping.min_events < 1 || grouping.max_events < grouping.min_events) {
        throw ConfigError("config: grouping needs 1 <= min_events <= max_events");
    }
    if (grouping.ks_override < 0) throw ConfigError("config: grouping.ks_override must be >= 0");
    ste.validate();
    if (td < 1 || td > 10) throw ConfigError("config: td must be in [1, 10]");
    if (!tune_td && 2 * td + 1 < ste.min_block_length()) {
        throw ConfigError("config: td=" + std::to_string(td) + " gives " +
                          std::to_string(2 * td + 1) + "-sample windows, too short for the ste " +
                          "embedding (needs " + std::to_string(ste.min_block_length()) + ")");
    }
    cncv.validate(kSteFeatureCount);
    clf.validate();
    if (k_all < 2) throw ConfigError("config: k_all must be >= 2");
    if (threads < 0) throw ConfigError("config: threads must be >= 0");
}

std::string PipelineConfig::to_json() const {
    json doc;
    doc["manifest"] = manifest_path.string();
    if (features_csv) doc["features_csv"] = features_csv->string();
    json sum_sensors = json::array();
    for (const auto id : preprocess.sum_sensors) sum_sensors.push_back(std::string(sensor_name(id)));
    doc["preprocess"] = {{"enabled", preprocess.enabled},
                         {"outlier_threshold", preprocess.outlier_threshold},
                         {"ema_alpha", preprocess.ema_alpha},
                         {"sum_sensors", std::move(sum_sensors)}};
    doc["grouping"] = {{"min_events", grouping.min_events},
                       {"max_events", grouping.max_events},
                       {"ks_override", grouping.ks_override}};
    doc["ste"] = {{"m", ste.m}, {"d", ste.d}, {"t", ste.t}};
    doc["td"] = tune_td ? json("tune") : json(td);
    doc["events"] = std::string(to_string(events));
    doc["balance"] = balance;
    doc["cncv"] = {{"k_train", cncv.k_train}, {"l", cncv.l}, {"n_i", cncv.n_i}, {"n_r", cncv.n_r}};
    doc["classifier"] = {{"kind", std::string(to_string(classifier))},
                         {"knn_k", clf.knn_k},
                         {"rf_trees", clf.rf_trees},
                         {"rf_max_depth", clf.rf_max_depth},
                         {"svm_c", clf.svm_c},
                         {"svm_gamma", clf.svm_gamma},
                         {"svm_tol", clf.svm_tol}};
    doc["selection_mode"] = selection_mode == RankMode::WholeDataset ? "whole" : "cv-intersection";
    doc["k_all"] = k_all;
    doc["seed"] = seed;
    doc["threads"] = threads;
    doc["out"] = out_dir.string();
    return doc.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text,
                                              const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("config: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown_keys(doc,
                        {"manifest", "features_csv", "preprocess", "grouping", "ste", "td", "events",
                         "balance", "cncv", "classifier", "selection_mode", "k_all", "seed", "threads",
                         "out"},
                        "top level");

    PipelineConfig cfg;
    if (doc.contains("manifest")) {
        cfg.manifest_path = base_dir / doc.at("manifest").get<std::string>();
    }
    if (doc.contains("features_csv")) {
        cfg.features_csv = base_dir / doc.at("features_csv").get<std::string>();
    }
    if (doc.contains("preprocess")) {
        const auto& p = doc.at("preprocess");
        reject_unknown_keys(p, {"enabled", "outlier_threshold", "ema_alpha", "sum_sensors"},
                            "preprocess");
        read_field(p, "enabled", cfg.preprocess.enabled);
        read_field(p, "outlier_threshold", cfg.preprocess.outlier_threshold);
        read_field(p, "ema_alpha", cfg.preprocess.ema_alpha);
        if (p.contains("sum_sensors")) {
            cfg.preprocess.sum_sensors.clear();
            for (const auto& name : p.at("sum_sensors")) {
                const auto id = parse_sensor_id(name.get<std::string>());
                if (!id) throw ConfigError("config: unknown sensor '" + name.get<std::string>() +
                                           "' in preprocess.sum_sensors");
                cfg.preprocess.sum_sensors.insert(*id);
            }
        }
    }
    if (doc.contains("grouping")) {
        const auto& g = doc.at("grouping");
        reject_unknown_keys(g, {"min_events", "max_events", "ks_override"}, "grouping");
        read_field(g, "min_events", cfg.grouping.min_events);
        read_field(g, "max_events", cfg.grouping.max_events);
        read_field(g, "ks_override", cfg.grouping.ks_override);
    }
    if (doc.contains("ste")) {
        const auto& s = doc.at("ste");
        reject_unknown_keys(s, {"m", "d", "t"}, "ste");
        read_field(s, "m", cfg.ste.m);
        read_field(s, "d", cfg.ste.d);
        read_field(s, "t", cfg.ste.t);
    }
    if (doc.contains("td")) {
        const auto& td = doc.at("td");
        if (td.is_string()) {
            if (td.get<std::string>() != "tune") throw ConfigError("config: td must be 1..10 or 'tune'");
            cfg.tune_td = true;
        } else {
            cfg.td = td.get<int>();
        }
    }
    if (doc.contains("events")) {
        const auto filter = parse_event_filter(doc.at("events").get<std::string>());
        if (!filter) throw ConfigError("config: events must be kill|death|assist|all");
        cfg.events = *filter;
    }
    read_field(doc, "balance", cfg.balance);
    if (doc.contains("cncv")) {
        const auto& c = doc.at("cncv");
        reject_unknown_keys(c, {"k_train", "l", "n_i", "n_r"}, "cncv");
        read_field(c, "k_train", cfg.cncv.k_train);
        read_field(c, "l", cfg.cncv.l);
        read_field(c, "n_i", cfg.cncv.n_i);
        read_field(c, "n_r", cfg.cncv.n_r);
    }
    if (doc.contains("classifier")) {
        const auto& c = doc.at("classifier");
        reject_unknown_keys(c, {"kind", "knn_k", "rf_trees", "rf_max_depth", "svm_c", "svm_gamma",
                                "svm_tol"},
                            "classifier");
        if (c.contains("kind")) {
            const auto kind = parse_classifier_kind(c.at("kind").get<std::string>());
            if (!kind) throw ConfigError("config: classifier.kind must be svm|rf|knn");
            cfg.classifier = *kind;
        }
        read_field(c, "knn_k", cfg.clf.knn_k);
        read_field(c, "rf_trees", cfg.clf.rf_trees);
        read_field(c, "rf_max_depth", cfg.clf.rf_max_depth);
        read_field(c, "svm_c", cfg.clf.svm_c);
        read_field(c, "svm_gamma", cfg.clf.svm_gamma);
        read_field(c, "svm_tol", cfg.clf.svm_tol);
    }
    if (doc.contains("selection_mode")) {
        const std::string mode = doc.at("selection_mode").get<std::string>();
        if (mode == "whole") cfg.selection_mode = RankMode::WholeDataset;
        else if (mode == "cv-intersection") cfg.selection_mode = RankMode::CvIntersection;
        else throw ConfigError("config: selection_mode must be whole|cv-intersection");
    }
    read_field(doc, "k_all", cfg.k_all);
    read_field(doc, "seed", cfg.seed);
    read_field(doc, "threads", cfg.threads);
    if (doc.contains("out")) cfg.out_dir = base_dir / doc.at("out").get<std::string>();
    cfg.validate();
    return cfg;
}

PipelineConfig PipelineConfig::from_json_file(const std::filesystem::path& path) {
    return from_json_text(read_file(path), path.parent_path());
}

std::vector<PlayerData> load_players(const Manifest& manifest, const PreprocessConfig& cfg,
                                     int threads) {
    struct Job {
        const MatchRecord* match;
        const PlayerRecord* player;
    };
    std::vector<Job> jobs;
    for (const auto& match : manifest.matches) {
        for (const auto& player : match.players) jobs.push_back({&match, &player});
    }

    std::vector<PlayerData> players(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        const auto& [match, player] = jobs[j];
        PlayerData data;
        data.match_id = match->match_id;
        data.player_id = player->player_id;
        data.label = match->team_label;
        data.complete = player->has_all_sensors();
        data.events = load_moi(player->moi_path, match->match_id, player->player_id);

        if (data.complete) {
            for (const auto& [id, source] : player->sensors) {
                const auto raw = load_sensor_csv(source.path);
                const ResampleMode mode =
                    source.resample.value_or(cfg.sum_sensors.count(id) ? ResampleMode::Sum
                                                                       : ResampleMode::Mean);
                SensorSeries series;
                if (cfg.enabled) {
                    series = resample_1s(raw, mode);
                    series = ema_smooth(series, cfg.ema_alpha);
                    series = remove_outliers(series, cfg.outlier_threshold);
                } else {
                    // dataset ships preprocessed: require the unified 1 s grid
                    series.start_time = raw.front().t;
                    series.sample_period = 1.0;
                    series.values.reserve(raw.size());
                    for (std::size_t i = 0; i < raw.size(); ++i) {
                        if (std::abs(raw[i].t - (raw.front().t + double(i))) > 1e-6) {
                            throw DataError("sensor " + std::string(sensor_name(id)) + " of " +
                                            data.player_id + "/" + data.match_id +
                                            " is not on a 1-second grid; enable preprocessing");
                        }
                        series.values.push_back(raw[i].value);
                    }
                }
                series.sensor = id;
                series.player_id = data.player_id;
                series.match_id = data.match_id;
                data.series[static_cast<std::size_t>(static_cast<int>(id))] = std::move(series);
            }
        }
        players[j] = std::move(data);
    });
    return players;
}

namespace {

// explicit K_s override: contiguous, near-equal split without the [min,max] rule
std::vector<std::vector<MoiEvent>> split_fixed(const std::vector<MoiEvent>& events, int k) {
    std::vector<std::vector<MoiEvent>> groups;
    const int count = static_cast<int>(events.size());
    if (k > count) throw DataError("grouping: ks_override exceeds event count");
    const int base = count / k;
    const int extra = count % k;
    int offset = 0;
    for (int g = 0; g < k; ++g) {
        const int size = base + (g < extra ? 1 : 0);
        groups.emplace_back(events.begin() + offset, events.begin() + offset + size);
        offset += size;
    }
    return groups;
}

}  // namespace

Dataset build_dataset(const std::vector<PlayerData>& players, int td, EventFilter filter,
                      const GroupingConfig& grouping, const SteParams& ste_params, bool balance,
                      std::uint64_t seed, int threads, std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& message) {
        if (warnings) warnings->push_back(message);
    };

    WindowParams window{td, 1.0};
    window.validate();

    struct GroupJob {
        EventGroup group;
        SkillLabel label;
    };
    std::vector<GroupJob> jobs;

    for (const auto& player : players) {
        const std::string who = player.player_id + "/" + player.match_id;
        if (!player.complete) {
            warn(who + ": skipped (missing sensors)");
            continue;
        }
        std::vector<MoiEvent> selected;
        for (const auto& e : player.events) {
            if (filter_matches(filter, e.kind)) selected.push_back(e);
        }
        if (static_cast<int>(selected.size()) < grouping.min_events) {
            warn(who + ": only " + std::to_string(selected.size()) + " " +
                 std::string(to_string(filter)) + " events, below min " +
                 std::to_string(grouping.min_events) + "; no groups");
            continue;
        }

        std::vector<std::vector<MoiEvent>> groups;
        if (grouping.ks_override > 0) {
            groups = split_fixed(selected, grouping.ks_override);
        } else {
            groups = split_subsequences(selected, grouping.min_events, grouping.max_events).groups;
        }

        int subseq = 0;
        for (const auto& group_events : groups) {
            auto built = build_event_group(player.series, group_events, window, EventFilter::All,
                                           grouping.min_events);
            if (!built.dropped.empty()) {
                warn(who + ": dropped " + std::to_string(built.dropped.size()) +
                     " event(s) too close to the series boundary");
            }
            if (!built.group) {
                warn(who + ": subsequence " + std::to_string(subseq) +
                     " rejected (fewer than min_events after boundary drops)");
                ++subseq;
                continue;
            }
            built.group->player_id = player.player_id;
            built.group->match_id = player.match_id;
            built.group->subsequence_index = subseq;
            jobs.push_back({std::move(*built.group), player.label});
            ++subseq;
        }
    }

    Dataset dataset;
    dataset.feature_names = ste_feature_names();
    dataset.samples.resize(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        LabeledSample sample;
        sample.features = ste_feature_vector(jobs[j].group, ste_params);
        sample.label = jobs[j].label;
        sample.prov = {jobs[j].group.player_id, jobs[j].group.match_id,
                       jobs[j].group.subsequence_index};
        dataset.samples[j] = std::move(sample);
    });

    if (balance && !dataset.samples.empty()) {
        bool a = false, p = false;
        for (const auto& s : dataset.samples) (s.label == SkillLabel::Professional ? p : a) = true;
        if (a && p) {
            dataset.samples = balance_classes(dataset.samples, seed_stream(seed, seed_tag::kBalance));
        } else {
            warn("single-class dataset; skipping class balancing");
        }
    }
    return dataset;
}

DatasetCache::DatasetCache(std::vector<PlayerData> players, GroupingConfig grouping,
                           SteParams ste_params, bool balance, std::uint64_t seed, int threads)
    : players_(std::move(players)),
      grouping_(grouping),
      ste_params_(ste_params),
      balance_(balance),
      seed_(seed),
      threads_(threads) {}

const Dataset& DatasetCache::get(int td, EventFilter filter) {
    const auto key = std::make_pair(td, static_cast<int>(filter));
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        it = cache_
                 .emplace(key, build_dataset(players_, td, filter, grouping_, ste_params_, balance_,
                                             seed_, threads_, &warnings_))
                 .first;
    }
    return it->second;
}

std::vector<std::string> DatasetCache::take_warnings() {
    return std::exchange(warnings_, {});
}

}  // namespace stec
