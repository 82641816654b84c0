#include "adapt_dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stec/csv.hpp"
#include "stec/error.hpp"
#include "stec/io_util.hpp"
#include "stec/series.hpp"

namespace stec::adapt {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct SensorSpec {
    SensorId sensor;
    std::string time_column = "timestamp";
    std::string value_column = "value";
    std::vector<std::string> magnitude_columns;  // overrides value_column when set
};

struct MoiSpec {
    std::string file = "moi.csv";
    std::string time_column = "timestamp";
    std::string kind_column = "kind";
};

struct Mapping {
    std::map<std::string, SensorSpec> by_filename;  // lowercased filename -> spec
    MoiSpec moi;
};

Mapping load_mapping(const std::filesystem::path& map_file) {
    Mapping mapping;
    // canonical layout: <SENSOR>.csv with timestamp,value columns
    for (int i = 0; i < kSensorCount; ++i) {
        const auto id = static_cast<SensorId>(i);
        SensorSpec spec;
        spec.sensor = id;
        mapping.by_filename[lower(std::string(sensor_name(id))) + ".csv"] = spec;
    }
    if (map_file.empty()) return mapping;

    json doc;
    try {
        doc = json::parse(read_file(map_file));
    } catch (const json::parse_error& e) {
        throw ParseError("adapt-dataset map: " + std::string(e.what()));
    }
    if (doc.contains("sensors")) {
        for (const auto& [filename, entry] : doc.at("sensors").items()) {
            SensorSpec spec;
            const auto id = parse_sensor_id(entry.at("sensor").get<std::string>());
            if (!id) {
                throw ParseError("adapt-dataset map: unknown sensor '" +
                                 entry.at("sensor").get<std::string>() + "'");
            }
            spec.sensor = *id;
            if (entry.contains("time_column")) spec.time_column = entry.at("time_column");
            if (entry.contains("value_column")) spec.value_column = entry.at("value_column");
            if (entry.contains("magnitude_columns")) {
                spec.magnitude_columns =
                    entry.at("magnitude_columns").get<std::vector<std::string>>();
            }
            mapping.by_filename[lower(filename)] = spec;
        }
    }
    if (doc.contains("moi")) {
        const auto& moi = doc.at("moi");
        if (moi.contains("file")) mapping.moi.file = moi.at("file");
        if (moi.contains("time_column")) mapping.moi.time_column = moi.at("time_column");
        if (moi.contains("kind_column")) mapping.moi.kind_column = moi.at("kind_column");
    }
    return mapping;
}

std::map<std::string, SkillLabel> load_teams(const std::filesystem::path& teams_file) {
    std::map<std::string, SkillLabel> teams;
    if (teams_file.empty()) return teams;
    json doc;
    try {
        doc = json::parse(read_file(teams_file));
    } catch (const json::parse_error& e) {
        throw ParseError("adapt-dataset teams: " + std::string(e.what()));
    }
    for (const auto& [match_dir, label] : doc.items()) {
        const auto parsed = parse_skill_label(label.get<std::string>());
        if (!parsed) throw ParseError("adapt-dataset teams: bad label for '" + match_dir + "'");
        teams[match_dir] = *parsed;
    }
    return teams;
}

std::optional<SkillLabel> infer_team(const std::string& dir_name,
                                     const std::map<std::string, SkillLabel>& teams) {
    if (const auto it = teams.find(dir_name); it != teams.end()) return it->second;
    const std::string name = lower(dir_name);
    if (name.find("amateur") != std::string::npos) return SkillLabel::Amateur;
    if (name.find("pro") != std::string::npos) return SkillLabel::Professional;
    return std::nullopt;
}

std::optional<std::size_t> column_index(const std::vector<std::string>& header,
                                        const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (lower(header[i]) == lower(name)) return i;
    }
    return std::nullopt;
}

// returns the converted `timestamp,value` body, or nullopt with a reason
std::optional<std::string> convert_sensor_csv(const std::filesystem::path& file,
                                              const SensorSpec& spec, std::string& reason) {
    const auto rows = read_csv_rows(file);
    if (rows.size() < 2) {
        reason = "no data rows";
        return std::nullopt;
    }
    const auto time_col = column_index(rows[0], spec.time_column);
    if (!time_col) {
        reason = "missing time column '" + spec.time_column + "'";
        return std::nullopt;
    }
    std::vector<std::size_t> value_cols;
    if (spec.magnitude_columns.empty()) {
        const auto col = column_index(rows[0], spec.value_column);
        if (!col) {
            reason = "missing value column '" + spec.value_column + "'";
            return std::nullopt;
        }
        value_cols.push_back(*col);
    } else {
        for (const auto& name : spec.magnitude_columns) {
            const auto col = column_index(rows[0], name);
            if (!col) {
                reason = "missing magnitude column '" + name + "'";
                return std::nullopt;
            }
            value_cols.push_back(*col);
        }
    }

    struct Row {
        double t;
        double v;
    };
    std::vector<Row> parsed;
    std::size_t skipped = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        try {
            const double t = parse_double_field(rows[r].at(*time_col), file, r + 1);
            double v = 0.0;
            if (value_cols.size() == 1) {
                v = parse_double_field(rows[r].at(value_cols[0]), file, r + 1);
            } else {
                for (const auto c : value_cols) {
                    const double x = parse_double_field(rows[r].at(c), file, r + 1);
                    v += x * x;
                }
                v = std::sqrt(v);
            }
            parsed.push_back({t, v});
        } catch (const Error&) {
            ++skipped;
        } catch (const std::out_of_range&) {
            ++skipped;
        }
    }
    if (parsed.empty()) {
        reason = "no parseable rows";
        return std::nullopt;
    }
    std::stable_sort(parsed.begin(), parsed.end(),
                     [](const Row& a, const Row& b) { return a.t < b.t; });
    std::ostringstream out;
    out << "timestamp,value\n";
    for (const auto& row : parsed) {
        out << format_double(row.t) << ',' << format_double(row.v) << '\n';
    }
    if (skipped) reason = std::to_string(skipped) + " unparseable row(s) skipped";
    return out.str();
}

std::optional<std::string> convert_moi_csv(const std::filesystem::path& file, const MoiSpec& spec,
                                           std::string& reason) {
    const auto rows = read_csv_rows(file);
    if (rows.empty()) {
        reason = "empty file";
        return std::nullopt;
    }
    const auto time_col = column_index(rows[0], spec.time_column);
    const auto kind_col = column_index(rows[0], spec.kind_column);
    if (!time_col || !kind_col) {
        reason = "missing '" + spec.time_column + "' or '" + spec.kind_column + "' column";
        return std::nullopt;
    }
    std::ostringstream out;
    out << "timestamp,kind\n";
    std::size_t kept = 0, skipped = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        try {
            const double t = parse_double_field(rows[r].at(*time_col), file, r + 1);
            const auto kind = parse_moi_kind(rows[r].at(*kind_col));
            if (!kind) {
                ++skipped;  // non-MoI game events are expected in real logs
                continue;
            }
            out << format_double(t) << ',' << to_string(*kind) << '\n';
            ++kept;
        } catch (const Error&) {
            ++skipped;
        } catch (const std::out_of_range&) {
            ++skipped;
        }
    }
    if (kept == 0) {
        reason = "no kill/death/assist rows";
        return std::nullopt;
    }
    if (skipped) reason = std::to_string(skipped) + " non-MoI row(s) skipped";
    return out.str();
}

}  // namespace

Report run(const Options& options) {
    if (!std::filesystem::is_directory(options.input_dir)) {
        throw DataError("adapt-dataset: input '" + options.input_dir.string() +
                        "' is not a directory");
    }
    const auto mapping = load_mapping(options.map_file);
    const auto teams = load_teams(options.teams_file);
    const auto out_root = options.output_manifest.parent_path().empty()
                              ? std::filesystem::path(".")
                              : options.output_manifest.parent_path();

    Report report;
    json matches = json::array();
    std::vector<std::string> seen_entries;

    std::vector<std::filesystem::path> match_dirs;
    for (const auto& entry : std::filesystem::directory_iterator(options.input_dir)) {
        if (entry.is_directory()) match_dirs.push_back(entry.path());
        else seen_entries.push_back(entry.path().filename().string());
    }
    std::sort(match_dirs.begin(), match_dirs.end());

    for (const auto& match_dir : match_dirs) {
        const std::string match_id = match_dir.filename().string();
        const auto team = infer_team(match_id, teams);
        if (!team) {
            report.warnings.push_back("match '" + match_id +
                                      "': cannot infer team (name it *amateur*/*pro* or use --teams)");
            continue;
        }

        std::vector<std::filesystem::path> player_dirs;
        for (const auto& entry : std::filesystem::directory_iterator(match_dir)) {
            if (entry.is_directory()) player_dirs.push_back(entry.path());
        }
        std::sort(player_dirs.begin(), player_dirs.end());
        if (player_dirs.empty()) {
            report.warnings.push_back("match '" + match_id + "': no player directories");
            continue;
        }

        json players = json::array();
        for (const auto& player_dir : player_dirs) {
            const std::string player_id = player_dir.filename().string();
            const std::string who = match_id + "/" + player_id;
            const auto rel_dir = std::filesystem::path(match_id) / player_id;

            json sensors = json::object();
            std::set<int> mapped;
            bool moi_written = false;
            std::string reason;

            std::vector<std::filesystem::path> files;
            for (const auto& entry : std::filesystem::directory_iterator(player_dir)) {
                if (entry.is_regular_file()) files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());

            for (const auto& file : files) {
                const std::string name = lower(file.filename().string());
                if (name == lower(mapping.moi.file)) {
                    reason.clear();
                    if (const auto body = convert_moi_csv(file, mapping.moi, reason)) {
                        atomic_write_file(out_root / rel_dir / "moi.csv", *body);
                        moi_written = true;
                        if (!reason.empty()) report.warnings.push_back(who + "/moi: " + reason);
                    } else {
                        report.warnings.push_back(who + "/moi: " + reason);
                    }
                    continue;
                }
                const auto it = mapping.by_filename.find(name);
                if (it == mapping.by_filename.end()) {
                    report.warnings.push_back(who + ": unmapped file '" + file.filename().string() +
                                              "'");
                    continue;
                }
                reason.clear();
                const auto body = convert_sensor_csv(file, it->second, reason);
                if (!body) {
                    report.warnings.push_back(who + "/" + file.filename().string() + ": " + reason);
                    continue;
                }
                if (!reason.empty()) {
                    report.warnings.push_back(who + "/" + file.filename().string() + ": " + reason);
                }
                const std::string sensor = std::string(sensor_name(it->second.sensor));
                atomic_write_file(out_root / rel_dir / (sensor + ".csv"), *body);
                sensors[sensor] = (rel_dir / (sensor + ".csv")).generic_string();
                mapped.insert(static_cast<int>(it->second.sensor));
            }

            if (!moi_written) {
                report.warnings.push_back(who + ": no MoI file ('" + mapping.moi.file + "')");
                continue;
            }
            if (mapped.empty()) {
                report.warnings.push_back(who + ": no sensor files recognized");
                continue;
            }

            json missing = json::array();
            for (int i = 0; i < kSensorCount; ++i) {
                if (!mapped.count(i)) {
                    missing.push_back(std::string(sensor_name(static_cast<SensorId>(i))));
                    report.warnings.push_back(
                        who + ": sensor " + std::string(sensor_name(static_cast<SensorId>(i))) +
                        " missing");
                }
            }

            json player = {{"player_id", player_id},
                           {"sensors", std::move(sensors)},
                           {"moi", (rel_dir / "moi.csv").generic_string()}};
            if (!missing.empty()) player["missing_sensors"] = std::move(missing);
            players.push_back(std::move(player));
            ++report.players;
        }

        if (players.empty()) {
            report.warnings.push_back("match '" + match_id + "': no usable players");
            continue;
        }
        matches.push_back({{"match_id", match_id},
                           {"team_label", std::string(to_string(*team))},
                           {"players", std::move(players)}});
        ++report.matches;
    }

    if (report.matches == 0) {
        std::string found = "adapt-dataset: unrecognized layout under '" +
                            options.input_dir.string() + "'; found:";
        for (const auto& dir : match_dirs) found += " " + dir.filename().string() + "/";
        for (const auto& f : seen_entries) found += " " + f;
        for (const auto& w : report.warnings) found += "\n  " + w;
        throw DataError(found);
    }

    const json manifest = {{"matches", std::move(matches)}};
    atomic_write_file(options.output_manifest, manifest.dump(2) + "\n");
    return report;
}

}  // namespace stec::adapt
