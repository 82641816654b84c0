#include "stec/manifest.hpp"

#include <set>

#include <json.hpp>

#include "stec/error.hpp"
#include "stec/io_util.hpp"

namespace stec {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw ParseError("manifest: unknown key '" + key + "' in " + where);
    }
}

SensorSource parse_sensor_source(const json& value, const std::filesystem::path& root,
                                 const std::string& where) {
    SensorSource src;
    if (value.is_string()) {
        src.path = root / value.get<std::string>();
        return src;
    }
    if (!value.is_object()) throw ParseError("manifest: sensor entry must be a path or object in " + where);
    reject_unknown_keys(value, {"path", "resample"}, where);
    if (!value.contains("path")) throw ParseError("manifest: sensor entry missing 'path' in " + where);
    src.path = root / value.at("path").get<std::string>();
    if (value.contains("resample")) {
        const std::string mode = value.at("resample").get<std::string>();
        if (mode == "mean") src.resample = ResampleMode::Mean;
        else if (mode == "sum") src.resample = ResampleMode::Sum;
        else throw ParseError("manifest: resample must be 'mean' or 'sum' in " + where);
    }
    return src;
}

void require_file(const std::filesystem::path& path, const std::string& where) {
    if (!std::filesystem::exists(path)) {
        throw DataError("manifest: missing file '" + path.string() + "' referenced by " + where);
    }
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError("manifest: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ParseError("manifest: top level must be an object");
    reject_unknown_keys(doc, {"matches"}, "top level");
    if (!doc.contains("matches") || !doc.at("matches").is_array()) {
        throw ParseError("manifest: 'matches' array required");
    }

    Manifest manifest;
    manifest.root = path.parent_path();
    std::set<std::string> match_ids;
    std::set<std::pair<std::string, std::string>> player_keys;

    for (const auto& match_json : doc.at("matches")) {
        if (!match_json.is_object()) throw ParseError("manifest: match entry must be an object");
        reject_unknown_keys(match_json, {"match_id", "team_label", "players"}, "match entry");

        MatchRecord match;
        match.match_id = match_json.at("match_id").get<std::string>();
        if (!match_ids.insert(match.match_id).second) {
            throw DataError("manifest: duplicate match_id '" + match.match_id + "'");
        }
        const auto label = parse_skill_label(match_json.at("team_label").get<std::string>());
        if (!label) {
            throw ParseError("manifest: team_label must be Amateur or Professional in match '" +
                             match.match_id + "'");
        }
        match.team_label = *label;

        for (const auto& player_json : match_json.at("players")) {
            const std::string where = "match '" + match.match_id + "'";
            reject_unknown_keys(player_json, {"player_id", "sensors", "missing_sensors", "moi"}, where);

            PlayerRecord player;
            player.player_id = player_json.at("player_id").get<std::string>();
            if (!player_keys.insert({match.match_id, player.player_id}).second) {
                throw DataError("manifest: duplicate (match_id, player_id) ('" + match.match_id +
                                "', '" + player.player_id + "')");
            }
            const std::string pwhere = where + " player '" + player.player_id + "'";

            for (const auto& [name, value] : player_json.at("sensors").items()) {
                const auto id = parse_sensor_id(name);
                if (!id) throw ParseError("manifest: unknown sensor '" + name + "' in " + pwhere);
                player.sensors[*id] = parse_sensor_source(value, manifest.root, pwhere);
            }
            if (player_json.contains("missing_sensors")) {
                for (const auto& name : player_json.at("missing_sensors")) {
                    const auto id = parse_sensor_id(name.get<std::string>());
                    if (!id) {
                        throw ParseError("manifest: unknown sensor '" + name.get<std::string>() +
                                         "' in missing_sensors of " + pwhere);
                    }
                    if (player.sensors.count(*id)) {
                        throw DataError("manifest: sensor '" + std::string(sensor_name(*id)) +
                                        "' both supplied and missing in " + pwhere);
                    }
                    player.missing_sensors.push_back(*id);
                }
            }
            // every declared channel is either supplied or explicitly missing
            if (player.sensors.size() + player.missing_sensors.size() !=
                static_cast<std::size_t>(kSensorCount)) {
                throw DataError("manifest: " + pwhere + " must account for all " +
                                std::to_string(kSensorCount) +
                                " sensors via 'sensors' or 'missing_sensors'");
            }

            player.moi_path = manifest.root / player_json.at("moi").get<std::string>();
            require_file(player.moi_path, pwhere);
            for (const auto& [id, src] : player.sensors) {
                require_file(src.path, pwhere + " sensor " + std::string(sensor_name(id)));
            }
            match.players.push_back(std::move(player));
        }
        manifest.matches.push_back(std::move(match));
    }
    return manifest;
}

}  // namespace stec
