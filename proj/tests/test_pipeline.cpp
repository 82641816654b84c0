#include <doctest.h>

#include <sstream>

#include "stec/error.hpp"
#include "stec/io_util.hpp"
#include "stec/pipeline.hpp"
#include "temp_dir.hpp"

using namespace stec;
using stec_test::TempDir;

namespace {

// a tiny two-player manifest on an exact 1-second grid
void write_grid_fixture(const TempDir& dir, bool uniform = true) {
    std::string matches = R"({"matches": [)";
    bool first_match = true;
    for (const auto& [match_id, team] :
         std::vector<std::pair<std::string, std::string>>{{"ma", "Amateur"}, {"mp", "Professional"}}) {
        std::string sensors;
        for (int s = 0; s < kSensorCount; ++s) {
            std::ostringstream csv;
            csv << "timestamp,value\n";
            for (int sec = 0; sec < 200; ++sec) {
                const double t = uniform ? sec : sec + (sec % 7) * 0.03;
                csv << format_double(t) << ',' << format_double(std::sin(0.1 * sec * (s + 1)) + s)
                    << '\n';
            }
            const std::string rel = match_id + "/s" + std::to_string(s) + ".csv";
            dir.write(rel, csv.str());
            if (s) sensors += ",";
            sensors += "\"" + std::string(kSensorNames[static_cast<std::size_t>(s)]) + "\": \"" +
                       rel + "\"";
        }
        std::ostringstream moi;
        moi << "timestamp,kind\n";
        for (int e = 0; e < 8; ++e) moi << 20 + 20 * e << ",kill\n";
        dir.write(match_id + "/moi.csv", moi.str());
        if (!first_match) matches += ",";
        first_match = false;
        matches += R"({"match_id": ")" + match_id + R"(", "team_label": ")" + team +
                   R"(", "players": [{"player_id": "p1", "sensors": {)" + sensors +
                   R"(}, "moi": ")" + match_id + R"(/moi.csv"}]})";
    }
    matches += "]}";
    dir.write("manifest.json", matches);
}

}  // namespace

TEST_CASE("disabled preprocessing passes a 1-second grid through unchanged") {
    TempDir dir;
    write_grid_fixture(dir);
    const auto manifest = load_manifest(dir.path() / "manifest.json");

    PreprocessConfig off;
    off.enabled = false;
    const auto players = load_players(manifest, off, 1);
    REQUIRE(players.size() == 2);
    // values exactly as written, no smoothing applied
    CHECK(players[0].series[5].values[10] ==
          doctest::Approx(std::sin(0.1 * 10 * 6) + 5).epsilon(1e-12));
    CHECK(players[0].series[5].sample_period == 1.0);

    PreprocessConfig on;
    const auto smoothed = load_players(manifest, on, 1);
    CHECK(smoothed[0].series[5].values[10] != players[0].series[5].values[10]);
}

TEST_CASE("disabled preprocessing rejects a non-uniform grid") {
    TempDir dir;
    write_grid_fixture(dir, /*uniform=*/false);
    const auto manifest = load_manifest(dir.path() / "manifest.json");
    PreprocessConfig off;
    off.enabled = false;
    CHECK_THROWS_WITH_AS(load_players(manifest, off, 1), doctest::Contains("1-second grid"),
                         DataError);
}

TEST_CASE("build_dataset skips players with declared missing sensors") {
    TempDir dir;
    write_grid_fixture(dir);
    // drop one sensor from the professional player
    auto text = read_file(dir.path() / "manifest.json");
    const std::string needle = "\"HR\": \"mp/s8.csv\",";
    const auto pos = text.find(needle);
    REQUIRE(pos != std::string::npos);
    text.erase(pos, needle.size());
    text.replace(text.find("\"moi\": \"mp/moi.csv\""), 5, R"("missing_sensors": ["HR"], "moi")");
    dir.write("manifest2.json", text);

    const auto manifest = load_manifest(dir.path() / "manifest2.json");
    const auto players = load_players(manifest, PreprocessConfig{}, 1);
    std::vector<std::string> warnings;
    const auto data = build_dataset(players, 3, EventFilter::All, GroupingConfig{}, SteParams{},
                                    false, 1, 1, &warnings);
    for (const auto& s : data.samples) CHECK(s.label == SkillLabel::Amateur);
    bool mentioned = false;
    for (const auto& w : warnings) mentioned |= w.find("missing sensors") != std::string::npos;
    CHECK(mentioned);
}

TEST_CASE("ks_override forces the subsequence count") {
    TempDir dir;
    write_grid_fixture(dir);
    const auto manifest = load_manifest(dir.path() / "manifest.json");
    const auto players = load_players(manifest, PreprocessConfig{}, 1);

    GroupingConfig forced;
    forced.ks_override = 2;
    const auto data = build_dataset(players, 3, EventFilter::All, forced, SteParams{}, false, 1, 1);
    CHECK(data.samples.size() == 4);  // 2 players x forced K_s = 2
    int max_subseq = 0;
    for (const auto& s : data.samples) max_subseq = std::max(max_subseq, s.prov.subsequence_index);
    CHECK(max_subseq == 1);
}

TEST_CASE("single-class extraction warns instead of failing when balancing") {
    TempDir dir;
    write_grid_fixture(dir);
    auto text = read_file(dir.path() / "manifest.json");
    // keep only the amateur match
    const auto cut = text.find(R"(,{"match_id": "mp")");
    REQUIRE(cut != std::string::npos);
    text = text.substr(0, cut) + "]}";
    dir.write("manifest3.json", text);

    const auto manifest = load_manifest(dir.path() / "manifest3.json");
    const auto players = load_players(manifest, PreprocessConfig{}, 1);
    std::vector<std::string> warnings;
    const auto data = build_dataset(players, 3, EventFilter::All, GroupingConfig{}, SteParams{},
                                    true, 1, 1, &warnings);
    CHECK(!data.samples.empty());
    bool mentioned = false;
    for (const auto& w : warnings) mentioned |= w.find("balancing") != std::string::npos;
    CHECK(mentioned);
}

TEST_CASE("build_dataset is identical across thread counts") {
    TempDir dir;
    write_grid_fixture(dir);
    const auto manifest = load_manifest(dir.path() / "manifest.json");
    const auto players = load_players(manifest, PreprocessConfig{}, 1);
    const auto serial =
        build_dataset(players, 3, EventFilter::All, GroupingConfig{}, SteParams{}, true, 9, 1);
    const auto parallel =
        build_dataset(players, 3, EventFilter::All, GroupingConfig{}, SteParams{}, true, 9, 4);
    REQUIRE(serial.samples.size() == parallel.samples.size());
    for (std::size_t i = 0; i < serial.samples.size(); ++i) {
        CHECK(serial.samples[i].prov == parallel.samples[i].prov);
        CHECK(serial.samples[i].features == parallel.samples[i].features);  // bit-exact
    }
}

TEST_CASE("balanced extraction equalizes class counts") {
    TempDir dir;
    write_grid_fixture(dir);
    const auto manifest = load_manifest(dir.path() / "manifest.json");
    auto players = load_players(manifest, PreprocessConfig{}, 1);
    // duplicate the professional player's data under a second match id
    auto extra = players[1];
    extra.match_id = "mp2";
    for (auto& e : extra.events) e.match_id = "mp2";
    players.push_back(extra);

    const auto data =
        build_dataset(players, 3, EventFilter::All, GroupingConfig{}, SteParams{}, true, 1, 1);
    int amateur = 0, professional = 0;
    for (const auto& s : data.samples) {
        (s.label == SkillLabel::Professional ? professional : amateur)++;
    }
    CHECK(amateur == professional);
}
