#include "stec/dataset.hpp"

#include <algorithm>
#include <sstream>

#include "stec/csv.hpp"
#include "stec/error.hpp"
#include "stec/io_util.hpp"
#include "stec/rng.hpp"

namespace stec {

std::string ste_feature_name(int index) {
    if (index < 0 || index >= kSteFeatureCount) {
        throw DataError("ste_feature_name: index out of range");
    }
    const auto src = static_cast<SensorId>(index / kSensorCount);
    const auto dst = static_cast<SensorId>(index % kSensorCount);
    return "STE_" + std::string(sensor_name(src)) + "_to_" + std::string(sensor_name(dst));
}

int ste_feature_index(const std::string& name) {
    if (name.rfind("STE_", 0) == 0) {
        const std::string body = name.substr(4);
        const auto sep = body.find("_to_");
        if (sep != std::string::npos) {
            const auto src = parse_sensor_id(body.substr(0, sep));
            const auto dst = parse_sensor_id(body.substr(sep + 4));
            if (src && dst) return static_cast<int>(*src) * kSensorCount + static_cast<int>(*dst);
        }
    }
    throw DataError("unknown feature name '" + name + "'");
}

std::vector<std::string> ste_feature_names() {
    std::vector<std::string> names;
    names.reserve(kSteFeatureCount);
    for (int i = 0; i < kSteFeatureCount; ++i) names.push_back(ste_feature_name(i));
    return names;
}

std::vector<LabeledSample> balance_classes(const std::vector<LabeledSample>& samples,
                                           std::uint64_t seed) {
    std::vector<std::size_t> amateurs, professionals;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (samples[i].label == SkillLabel::Amateur ? amateurs : professionals).push_back(i);
    }
    if (amateurs.empty() || professionals.empty()) {
        throw DataError("balance_classes: a class has zero samples");
    }

    auto rng = make_rng(seed, 0xbacL);
    auto& majority = amateurs.size() >= professionals.size() ? amateurs : professionals;
    const std::size_t target = std::min(amateurs.size(), professionals.size());
    deterministic_shuffle(majority, rng);
    majority.resize(target);

    std::vector<std::size_t> chosen;
    chosen.insert(chosen.end(), amateurs.begin(), amateurs.end());
    chosen.insert(chosen.end(), professionals.begin(), professionals.end());
    std::sort(chosen.begin(), chosen.end());
    deterministic_shuffle(chosen, rng);

    std::vector<LabeledSample> out;
    out.reserve(chosen.size());
    for (const auto i : chosen) out.push_back(samples[i]);
    return out;
}

void write_feature_csv(const std::filesystem::path& path, const Dataset& dataset) {
    std::ostringstream csv;
    csv << "player_id,match_id,subseq,label";
    for (const auto& name : dataset.feature_names) csv << ',' << name;
    csv << '\n';
    for (const auto& sample : dataset.samples) {
        if (sample.features.size() != dataset.feature_names.size()) {
            throw DataError("write_feature_csv: inconsistent feature length");
        }
        csv << sample.prov.player_id << ',' << sample.prov.match_id << ','
            << sample.prov.subsequence_index << ',' << to_string(sample.label);
        for (const double v : sample.features) csv << ',' << format_double(v);
        csv << '\n';
    }
    atomic_write_file(path, csv.str());
}

Dataset read_feature_csv(const std::filesystem::path& path) {
    const auto rows = read_csv_rows(path);
    if (rows.empty()) throw ParseError("empty feature CSV: " + path.string());
    const auto& header = rows[0];
    if (header.size() < 5 || header[0] != "player_id" || header[1] != "match_id" ||
        header[2] != "subseq" || header[3] != "label") {
        throw ParseError("bad feature CSV header in " + path.string());
    }

    Dataset dataset;
    dataset.feature_names.assign(header.begin() + 4, header.end());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            throw ParseError("bad field count in " + path.string() + " line " + std::to_string(r + 1));
        }
        LabeledSample sample;
        sample.prov.player_id = row[0];
        sample.prov.match_id = row[1];
        sample.prov.subsequence_index = static_cast<int>(parse_double_field(row[2], path, r + 1));
        const auto label = parse_skill_label(row[3]);
        if (!label) throw ParseError("bad label '" + row[3] + "' in " + path.string());
        sample.label = *label;
        sample.features.reserve(dataset.feature_names.size());
        for (std::size_t c = 4; c < row.size(); ++c) {
            sample.features.push_back(parse_double_field(row[c], path, r + 1));
        }
        dataset.samples.push_back(std::move(sample));
    }
    return dataset;
}

}  // namespace stec
