#include "stec/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

#include "stec/error.hpp"

namespace stec {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

void expect_header(const std::vector<std::string>& header, const std::vector<std::string>& expected,
                   const std::filesystem::path& path) {
    if (header.size() != expected.size()) {
        throw ParseError("bad CSV header in " + path.string());
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (lower(header[i]) != expected[i]) {
            throw ParseError("bad CSV header in " + path.string() + ": expected '" + expected[i] +
                             "', got '" + header[i] + "'");
        }
    }
}

}  // namespace

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open CSV file: " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        rows.push_back(split_fields(line));
    }
    return rows;
}

double parse_double_field(const std::string& field, const std::filesystem::path& path,
                          std::size_t line) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("bad number '" + field + "' in " + path.string() + " line " +
                         std::to_string(line));
    }
    return value;
}

std::vector<TimedSample> load_sensor_csv(const std::filesystem::path& path) {
    const auto rows = read_csv_rows(path);
    if (rows.empty()) throw ParseError("empty sensor CSV: " + path.string());
    expect_header(rows[0], {"timestamp", "value"}, path);

    std::vector<TimedSample> samples;
    samples.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 2) {
            throw ParseError("expected 2 fields in " + path.string() + " line " + std::to_string(i + 1));
        }
        TimedSample s;
        s.t = parse_double_field(rows[i][0], path, i + 1);
        s.value = parse_double_field(rows[i][1], path, i + 1);
        if (!samples.empty() && s.t < samples.back().t) {
            throw DataError("timestamps not nondecreasing in " + path.string() + " line " +
                            std::to_string(i + 1));
        }
        samples.push_back(s);
    }
    return samples;
}

std::vector<MoiEvent> load_moi(const std::filesystem::path& path, const std::string& match_id,
                               const std::string& player_id) {
    const auto rows = read_csv_rows(path);
    if (rows.empty()) throw ParseError("empty MoI CSV: " + path.string());
    expect_header(rows[0], {"timestamp", "kind"}, path);

    std::vector<MoiEvent> events;
    events.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 2) {
            throw ParseError("expected 2 fields in " + path.string() + " line " + std::to_string(i + 1));
        }
        MoiEvent e;
        e.match_id = match_id;
        e.player_id = player_id;
        e.t_e = parse_double_field(rows[i][0], path, i + 1);
        const auto kind = parse_moi_kind(rows[i][1]);
        if (!kind) {
            throw DataError("unknown event kind '" + rows[i][1] + "' in " + path.string() + " line " +
                            std::to_string(i + 1));
        }
        e.kind = *kind;
        events.push_back(e);
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const MoiEvent& a, const MoiEvent& b) { return a.t_e < b.t_e; });
    return events;
}

}  // namespace stec
