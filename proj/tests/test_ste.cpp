#include <doctest.h>

#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "stec/dataset.hpp"
#include "stec/error.hpp"
#include "stec/rng.hpp"
#include "stec/ste.hpp"

using namespace stec;

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) / 9007199254740992.0;
}

std::vector<double> random_series(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform01(rng);
    return v;
}

// Independent oracle: evaluate the transfer-entropy sum directly from
// explicit probability estimates over pattern tuples, without sharing any
// code with the library implementation.
using Pattern = std::vector<int>;

Pattern oracle_pattern(const std::vector<double>& x, std::size_t i, int m, int d) {
    std::vector<std::pair<double, int>> vals;
    for (int j = 0; j < m; ++j) {
        vals.emplace_back(x[i + static_cast<std::size_t>(j * d)], j);
    }
    std::stable_sort(vals.begin(), vals.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    Pattern p;
    for (const auto& [_, pos] : vals) p.push_back(pos);
    return p;
}

double oracle_ste(const std::vector<double>& src, const std::vector<double>& dst, int m, int d,
                  int t) {
    const int reach = (m - 1) * d;
    const auto n = static_cast<std::ptrdiff_t>(dst.size());
    std::map<std::tuple<Pattern, Pattern, Pattern>, double> p_xyz;
    std::map<std::pair<Pattern, Pattern>, double> p_xy, p_xx;
    std::map<Pattern, double> p_x;
    double total = 0.0;
    for (std::ptrdiff_t i = 0; i + t + reach < n; ++i) {
        const auto x_now = oracle_pattern(dst, static_cast<std::size_t>(i), m, d);
        const auto x_next = oracle_pattern(dst, static_cast<std::size_t>(i + t), m, d);
        const auto y_now = oracle_pattern(src, static_cast<std::size_t>(i), m, d);
        p_xyz[{x_next, x_now, y_now}] += 1.0;
        p_xy[{x_now, y_now}] += 1.0;
        p_xx[{x_next, x_now}] += 1.0;
        p_x[x_now] += 1.0;
        total += 1.0;
    }
    double sum = 0.0;
    for (const auto& [key, count] : p_xyz) {
        const auto& [x_next, x_now, y_now] = key;
        const double joint = count / total;
        const double cond_full = (count / total) / (p_xy.at({x_now, y_now}) / total);
        const double cond_self = (p_xx.at({x_next, x_now}) / total) / (p_x.at(x_now) / total);
        sum += joint * std::log2(cond_full / cond_self);
    }
    return sum;
}

double library_ste(const std::vector<double>& src, const std::vector<double>& dst,
                   const SteParams& params) {
    const std::vector<int> blocks = {static_cast<int>(dst.size())};
    const auto sy = symbol_sequence(src, blocks, params);
    const auto sx = symbol_sequence(dst, blocks, params);
    return ste(sy, sx, params);
}

}  // namespace

TEST_CASE("ordinal_pattern ranks window positions of sorted values") {
    CHECK(ordinal_pattern(std::vector<double>{4.5, 2.1, 7.3}) == std::vector<int>{2, 1, 3});
    CHECK(ordinal_pattern(std::vector<double>{1.0, 1.0, 1.0}) == std::vector<int>{1, 2, 3});
    CHECK(ordinal_pattern(std::vector<double>{9.0, 5.0}) == std::vector<int>{2, 1});
}

TEST_CASE("symbol_sequence emits one symbol per admissible index") {
    SteParams params{3, 1, 1};
    std::vector<double> values(9);
    for (std::size_t i = 0; i < 9; ++i) values[i] = double(i * i % 7);
    const std::vector<int> one_block = {9};
    CHECK(symbol_sequence(values, one_block, params).symbols.size() == 7);

    std::vector<double> two(18);
    for (std::size_t i = 0; i < 18; ++i) two[i] = double((i * 5) % 11);
    const std::vector<int> blocks = {9, 9};
    const auto seq = symbol_sequence(two, blocks, params);
    CHECK(seq.symbols.size() == 14);
    CHECK(seq.block_sizes == std::vector<int>{7, 7});
}

TEST_CASE("symbol_sequence rejects too-short blocks naming the block") {
    SteParams params{3, 2, 1};
    const std::vector<double> values = {1.0, 2.0, 3.0};
    const std::vector<int> blocks = {3};
    CHECK_THROWS_WITH_AS(symbol_sequence(values, blocks, params), doctest::Contains("block 0"),
                         DataError);
}

TEST_CASE("ste is exactly zero for constant and self pairs") {
    SteParams params{3, 1, 1};
    const std::vector<double> constant(64, 2.5);
    CHECK(library_ste(constant, constant, params) == 0.0);

    auto rng = make_rng(11);
    const auto x = random_series(rng, 256);
    CHECK(library_ste(x, x, params) == 0.0);
}

TEST_CASE("ste matches the brute-force oracle on short m=2 sequences") {
    SteParams params{2, 1, 1};
    auto rng = make_rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 10 + bounded_u64(rng, 41);
        const auto y = random_series(rng, n);
        const auto x = random_series(rng, n);
        const double lib = library_ste(y, x, params);
        const double oracle = oracle_ste(y, x, 2, 1, 1);
        CHECK(std::abs(lib - oracle) < 1e-12);
    }
}

TEST_CASE("the joint symbol distribution is normalized") {
    auto rng = make_rng(49);
    const auto y = random_series(rng, 200);
    const auto x = random_series(rng, 200);
    // rebuild the triple histogram the estimator integrates over
    std::map<std::tuple<Pattern, Pattern, Pattern>, double> joint;
    double total = 0.0;
    for (std::size_t i = 0; i + 3 < x.size(); ++i) {
        joint[{oracle_pattern(x, i + 1, 3, 1), oracle_pattern(x, i, 3, 1),
               oracle_pattern(y, i, 3, 1)}] += 1.0;
        total += 1.0;
    }
    double mass = 0.0;
    for (const auto& [_, count] : joint) mass += count / total;
    CHECK(std::abs(mass - 1.0) < 1e-12);
}

TEST_CASE("ste matches the oracle for m=3 and larger delays") {
    auto rng = make_rng(43);
    for (const auto& [m, d, t] : std::vector<std::tuple<int, int, int>>{{3, 1, 1}, {3, 2, 2}, {4, 1, 1}}) {
        SteParams params{m, d, t};
        const auto y = random_series(rng, 300);
        const auto x = random_series(rng, 300);
        const double lib = library_ste(y, x, params);
        const double oracle = oracle_ste(y, x, m, d, t);
        CHECK(std::abs(lib - oracle) < 1e-12);
    }
}

TEST_CASE("ste stays within [0, log2(m!)] on random pairs") {
    SteParams params{3, 1, 1};
    const double bound = std::log2(6.0);
    auto rng = make_rng(44);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 8 + bounded_u64(rng, 120);
        const auto y = random_series(rng, n);
        const auto x = random_series(rng, n);
        const double v = library_ste(y, x, params);
        CHECK(v >= 0.0);
        CHECK(v <= bound + 1e-12);
    }
}

TEST_CASE("ste detects the direction of a lag-1 coupling") {
    SteParams params{3, 1, 1};
    auto rng = make_rng(45);
    const std::size_t n = 5000;
    std::vector<double> driver = random_series(rng, n);
    std::vector<double> driven(n);
    driven[0] = uniform01(rng);
    for (std::size_t i = 1; i < n; ++i) driven[i] = driver[i - 1] + 0.1 * uniform01(rng);

    const double forward = library_ste(driver, driven, params);
    const double backward = library_ste(driven, driver, params);
    CHECK(forward > backward);
    CHECK(std::abs(forward - oracle_ste(driver, driven, 3, 1, 1)) < 1e-12);
}

TEST_CASE("symbol sequences never straddle block boundaries") {
    SteParams params{2, 1, 1};
    // two blocks whose junction would form a distinctive falling pattern
    const std::vector<double> values = {1, 2, 3, 4, 0, 1, 2, 3};
    const std::vector<int> blocks = {4, 4};
    const auto seq = symbol_sequence(values, blocks, params);
    REQUIRE(seq.symbols.size() == 6);
    // all rising pairs; the falling 4->0 junction must not appear
    for (const int s : seq.symbols) CHECK(s == seq.symbols[0]);
}

namespace {

EventGroup random_group(std::mt19937_64& rng, int events = 4, int side = 4) {
    EventGroup group;
    group.block_length = 2 * side + 1;
    group.events.resize(static_cast<std::size_t>(events));
    for (auto& seq : group.sequences) {
        seq = random_series(rng, static_cast<std::size_t>(events * (2 * side + 1)));
        // keep values well separated so monotone maps stay strictly ordered
        for (auto& v : seq) v = std::round(v * 1e6) / 1e6;
    }
    return group;
}

}  // namespace

TEST_CASE("ste_feature_vector has 144 entries with an exactly zero diagonal") {
    auto rng = make_rng(46);
    const auto group = random_group(rng);
    const auto features = ste_feature_vector(group, SteParams{3, 1, 1});
    REQUIRE(features.size() == 144);
    for (int s = 0; s < kSensorCount; ++s) {
        CHECK(features[static_cast<std::size_t>(s * kSensorCount + s)] == 0.0);
    }
}

TEST_CASE("ste_feature_vector entries are invariant under monotone rescaling") {
    auto rng = make_rng(47);
    for (int trial = 0; trial < 5; ++trial) {
        auto group = random_group(rng);
        const auto before = ste_feature_vector(group, SteParams{3, 1, 1});
        const int sensor = static_cast<int>(bounded_u64(rng, kSensorCount));
        for (auto& v : group.sequences[static_cast<std::size_t>(sensor)]) v = v * v * v + 5.0 * v;
        const auto after = ste_feature_vector(group, SteParams{3, 1, 1});
        CHECK(before == after);  // exact equality
    }
}

TEST_CASE("feature values are indexed by sensor label, not input order") {
    auto rng = make_rng(48);
    auto group = random_group(rng);
    const auto features = ste_feature_vector(group, SteParams{3, 1, 1});

    // swapping the data of two sensors permutes exactly the matching entries
    auto swapped = group;
    std::swap(swapped.sequences[3], swapped.sequences[9]);
    const auto swapped_features = ste_feature_vector(swapped, SteParams{3, 1, 1});
    CHECK(swapped_features[3 * kSensorCount + 5] == features[9 * kSensorCount + 5]);
    CHECK(swapped_features[5 * kSensorCount + 9] == features[5 * kSensorCount + 3]);
    CHECK(ste_feature_name(3 * kSensorCount + 9) == "STE_GP_to_KA");
}
