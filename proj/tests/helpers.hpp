#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "muse/rng.hpp"
#include "muse/table.hpp"

namespace test_helpers {

inline muse::Schema make_schema(
    std::initializer_list<std::pair<const char*, muse::ColumnType>> cols) {
    muse::Schema s;
    for (const auto& [name, type] : cols) s.columns.emplace_back(name, type);
    return s;
}

// 4 numeric + 2 categorical columns, the desk-scale shape used across
// the statistical tests.
inline muse::Schema mixed_schema() {
    using muse::ColumnType;
    return make_schema({{"age", ColumnType::Numeric},
                        {"income", ColumnType::Numeric},
                        {"height", ColumnType::Numeric},
                        {"score", ColumnType::Numeric},
                        {"city", ColumnType::Categorical},
                        {"status", ColumnType::Categorical}});
}

// Continuous-ish random table under mixed_schema(); numeric draws are
// effectively distinct so canonical encodings rarely collide.
inline muse::Table random_mixed_table(std::size_t n_rows, std::uint64_t seed) {
    static const char* cities[] = {"ams", "ber", "cdg", "dub", "eze"};
    static const char* statuses[] = {"yes", "no", "maybe"};
    muse::SplitMix64 rng(seed);
    std::vector<muse::Row> rows;
    rows.reserve(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        muse::Row r;
        r.emplace_back(18.0 + 60.0 * rng.next_double());
        r.emplace_back(1000.0 * rng.next_double() * rng.next_double());
        r.emplace_back(150.0 + 50.0 * rng.next_double());
        r.emplace_back(rng.next_double());
        r.emplace_back(std::string(cities[rng.next_below(5)]));
        r.emplace_back(std::string(statuses[rng.next_below(3)]));
        rows.push_back(std::move(r));
    }
    return muse::Table(mixed_schema(), std::move(rows));
}

inline std::string temp_path(const std::string& name) {
    return std::string("muse_test_") + name;
}

}  // namespace test_helpers
