#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "muse/errors.hpp"
#include "muse/table.hpp"

namespace muse {

/// Fraction of reference values <= x, by binary search on the sorted
/// ECDF snapshot.
inline double quantile_rank(const ColumnEcdf& ecdf, double x) {
    const auto& v = ecdf.sorted_values;
    auto it = std::upper_bound(v.begin(), v.end(), x);
    return static_cast<double>(it - v.begin()) / static_cast<double>(v.size());
}

struct FixedSelection {
    std::vector<std::size_t> columns;  // ascending, distinct
};

struct AdaptiveSelection {
    std::size_t n_columns = 3;
    std::vector<std::size_t> eligible;  // numeric column indices, ascending
    std::vector<ColumnEcdf> ecdfs;      // one per eligible column, same order
};

using SelectionStrategy = std::variant<FixedSelection, AdaptiveSelection>;

inline void validate(const SelectionStrategy& strategy) {
    if (const auto* f = std::get_if<FixedSelection>(&strategy)) {
        if (f->columns.empty())
            throw InvalidConfig("fixed selection needs at least one column");
        for (std::size_t i = 1; i < f->columns.size(); ++i)
            if (f->columns[i] <= f->columns[i - 1])
                throw InvalidConfig(
                    "fixed selection columns must be ascending and distinct");
    } else {
        const auto& a = std::get<AdaptiveSelection>(strategy);
        if (a.n_columns < 1)
            throw InvalidConfig("adaptive selection needs n >= 1");
        if (a.eligible.size() < a.n_columns)
            throw NotEnoughEligibleColumns(
                "adaptive selection of " + std::to_string(a.n_columns) +
                " columns needs as many eligible numeric columns, have " +
                std::to_string(a.eligible.size()));
        if (a.ecdfs.size() != a.eligible.size())
            throw InvalidConfig("adaptive selection needs one ECDF per "
                                "eligible column");
    }
}

/// Column indices feeding the hash for one row. Fixed returns the
/// configured set. Adaptive ranks each eligible column's value against
/// its reference ECDF and picks n evenly spaced order statistics of the
/// rank list, endpoints included (n=3: min, lower median, max; n=1:
/// min). Ties sort by the smaller column index. Result is ascending.
inline std::vector<std::size_t> select_columns(const SelectionStrategy& strategy,
                                               const Row& row) {
    if (const auto* f = std::get_if<FixedSelection>(&strategy)) {
        for (std::size_t j : f->columns)
            if (j >= row.size())
                throw IndexOutOfRange("fixed selection column " +
                                      std::to_string(j) + " out of range");
        return f->columns;
    }
    const auto& a = std::get<AdaptiveSelection>(strategy);
    const std::size_t e = a.eligible.size();
    if (e < a.n_columns)
        throw NotEnoughEligibleColumns("adaptive selection: " +
                                       std::to_string(e) +
                                       " eligible columns < n = " +
                                       std::to_string(a.n_columns));

    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(e);
    for (std::size_t i = 0; i < e; ++i) {
        std::size_t j = a.eligible[i];
        if (j >= row.size() || !is_numeric(row[j]))
            throw SchemaMismatch("eligible column " + std::to_string(j) +
                                 " is not a numeric cell of this row");
        ranked.emplace_back(quantile_rank(a.ecdfs[i], num(row[j])), j);
    }
    std::sort(ranked.begin(), ranked.end());

    std::vector<std::size_t> out;
    out.reserve(a.n_columns);
    if (a.n_columns == 1) {
        out.push_back(ranked.front().second);
    } else {
        for (std::size_t k = 0; k < a.n_columns; ++k) {
            std::size_t pos = k * (e - 1) / (a.n_columns - 1);
            out.push_back(ranked[pos].second);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Eligible = every numeric column of `reference`; ECDFs extracted from it.
inline AdaptiveSelection make_adaptive_strategy(const Table& reference,
                                                std::size_t n_columns,
                                                std::size_t ecdf_max_points =
                                                    10000) {
    AdaptiveSelection a;
    a.n_columns = n_columns;
    a.eligible = reference.numeric_columns();
    if (a.eligible.size() < n_columns)
        throw NotEnoughEligibleColumns(
            "table has " + std::to_string(a.eligible.size()) +
            " numeric columns, adaptive selection needs " +
            std::to_string(n_columns) + "; use a fixed strategy instead");
    a.ecdfs.reserve(a.eligible.size());
    for (std::size_t j : a.eligible)
        a.ecdfs.push_back(column_ecdf(reference, j, ecdf_max_points));
    return a;
}

/// Set of canonical encodings already used for scoring. One registry per
/// embed or detect pass, fed in row order.
class MaskRegistry {
public:
    bool contains(const std::string& encoding) const {
        return seen_.count(encoding) > 0;
    }

    void insert(std::string encoding) { seen_.insert(std::move(encoding)); }

    // Membership before insertion; the encoding is present afterwards.
    bool check_and_insert(const std::string& encoding) {
        return !seen_.insert(encoding).second;
    }

    std::size_t size() const { return seen_.size(); }

private:
    std::unordered_set<std::string> seen_;
};

}  // namespace muse
