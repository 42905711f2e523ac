#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "muse/errors.hpp"
#include "muse/rng.hpp"
#include "muse/sampler.hpp"
#include "muse/table.hpp"

namespace muse {

enum class AttackKind { RowShuffle, RowDelete, ColumnDelete, CellDelete,
                        ValueAlter };

inline const char* to_string(AttackKind k) {
    switch (k) {
        case AttackKind::RowShuffle: return "row_shuffle";
        case AttackKind::RowDelete: return "row_delete";
        case AttackKind::ColumnDelete: return "column_delete";
        case AttackKind::CellDelete: return "cell_delete";
        case AttackKind::ValueAlter: return "value_alter";
    }
    return "?";
}

inline AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "row_shuffle") return AttackKind::RowShuffle;
    if (s == "row_delete") return AttackKind::RowDelete;
    if (s == "column_delete") return AttackKind::ColumnDelete;
    if (s == "cell_delete") return AttackKind::CellDelete;
    if (s == "value_alter") return AttackKind::ValueAlter;
    throw InvalidConfig("unknown attack kind '" + s + "'");
}

struct AttackSpec {
    AttackKind kind = AttackKind::RowShuffle;
    double fraction = 0.0;                      // in [0,1]
    std::uint64_t seed = 0;
    const RowSampler* replacement = nullptr;    // deletion kinds only
};

namespace detail {

inline bool needs_replacement(AttackKind k) {
    return k == AttackKind::RowDelete || k == AttackKind::ColumnDelete ||
           k == AttackKind::CellDelete;
}

}  // namespace detail

/// Post-generation perturbation at the given intensity. Deletion kinds
/// replace the removed content with fresh unwatermarked draws so the
/// output keeps the input's shape and schema; value alteration scales a
/// fraction of the numeric cells by factors from [0.8, 1.2). Output row
/// count always equals input row count.
inline Table apply_attack(const Table& table, const AttackSpec& spec) {
    if (table.n_rows() == 0) throw EmptyTable("cannot attack an empty table");
    if (!(spec.fraction >= 0.0 && spec.fraction <= 1.0))
        throw InvalidConfig("attack fraction must lie in [0,1]");
    if (detail::needs_replacement(spec.kind)) {
        if (spec.replacement == nullptr)
            throw MissingReplacementSampler(
                std::string(to_string(spec.kind)) +
                " needs a replacement sampler");
        if (!(spec.replacement->schema() == table.schema()))
            throw SchemaMismatch(
                "replacement sampler schema does not match the table");
    }

    const std::size_t n = table.n_rows();
    const std::size_t m = table.n_cols();
    SplitMix64 rng(spec.seed);
    const std::uint64_t sampler_seed = rng.next();
    std::vector<Row> rows = table.rows();

    switch (spec.kind) {
        case AttackKind::RowShuffle: {
            auto count = static_cast<std::size_t>(spec.fraction *
                                                  static_cast<double>(n));
            std::vector<std::size_t> pos = sample_indices(n, count, rng);
            std::sort(pos.begin(), pos.end());
            std::vector<Row> chosen;
            chosen.reserve(pos.size());
            for (std::size_t p : pos) chosen.push_back(std::move(rows[p]));
            seeded_shuffle(chosen, rng);
            for (std::size_t i = 0; i < pos.size(); ++i)
                rows[pos[i]] = std::move(chosen[i]);
            break;
        }
        case AttackKind::RowDelete: {
            auto count = static_cast<std::size_t>(spec.fraction *
                                                  static_cast<double>(n));
            std::vector<std::size_t> pos = sample_indices(n, count, rng);
            Table fresh = spec.replacement->sample_rows(count, sampler_seed);
            for (std::size_t i = 0; i < count; ++i)
                rows[pos[i]] = fresh.row(i);
            break;
        }
        case AttackKind::ColumnDelete: {
            auto count = static_cast<std::size_t>(spec.fraction *
                                                  static_cast<double>(m));
            std::vector<std::size_t> cols = sample_indices(m, count, rng);
            Table fresh = spec.replacement->sample_rows(n, sampler_seed);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j : cols) rows[i][j] = fresh.cell(i, j);
            break;
        }
        case AttackKind::CellDelete: {
            auto count = static_cast<std::size_t>(
                spec.fraction * static_cast<double>(n) *
                static_cast<double>(m));
            std::vector<std::size_t> cells = sample_indices(n * m, count, rng);
            Table fresh = spec.replacement->sample_rows(count, sampler_seed);
            for (std::size_t i = 0; i < count; ++i) {
                std::size_t r = cells[i] / m, c = cells[i] % m;
                rows[r][c] = fresh.cell(i, c);
            }
            break;
        }
        case AttackKind::ValueAlter: {
            std::vector<std::size_t> numeric_cells;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    if (is_numeric(rows[i][j])) numeric_cells.push_back(i * m + j);
            auto count = static_cast<std::size_t>(
                spec.fraction * static_cast<double>(numeric_cells.size()));
            std::vector<std::size_t> picks =
                sample_indices(numeric_cells.size(), count, rng);
            for (std::size_t p : picks) {
                std::size_t r = numeric_cells[p] / m, c = numeric_cells[p] % m;
                double scale = 0.8 + 0.4 * rng.next_double();
                rows[r][c] = num(rows[r][c]) * scale;
            }
            break;
        }
    }
    return Table(table.schema(), std::move(rows));
}

}  // namespace muse
