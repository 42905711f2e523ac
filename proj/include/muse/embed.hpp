#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "muse/calibration.hpp"
#include "muse/errors.hpp"
#include "muse/rng.hpp"
#include "muse/sampler.hpp"
#include "muse/scoring.hpp"
#include "muse/selection.hpp"
#include "muse/table.hpp"

namespace muse {

struct EmbedConfig {
    WatermarkKey key;
    SelectionStrategy strategy;
    ScoreFunctionKind score_kind = ScoreFunctionKind::Bernoulli05;
    std::optional<std::uint64_t> m;   // explicit repeated-sample count (>= 2)
    std::optional<double> alpha;      // or a target FPR to calibrate m from
    bool masking = false;
    bool keep_remainder = false;      // pass N mod m rows through unwatermarked
    std::uint64_t seed = 0;
};

struct EmbedReport {
    std::size_t rows_out = 0;          // groups processed (= winners emitted)
    std::uint64_t m_used = 0;
    std::size_t masked_rows = 0;       // winners scored by the random coin
    std::size_t ties_broken = 0;
    std::size_t dropped_remainder = 0;
};

namespace detail {

constexpr std::uint64_t kMaskStreamTag = 0x6d61736b636f696eULL;  // "maskcoin"

inline double masked_coin_score(std::uint64_t seed, std::uint64_t draw_index,
                                ScoreFunctionKind kind) {
    std::uint64_t bits = rng_at(seed ^ kMaskStreamTag, draw_index);
    if (kind == ScoreFunctionKind::Bernoulli05)
        return static_cast<double>(bits & 1);
    return uniform01_from_bits(bits);
}

inline void validate_m(std::uint64_t m) {
    if (m < 2)
        throw InvalidConfig("m must be >= 2: a single candidate per group "
                            "leaves nothing to select");
}

// Per-group selection over pre-formed candidate groups.
inline std::pair<Table, EmbedReport> select_winners(
    const Table& pool, const std::vector<std::vector<std::size_t>>& groups,
    const EmbedConfig& cfg, std::uint64_t m_used) {
    validate(cfg.strategy);
    const HmacSha256 mac(cfg.key.key_bytes);

    EmbedReport report;
    report.m_used = m_used;
    MaskRegistry registry;
    std::vector<Row> out_rows;
    out_rows.reserve(groups.size());

    std::vector<std::string> encodings;
    std::vector<double> scores;
    std::vector<bool> masked;
    std::vector<std::size_t> tied;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& group = groups[g];
        encodings.clear();
        scores.clear();
        masked.clear();
        for (std::size_t t = 0; t < group.size(); ++t) {
            const Row& row = pool.row(group[t]);
            std::string enc =
                canonical_encode(row, select_columns(cfg.strategy, row));
            bool is_masked = cfg.masking && registry.contains(enc);
            double s = is_masked
                           ? masked_coin_score(cfg.seed, g * m_used + t,
                                               cfg.score_kind)
                           : score_from_digest(mac(enc), cfg.score_kind);
            encodings.push_back(std::move(enc));
            scores.push_back(s);
            masked.push_back(is_masked);
        }

        double best = scores[0];
        for (double s : scores) best = std::max(best, s);
        tied.clear();
        for (std::size_t t = 0; t < scores.size(); ++t)
            if (scores[t] == best) tied.push_back(t);

        std::size_t winner = tied[0];
        if (tied.size() > 1) {
            ++report.ties_broken;
            // Key-derived coin: reproducible, unpredictable without the key.
            Digest d = mac("tie\x1f" + std::to_string(g));
            winner = tied[static_cast<std::size_t>(
                (static_cast<unsigned __int128>(digest_prefix_u64(d)) *
                 tied.size()) >>
                64)];
        }

        if (cfg.masking) {
            if (masked[winner]) ++report.masked_rows;
            registry.insert(encodings[winner]);
        }
        out_rows.push_back(pool.row(group[winner]));
    }
    report.rows_out = out_rows.size();
    return {Table(pool.schema(), std::move(out_rows)), report};
}

// Smallest m >= 2 whose bound holds at the resulting output size N/m.
inline std::uint64_t resolve_pool_m(double alpha, std::size_t pool_rows) {
    for (std::uint64_t m = 2;; ++m) {
        std::uint64_t rows_out = pool_rows / m;
        if (rows_out < min_valid_rows(alpha))
            throw InvalidRegime(
                "pool of " + std::to_string(pool_rows) +
                " rows cannot reach alpha=" + std::to_string(alpha) +
                " at any m; grow the pool or relax alpha");
        CalibrationResult r = required_samples({alpha, rows_out});
        if (r.m <= m) return m;
    }
}

}  // namespace detail

inline std::uint64_t resolve_m(const EmbedConfig& cfg,
                               std::size_t rows_out_hint) {
    if (cfg.m) {
        detail::validate_m(*cfg.m);
        return *cfg.m;
    }
    if (!cfg.alpha)
        throw InvalidConfig("embed config needs either m or alpha");
    return required_samples({*cfg.alpha, rows_out_hint}).m;
}

/// Watermark a pre-allocated pool: seeded random split into floor(N/m)
/// groups of m rows, then per group keep the candidate whose keyed score
/// is highest. Selection only ever copies pool rows, never edits them.
inline std::pair<Table, EmbedReport> embed_from_pool(const Table& pool,
                                                     const EmbedConfig& cfg) {
    std::uint64_t m;
    if (cfg.m) {
        detail::validate_m(*cfg.m);
        m = *cfg.m;
    } else if (cfg.alpha) {
        m = detail::resolve_pool_m(*cfg.alpha, pool.n_rows());
    } else {
        throw InvalidConfig("embed config needs either m or alpha");
    }
    if (pool.n_rows() < m)
        throw NotEnoughRows("pool has " + std::to_string(pool.n_rows()) +
                            " rows, need at least m = " + std::to_string(m));

    GroupSplit split = split_groups(pool, m, cfg.seed);
    auto [table, report] = detail::select_winners(pool, split.groups, cfg, m);
    if (!split.remainder.empty()) {
        if (cfg.keep_remainder) {
            std::vector<Row> rows = table.rows();
            for (std::size_t i : split.remainder) rows.push_back(pool.row(i));
            table = Table(pool.schema(), std::move(rows));
        } else {
            report.dropped_remainder = split.remainder.size();
        }
    }
    return {std::move(table), report};
}

/// Watermark while generating: draw rows_out * m candidates from the
/// sampler and run the same selection with consecutive (identity)
/// grouping, m candidates per output row.
inline std::pair<Table, EmbedReport> embed_streaming(const RowSampler& sampler,
                                                     std::size_t rows_out,
                                                     const EmbedConfig& cfg) {
    if (rows_out < 1) throw InvalidConfig("rows_out must be >= 1");
    std::uint64_t m = resolve_m(cfg, rows_out);
    Table pool = sampler.sample_rows(rows_out * m, cfg.seed);
    std::vector<std::vector<std::size_t>> groups(rows_out);
    for (std::size_t g = 0; g < rows_out; ++g) {
        groups[g].reserve(m);
        for (std::uint64_t t = 0; t < m; ++t) groups[g].push_back(g * m + t);
    }
    return detail::select_winners(pool, groups, cfg, m);
}

}  // namespace muse
