#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "muse/embed.hpp"
#include "helpers.hpp"

using namespace muse;

namespace {

EmbedConfig basic_config(const Table& reference, std::uint64_t m,
                         std::uint64_t seed = 42) {
    EmbedConfig cfg{WatermarkKey("embed-test-key"),
                    make_adaptive_strategy(reference, 3),
                    ScoreFunctionKind::Bernoulli05,
                    m,
                    std::nullopt,
                    false,
                    false,
                    seed};
    return cfg;
}

double row_score(const EmbedConfig& cfg, const Row& row) {
    return score_row(cfg.key, row, select_columns(cfg.strategy, row),
                     cfg.score_kind);
}

}  // namespace

TEST_CASE("embed_from_pool keeps the highest-scoring candidate per group") {
    Table pool = test_helpers::random_mixed_table(60, 1);
    EmbedConfig cfg = basic_config(pool, 2);

    SECTION("the winner is the argmax, verified against direct scoring") {
        auto [wm, report] = embed_from_pool(pool, cfg);
        REQUIRE(report.rows_out == 30);
        GroupSplit split = split_groups(pool, 2, cfg.seed);
        for (std::size_t g = 0; g < split.groups.size(); ++g) {
            double s0 = row_score(cfg, pool.row(split.groups[g][0]));
            double s1 = row_score(cfg, pool.row(split.groups[g][1]));
            double winner = row_score(cfg, wm.row(g));
            REQUIRE(winner == std::max(s0, s1));
            if (s0 != s1) {
                const Row& expect =
                    pool.row(split.groups[g][s0 > s1 ? 0 : 1]);
                REQUIRE(wm.row(g) == expect);
            }
        }
    }
    SECTION("ties resolve deterministically under the same seed") {
        auto [a, ra] = embed_from_pool(pool, cfg);
        auto [b, rb] = embed_from_pool(pool, cfg);
        REQUIRE(a == b);
        REQUIRE(ra.ties_broken == rb.ties_broken);
        REQUIRE(ra.ties_broken > 0);  // ~half the bernoulli pairs tie
    }
    SECTION("every output row is byte-identical to some pool row") {
        auto [wm, report] = embed_from_pool(pool, cfg);
        std::set<Row> pool_rows(pool.rows().begin(), pool.rows().end());
        for (const Row& r : wm.rows()) REQUIRE(pool_rows.count(r) == 1);
    }
}

TEST_CASE("embed_from_pool remainder handling") {
    Table pool = test_helpers::random_mixed_table(61, 2);
    EmbedConfig cfg = basic_config(pool, 2);

    SECTION("remainder rows are dropped by default") {
        auto [wm, report] = embed_from_pool(pool, cfg);
        REQUIRE(wm.n_rows() == 30);
        REQUIRE(report.dropped_remainder == 1);
    }
    SECTION("keep_remainder passes them through unwatermarked") {
        cfg.keep_remainder = true;
        auto [wm, report] = embed_from_pool(pool, cfg);
        REQUIRE(wm.n_rows() == 31);
        REQUIRE(report.dropped_remainder == 0);
        REQUIRE(report.rows_out == 30);
    }
}

TEST_CASE("embed configuration errors") {
    Table pool = test_helpers::random_mixed_table(20, 3);
    EmbedConfig cfg = basic_config(pool, 2);

    SECTION("m=1 leaves nothing to select") {
        cfg.m = 1;
        REQUIRE_THROWS_AS(embed_from_pool(pool, cfg), InvalidConfig);
    }
    SECTION("missing both m and alpha") {
        cfg.m.reset();
        REQUIRE_THROWS_AS(embed_from_pool(pool, cfg), InvalidConfig);
    }
    SECTION("pool smaller than m") {
        cfg.m = 25;
        REQUIRE_THROWS_AS(embed_from_pool(pool, cfg), NotEnoughRows);
    }
}

TEST_CASE("auto-m calibrates from alpha") {
    SECTION("streaming uses the requested output size directly") {
        Table source = test_helpers::random_mixed_table(500, 4);
        IndependentMarginalSampler sampler(source);
        EmbedConfig cfg = basic_config(source, 2);
        cfg.m.reset();
        cfg.alpha = 1e-4;
        auto [wm, report] = embed_streaming(sampler, 300, cfg);
        REQUIRE(report.m_used == 2);  // calibration at N=300
        auto [wm2, report2] = embed_streaming(sampler, 100, cfg);
        REQUIRE(report2.m_used == 4);  // calibration at N=100
    }
    SECTION("pool mode solves for m against the output size") {
        Table pool = test_helpers::random_mixed_table(700, 5);
        EmbedConfig cfg = basic_config(pool, 2);
        cfg.m.reset();
        cfg.alpha = 1e-4;
        auto [wm, report] = embed_from_pool(pool, cfg);
        // m=2 gives 350 output rows; calibration at N=350 asks for m=2
        REQUIRE(report.m_used == 2);
        REQUIRE(wm.n_rows() == 350);
    }
    SECTION("a hopelessly small pool is rejected") {
        Table pool = test_helpers::random_mixed_table(60, 6);
        EmbedConfig cfg = basic_config(pool, 2);
        cfg.m.reset();
        cfg.alpha = 1e-4;
        REQUIRE_THROWS_AS(embed_from_pool(pool, cfg), InvalidRegime);
    }
}

TEST_CASE("mean selected score approaches 1 - 0.5^m") {
    const std::size_t groups = 1000;
    Table source = test_helpers::random_mixed_table(2000, 7);
    IndependentMarginalSampler sampler(source);
    EmbedConfig cfg = basic_config(source, 2, 99);

    auto [wm, report] = embed_streaming(sampler, groups, cfg);
    REQUIRE(wm.n_rows() == groups);
    double sum = 0.0;
    for (const Row& r : wm.rows()) sum += row_score(cfg, r);
    // binomial 3-sigma at p=0.75, n=1000: ~0.041
    REQUIRE_THAT(sum / static_cast<double>(groups),
                 Catch::Matchers::WithinAbs(0.75, 0.041));
}

TEST_CASE("embed_streaming draws m candidates per output row") {
    Table source = test_helpers::random_mixed_table(300, 8);
    IndependentMarginalSampler sampler(source);
    EmbedConfig cfg = basic_config(source, 2, 5);

    SECTION("accounting") {
        auto [wm, report] = embed_streaming(sampler, 100, cfg);
        REQUIRE(wm.n_rows() == 100);
        REQUIRE(report.rows_out == 100);
        REQUIRE(report.m_used == 2);
        REQUIRE(report.dropped_remainder == 0);
    }
    SECTION("equivalent to pool embedding with identity grouping") {
        auto [wm, report] = embed_streaming(sampler, 50, cfg);
        Table pool = sampler.sample_rows(100, cfg.seed);
        for (std::size_t g = 0; g < 50; ++g) {
            double s0 = row_score(cfg, pool.row(2 * g));
            double s1 = row_score(cfg, pool.row(2 * g + 1));
            REQUIRE(row_score(cfg, wm.row(g)) == std::max(s0, s1));
            REQUIRE((wm.row(g) == pool.row(2 * g) ||
                     wm.row(g) == pool.row(2 * g + 1)));
        }
    }
}

TEST_CASE("repeated column masking") {
    // Duplicate-heavy source: bootstrap over 8 distinct rows.
    Table distinct = test_helpers::random_mixed_table(8, 10);
    BootstrapSampler sampler(distinct);
    Table pool = sampler.sample_rows(400, 77);

    EmbedConfig cfg{WatermarkKey("mask-test-key"),
                    make_adaptive_strategy(distinct, 3),
                    ScoreFunctionKind::Bernoulli05,
                    2,
                    std::nullopt,
                    true,
                    false,
                    31};

    SECTION("duplicate encodings trigger masked selections") {
        auto [wm, report] = embed_from_pool(pool, cfg);
        REQUIRE(report.masked_rows > 0);
        REQUIRE(report.masked_rows <= report.rows_out);
    }
    SECTION("masking keeps the pass deterministic") {
        auto [a, ra] = embed_from_pool(pool, cfg);
        auto [b, rb] = embed_from_pool(pool, cfg);
        REQUIRE(a == b);
        REQUIRE(ra.masked_rows == rb.masked_rows);
    }
    SECTION("masking off leaves masked_rows at zero") {
        cfg.masking = false;
        auto [wm, report] = embed_from_pool(pool, cfg);
        REQUIRE(report.masked_rows == 0);
    }
    SECTION("masking is a no-op when every encoding is unique") {
        Table continuous = test_helpers::random_mixed_table(200, 12);
        EmbedConfig c = basic_config(continuous, 2, 9);
        auto [plain, rp] = embed_from_pool(continuous, c);
        c.masking = true;
        auto [masked, rm] = embed_from_pool(continuous, c);
        REQUIRE(plain == masked);
        REQUIRE(rm.masked_rows == 0);
    }
}
