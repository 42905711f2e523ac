#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "muse/errors.hpp"
#include "muse/scoring.hpp"
#include "muse/selection.hpp"
#include "muse/table.hpp"

namespace muse {

/// Everything the detector needs besides the suspect table: key, column
/// strategy (with reference ECDFs), score kind and masking flag.
struct DetectorBundle {
    WatermarkKey key;
    SelectionStrategy strategy;
    ScoreFunctionKind score_kind = ScoreFunctionKind::Bernoulli05;
    bool masking = false;
    int format_version = 1;
};

struct DetectionReport {
    std::size_t n_scored = 0;
    double score_sum = 0.0;
    double mean_score = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    bool decision = false;
    double alpha = 0.05;
    std::size_t masked_excluded = 0;
};

struct ScoredTable {
    std::vector<double> scores;
    std::size_t masked_excluded = 0;
};

/// Re-derive the per-row scores of a table under the bundle. With masking
/// on, rows that repeat an earlier row's encoding are excluded, mirroring
/// the masking applied at generation time.
inline ScoredTable score_table(const DetectorBundle& bundle,
                               const Table& table) {
    validate(bundle.strategy);
    const HmacSha256 mac(bundle.key.key_bytes);
    ScoredTable out;
    out.scores.reserve(table.n_rows());
    MaskRegistry registry;
    for (const Row& row : table.rows()) {
        std::string enc =
            canonical_encode(row, select_columns(bundle.strategy, row));
        if (bundle.masking && registry.check_and_insert(enc)) {
            ++out.masked_excluded;
            continue;
        }
        out.scores.push_back(score_from_digest(mac(enc), bundle.score_kind));
    }
    return out;
}

inline double normal_upper_tail(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

namespace detail {

// Exact P(Binomial(n, 1/2) >= w); used instead of the normal
// approximation for small samples.
inline double binomial_upper_tail(std::size_t n, std::size_t w) {
    if (w == 0) return 1.0;
    double term = std::pow(0.5, static_cast<double>(n));  // C(n,0)/2^n
    double below = 0.0;                                   // P(X < w)
    for (std::size_t k = 0; k < w; ++k) {
        below += term;
        term *= static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
    return std::max(0.0, 1.0 - below);
}

}  // namespace detail

/// One-tailed mean-score test: z = (sum - n/2) / sqrt(n/4) for Bernoulli
/// scores; uniform scores standardize with mean 0.5 and variance 1/12.
/// Bernoulli with n < 30 uses the exact binomial tail for the p-value.
inline DetectionReport z_test(const std::vector<double>& scores, double alpha,
                              ScoreFunctionKind kind =
                                  ScoreFunctionKind::Bernoulli05) {
    if (scores.empty()) throw EmptyScores("z_test needs at least one score");
    DetectionReport r;
    r.alpha = alpha;
    r.n_scored = scores.size();
    for (double s : scores) r.score_sum += s;
    const double n = static_cast<double>(r.n_scored);
    r.mean_score = r.score_sum / n;

    if (kind == ScoreFunctionKind::Bernoulli05) {
        r.z = (r.score_sum - n / 2.0) / std::sqrt(n / 4.0);
        if (r.n_scored < 30) {
            auto w = static_cast<std::size_t>(std::llround(r.score_sum));
            r.p_value = detail::binomial_upper_tail(r.n_scored, w);
        } else {
            r.p_value = normal_upper_tail(r.z);
        }
    } else {
        r.z = (r.score_sum - n / 2.0) / std::sqrt(n / 12.0);
        r.p_value = normal_upper_tail(r.z);
    }
    r.decision = r.p_value < alpha;
    return r;
}

inline DetectionReport detect(const DetectorBundle& bundle, const Table& table,
                              double alpha = 0.05) {
    ScoredTable st = score_table(bundle, table);
    DetectionReport r = z_test(st.scores, alpha, bundle.score_kind);
    r.masked_excluded = st.masked_excluded;
    return r;
}

// Paired decision rule: suspect beats an unwatermarked reference iff its
// mean score is strictly higher.
inline bool compare_tables(const DetectorBundle& bundle, const Table& suspect,
                           const Table& reference) {
    if (suspect.n_rows() == 0 || reference.n_rows() == 0)
        throw EmptyTable("compare_tables needs nonempty tables");
    ScoredTable a = score_table(bundle, suspect);
    ScoredTable b = score_table(bundle, reference);
    if (a.scores.empty() || b.scores.empty())
        throw EmptyScores("all rows were mask-excluded");
    double ma = 0.0, mb = 0.0;
    for (double s : a.scores) ma += s;
    for (double s : b.scores) mb += s;
    ma /= static_cast<double>(a.scores.size());
    mb /= static_cast<double>(b.scores.size());
    return ma > mb;
}

// --- bundle persistence (versioned JSON) ---

inline nlohmann::json strategy_to_json(const SelectionStrategy& s) {
    nlohmann::json j;
    if (const auto* f = std::get_if<FixedSelection>(&s)) {
        j["type"] = "fixed";
        j["columns"] = f->columns;
    } else {
        const auto& a = std::get<AdaptiveSelection>(s);
        j["type"] = "adaptive";
        j["n_columns"] = a.n_columns;
        j["eligible"] = a.eligible;
        nlohmann::json ecdfs = nlohmann::json::array();
        for (const ColumnEcdf& e : a.ecdfs)
            ecdfs.push_back({{"column_index", e.column_index},
                             {"n_source", e.n_source},
                             {"sorted_values", e.sorted_values}});
        j["ecdfs"] = std::move(ecdfs);
    }
    return j;
}

inline SelectionStrategy strategy_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "fixed") {
        FixedSelection f;
        f.columns = j.at("columns").get<std::vector<std::size_t>>();
        return f;
    }
    if (type != "adaptive")
        throw ParseError("unknown strategy type '" + type + "'");
    AdaptiveSelection a;
    a.n_columns = j.at("n_columns").get<std::size_t>();
    a.eligible = j.at("eligible").get<std::vector<std::size_t>>();
    for (const auto& ej : j.at("ecdfs")) {
        ColumnEcdf e;
        e.column_index = ej.at("column_index").get<std::size_t>();
        e.n_source = ej.at("n_source").get<std::size_t>();
        e.sorted_values = ej.at("sorted_values").get<std::vector<double>>();
        a.ecdfs.push_back(std::move(e));
    }
    return a;
}

inline nlohmann::json bundle_to_json(const DetectorBundle& b) {
    return {{"format_version", b.format_version},
            {"key", b.key.key_bytes},
            {"score_kind", to_string(b.score_kind)},
            {"masking", b.masking},
            {"strategy", strategy_to_json(b.strategy)}};
}

inline DetectorBundle bundle_from_json(const nlohmann::json& j) {
    int version = j.at("format_version").get<int>();
    if (version != 1)
        throw ParseError("unsupported detector bundle version " +
                         std::to_string(version));
    DetectorBundle b{WatermarkKey(j.at("key").get<std::string>()),
                     strategy_from_json(j.at("strategy")),
                     score_kind_from_string(
                         j.at("score_kind").get<std::string>()),
                     j.at("masking").get<bool>(), version};
    validate(b.strategy);
    return b;
}

inline void save_bundle(const DetectorBundle& b, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << bundle_to_json(b).dump(1) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline DetectorBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return bundle_from_json(j);
}

}  // namespace muse
