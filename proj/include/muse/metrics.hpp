#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "muse/errors.hpp"
#include "muse/table.hpp"

namespace muse {

/// Exact two-sample Kolmogorov-Smirnov distance: sup |F_a - F_b| over the
/// two empirical CDFs, by a merge scan of the sorted samples.
inline double kst_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw EmptyInput("kst_distance needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double sup = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        sup = std::max(sup, std::abs(static_cast<double>(i) / na -
                                     static_cast<double>(j) / nb));
    }
    return sup;
}

/// Total variation distance between empirical category frequencies,
/// over the union of both category sets.
inline double tvd_distance(const std::vector<std::string>& a,
                           const std::vector<std::string>& b) {
    if (a.empty() || b.empty())
        throw EmptyInput("tvd_distance needs nonempty samples");
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& s : a) ++counts[s].first;
    for (const auto& s : b) ++counts[s].second;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double sum = 0.0;
    for (const auto& [cat, c] : counts)
        sum += std::abs(static_cast<double>(c.first) / na -
                        static_cast<double>(c.second) / nb);
    return 0.5 * sum;
}

struct FidelityReport {
    double marginal = 1.0;     // 1 - mean per-column distance
    double correlation = 1.0;  // 1 - mean per-pair distance
    std::vector<std::pair<std::string, double>> per_column;
    std::vector<std::tuple<std::string, std::string, double>> per_pair;
    std::vector<std::pair<std::string, std::string>> skipped_pairs;
};

namespace detail {

inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y, bool& degenerate) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        degenerate = true;
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

// Joint-frequency TVD over the union of observed pairs.
inline double contingency_distance(
    const std::vector<std::string>& a1, const std::vector<std::string>& a2,
    const std::vector<std::string>& b1, const std::vector<std::string>& b2) {
    std::map<std::pair<std::string, std::string>,
             std::pair<std::size_t, std::size_t>> counts;
    for (std::size_t i = 0; i < a1.size(); ++i) ++counts[{a1[i], a2[i]}].first;
    for (std::size_t i = 0; i < b1.size(); ++i) ++counts[{b1[i], b2[i]}].second;
    const double na = static_cast<double>(a1.size());
    const double nb = static_cast<double>(b1.size());
    double sum = 0.0;
    for (const auto& [k, c] : counts)
        sum += std::abs(static_cast<double>(c.first) / na -
                        static_cast<double>(c.second) / nb);
    return 0.5 * sum;
}

// Decile edges of the reference sample; values map to bins 0..9.
inline std::vector<double> decile_edges(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> edges;
    edges.reserve(9);
    for (std::size_t d = 1; d <= 9; ++d)
        edges.push_back(v[d * v.size() / 10]);
    return edges;
}

inline std::vector<std::string> bin_by_edges(const std::vector<double>& v,
                                             const std::vector<double>& edges) {
    std::vector<std::string> out;
    out.reserve(v.size());
    for (double x : v) {
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        out.push_back("b" + std::to_string(it - edges.begin()));
    }
    return out;
}

}  // namespace detail

/// Per-pair column-correlation distances between a reference table and a
/// synthetic one: half the absolute Pearson difference for numeric pairs,
/// contingency-table TVD for categorical pairs, and contingency TVD after
/// decile-binning the numeric side (deciles of the reference) for mixed
/// pairs. Zero-variance numeric pairs are skipped and reported.
inline void correlation_distance(const Table& real_t, const Table& synth,
                                 FidelityReport& report) {
    if (!(real_t.schema() == synth.schema()))
        throw SchemaMismatch("fidelity metrics need identical schemas");
    if (real_t.n_rows() < 2 || synth.n_rows() < 2)
        throw EmptyInput("correlation metrics need at least 2 rows per table");
    const Schema& s = real_t.schema();
    for (std::size_t j = 0; j < s.size(); ++j) {
        for (std::size_t k = j + 1; k < s.size(); ++k) {
            const bool nj = s.type(j) == ColumnType::Numeric;
            const bool nk = s.type(k) == ColumnType::Numeric;
            double dist = 0.0;
            if (nj && nk) {
                bool degenerate = false;
                double rr = detail::pearson(real_t.numeric_column(j),
                                            real_t.numeric_column(k),
                                            degenerate);
                double rs = detail::pearson(synth.numeric_column(j),
                                            synth.numeric_column(k),
                                            degenerate);
                if (degenerate) {
                    report.skipped_pairs.emplace_back(s.name(j), s.name(k));
                    continue;
                }
                dist = 0.5 * std::abs(rr - rs);
            } else if (!nj && !nk) {
                dist = detail::contingency_distance(
                    real_t.categorical_column(j), real_t.categorical_column(k),
                    synth.categorical_column(j), synth.categorical_column(k));
            } else {
                const std::size_t num_col = nj ? j : k;
                const std::size_t cat_col = nj ? k : j;
                auto edges = detail::decile_edges(real_t.numeric_column(num_col));
                dist = detail::contingency_distance(
                    detail::bin_by_edges(real_t.numeric_column(num_col), edges),
                    real_t.categorical_column(cat_col),
                    detail::bin_by_edges(synth.numeric_column(num_col), edges),
                    synth.categorical_column(cat_col));
            }
            report.per_pair.emplace_back(s.name(j), s.name(k), dist);
        }
    }
}

/// Per-column marginal distances: KS for numeric columns, TVD for
/// categorical ones.
inline void marginal_similarity(const Table& real_t, const Table& synth,
                                FidelityReport& report) {
    if (!(real_t.schema() == synth.schema()))
        throw SchemaMismatch("fidelity metrics need identical schemas");
    const Schema& s = real_t.schema();
    for (std::size_t j = 0; j < s.size(); ++j) {
        double dist =
            s.type(j) == ColumnType::Numeric
                ? kst_distance(real_t.numeric_column(j), synth.numeric_column(j))
                : tvd_distance(real_t.categorical_column(j),
                               synth.categorical_column(j));
        report.per_column.emplace_back(s.name(j), dist);
    }
}

inline FidelityReport fidelity_report(const Table& real_t, const Table& synth) {
    FidelityReport r;
    marginal_similarity(real_t, synth, r);
    correlation_distance(real_t, synth, r);
    double sum = 0.0;
    for (const auto& [name, d] : r.per_column) sum += d;
    r.marginal = r.per_column.empty()
                     ? 1.0
                     : 1.0 - sum / static_cast<double>(r.per_column.size());
    sum = 0.0;
    for (const auto& [a, b, d] : r.per_pair) sum += d;
    r.correlation = r.per_pair.empty()
                        ? 1.0
                        : 1.0 - sum / static_cast<double>(r.per_pair.size());
    return r;
}

struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr), fpr ascending
    double auc = 0.0;
};

/// ROC of watermarked vs unwatermarked score samples via a threshold
/// sweep; AUC is the rank statistic with ties counted half.
inline RocCurve roc(const std::vector<double>& wm_scores,
                    const std::vector<double>& nowm_scores) {
    if (wm_scores.empty() || nowm_scores.empty())
        throw EmptyInput("roc needs nonempty score lists");

    std::vector<std::pair<double, int>> pooled;  // (score, is_wm)
    pooled.reserve(wm_scores.size() + nowm_scores.size());
    for (double s : wm_scores) pooled.emplace_back(s, 1);
    for (double s : nowm_scores) pooled.emplace_back(s, 0);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    const double nw = static_cast<double>(wm_scores.size());
    const double nn = static_cast<double>(nowm_scores.size());

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < pooled.size()) {
        double t = pooled[i].first;
        while (i < pooled.size() && pooled[i].first == t) {
            if (pooled[i].second) ++tp;
            else ++fp;
            ++i;
        }
        curve.points.emplace_back(static_cast<double>(fp) / nn,
                                  static_cast<double>(tp) / nw);
    }

    // Rank-based AUC: average ranks over ties in the ascending pooled order.
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double wm_rank_sum = 0.0;
    i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
        for (std::size_t k = i; k < j; ++k)
            if (pooled[k].second) wm_rank_sum += avg_rank;
        i = j;
    }
    curve.auc = (wm_rank_sum - nw * (nw + 1.0) / 2.0) / (nw * nn);
    return curve;
}

/// Highest TPR among operating points whose FPR does not exceed the
/// target (conservative step interpolation).
inline double tpr_at_fpr(const RocCurve& curve, double target_fpr) {
    double best = 0.0;
    for (const auto& [fpr, tpr] : curve.points)
        if (fpr <= target_fpr) best = std::max(best, tpr);
    return best;
}

}  // namespace muse
