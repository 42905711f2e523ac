#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "muse/errors.hpp"
#include "muse/scoring.hpp"

namespace muse {

struct CalibrationParams {
    double alpha = 1e-4;      // target false positive rate, in (0,1)
    std::uint64_t n_rows = 0; // watermarked table size N
};

struct CalibrationResult {
    std::uint64_t m = 2;      // repeated samples per output row
    double fpr_bound = 1.0;   // bound achieved at (n_rows, m)
};

/// Hoeffding-style bound on the probability that an unwatermarked table
/// outscores a watermarked one: exp(-(N/2) * (0.5 - 0.5^m)^2).
inline double fpr_bound(std::uint64_t n_rows, std::uint64_t m) {
    double gap = 0.5 - std::pow(0.5, static_cast<double>(m));
    return std::exp(-0.5 * static_cast<double>(n_rows) * gap * gap);
}

// Smallest admissible N for a target alpha (the bound needs N > 8 ln(1/a)).
inline std::uint64_t min_valid_rows(double alpha) {
    return static_cast<std::uint64_t>(std::floor(8.0 * std::log(1.0 / alpha))) +
           1;
}

/// Repeated-sample count needed to push the false positive bound below
/// alpha: m = max(2, ceil(log_0.5(0.5 - sqrt(2 ln(1/alpha) / N)))).
/// Natural logarithm throughout.
inline CalibrationResult required_samples(const CalibrationParams& p) {
    if (!(p.alpha > 0.0 && p.alpha < 1.0))
        throw InvalidConfig("alpha must lie in (0,1)");
    if (p.n_rows < 1) throw InvalidConfig("n_rows must be >= 1");

    const double log_inv_alpha = std::log(1.0 / p.alpha);
    const double n = static_cast<double>(p.n_rows);
    if (n <= 8.0 * log_inv_alpha)
        throw InvalidRegime(
            "calibration needs N > 8*ln(1/alpha); minimum admissible N for "
            "alpha=" + std::to_string(p.alpha) + " is " +
            std::to_string(min_valid_rows(p.alpha)));

    const double arg = 0.5 - std::sqrt(2.0 * log_inv_alpha / n);
    if (arg <= 0.0)
        throw InvalidRegime("calibration argument non-positive at N=" +
                            std::to_string(p.n_rows));
    const double m_real = std::log(arg) / std::log(0.5);
    std::uint64_t m = static_cast<std::uint64_t>(std::ceil(m_real));
    if (m < 2) m = 2;

    CalibrationResult r;
    r.m = m;
    r.fpr_bound = fpr_bound(p.n_rows, m);
    return r;
}

// Expected score of the best of m candidates: 1 - 0.5^m for the
// Bernoulli(0.5) score, m/(m+1) for Uniform[0,1).
inline double expected_max_score(std::uint64_t m, ScoreFunctionKind kind) {
    if (m < 1) throw InvalidConfig("m must be >= 1");
    if (kind == ScoreFunctionKind::Bernoulli05)
        return 1.0 - std::pow(0.5, static_cast<double>(m));
    return static_cast<double>(m) / (static_cast<double>(m) + 1.0);
}

}  // namespace muse
