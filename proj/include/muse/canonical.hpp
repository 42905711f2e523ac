#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

#include "muse/errors.hpp"

namespace muse {

/// Canonical decimal rendering of a numeric cell: fixed 6 fractional
/// digits, correctly rounded (ties to even), "-0.000000" normalized to
/// "0.000000". This is the byte representation used both for CSV output
/// and for hashing, so values survive serialization round-trips exactly.
inline std::string canonical_numeric(double v) {
    char buf[512];
    int n = std::snprintf(buf, sizeof(buf), "%.6f", v);
    if (n < 0 || n >= static_cast<int>(sizeof(buf)))
        throw NonFiniteValue("numeric value not representable");
    std::string s(buf, static_cast<std::size_t>(n));
    if (s[0] == '-' && s.find_first_not_of("0.", 1) == std::string::npos)
        s.erase(0, 1);  // all-zero negative -> positive zero
    return s;
}

// Projection onto the canonical 6-digit grid. Idempotent.
inline double canonical_quantize(double v) {
    return std::strtod(canonical_numeric(v).c_str(), nullptr);
}

}  // namespace muse
