#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "muse/canonical.hpp"
#include "muse/errors.hpp"
#include "muse/hmac_sha256.hpp"
#include "muse/rng.hpp"
#include "muse/table.hpp"

namespace muse {

struct WatermarkKey {
    std::string key_bytes;

    explicit WatermarkKey(std::string bytes) : key_bytes(std::move(bytes)) {
        if (key_bytes.empty()) throw InvalidConfig("watermark key is empty");
    }
};

enum class ScoreFunctionKind { Bernoulli05, Uniform01 };

inline const char* to_string(ScoreFunctionKind k) {
    return k == ScoreFunctionKind::Bernoulli05 ? "bernoulli" : "uniform";
}

inline ScoreFunctionKind score_kind_from_string(const std::string& s) {
    if (s == "bernoulli") return ScoreFunctionKind::Bernoulli05;
    if (s == "uniform") return ScoreFunctionKind::Uniform01;
    throw InvalidConfig("unknown score function '" + s + "'");
}

/// Canonical byte encoding of the selected cells of a row:
/// `<index>=<value>` units joined by 0x1F. Numeric values use the fixed
/// 6-fractional-digit format, so the encoding is identical whether the
/// row came from memory or from a CSV round-trip.
inline std::string canonical_encode(const Row& row,
                                    const std::vector<std::size_t>& selected) {
    constexpr char kSep = '\x1f';
    std::string out;
    std::size_t prev = 0;
    bool first = true;
    for (std::size_t j : selected) {
        if (j >= row.size())
            throw IndexOutOfRange("selected column " + std::to_string(j) +
                                  " out of range (row has " +
                                  std::to_string(row.size()) + " cells)");
        if (!first && j <= prev)
            throw IndexOutOfRange("selected columns must be ascending");
        if (!first) out += kSep;
        out += std::to_string(j);
        out += '=';
        if (is_numeric(row[j]))
            out += canonical_numeric(num(row[j]));
        else
            out += cat(row[j]);
        prev = j;
        first = false;
    }
    return out;
}

inline Digest keyed_hash(const WatermarkKey& key, std::string_view message) {
    return hmac_sha256(key.key_bytes, message);
}

inline std::uint64_t digest_prefix_u64(const Digest& d) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d[i];
    return v;
}

// Bernoulli05: low bit of the first digest byte. Uniform01: leading
// 8 bytes big-endian over 2^64.
inline double score_from_digest(const Digest& d, ScoreFunctionKind kind) {
    if (kind == ScoreFunctionKind::Bernoulli05)
        return static_cast<double>(d[0] & 1);
    return static_cast<double>(digest_prefix_u64(d)) * 0x1.0p-64;
}

inline double score_row(const WatermarkKey& key, const Row& row,
                        const std::vector<std::size_t>& selected,
                        ScoreFunctionKind kind) {
    return score_from_digest(keyed_hash(key, canonical_encode(row, selected)),
                             kind);
}

// Same as score_row but reusing a prepared HMAC key state.
inline double score_row(const HmacSha256& mac, const Row& row,
                        const std::vector<std::size_t>& selected,
                        ScoreFunctionKind kind) {
    return score_from_digest(mac(canonical_encode(row, selected)), kind);
}

}  // namespace muse
