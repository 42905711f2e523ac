#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace muse {

using Digest = std::array<std::uint8_t, 32>;

// FIPS 180-4 SHA-256. Self-contained so the library stays header-only;
// bit-exactness is pinned by the golden-vector conformance suite.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset() {
        state_ = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                  0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
        buffer_len_ = 0;
        total_len_ = 0;
    }

    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        total_len_ += len;
        if (buffer_len_ > 0) {
            std::size_t off = buffer_len_ & 63;
            std::size_t take = std::min(len, std::size_t(64) - off);
            std::memcpy(buffer_.data() + off, p, take);
            buffer_len_ = off + take;
            p += take;
            len -= take;
            if (buffer_len_ == 64) {
                compress(buffer_.data());
                buffer_len_ = 0;
            }
        }
        while (len >= 64) {
            compress(p);
            p += 64;
            len -= 64;
        }
        if (len > 0) {
            std::memcpy(buffer_.data(), p, len);
            buffer_len_ = len;
        }
    }

    void update(std::string_view s) { update(s.data(), s.size()); }

    Digest finalize() {
        std::uint64_t bit_len = total_len_ * 8;
        std::uint8_t pad[72];
        std::size_t pad_len = (buffer_len_ < 56) ? 56 - buffer_len_
                                                 : 120 - buffer_len_;
        pad[0] = 0x80;
        std::memset(pad + 1, 0, pad_len - 1);
        for (int i = 0; i < 8; ++i)
            pad[pad_len + i] =
                static_cast<std::uint8_t>(bit_len >> (56 - 8 * i));
        update(pad, pad_len + 8);

        Digest out;
        for (int i = 0; i < 8; ++i) {
            out[4 * i + 0] = static_cast<std::uint8_t>(state_[i] >> 24);
            out[4 * i + 1] = static_cast<std::uint8_t>(state_[i] >> 16);
            out[4 * i + 2] = static_cast<std::uint8_t>(state_[i] >> 8);
            out[4 * i + 3] = static_cast<std::uint8_t>(state_[i]);
        }
        return out;
    }

    static Digest hash(std::string_view data) {
        Sha256 h;
        h.update(data);
        return h.finalize();
    }

private:
    static std::uint32_t rotr(std::uint32_t x, int n) {
        return (x >> n) | (x << (32 - n));
    }

    void compress(const std::uint8_t* block) {
        static constexpr std::uint32_t K[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b,
            0x59f111f1, 0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01,
            0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7,
            0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc,
            0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152,
            0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
            0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
            0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
            0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819,
            0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116, 0x1e376c08,
            0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f,
            0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
            0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(block[4 * i]) << 24) |
                   (std::uint32_t(block[4 * i + 1]) << 16) |
                   (std::uint32_t(block[4 * i + 2]) << 8) |
                   std::uint32_t(block[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^
                               (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^
                               (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }

        std::uint32_t a = state_[0], b = state_[1], c = state_[2],
                      d = state_[3], e = state_[4], f = state_[5],
                      g = state_[6], h = state_[7];
        for (int i = 0; i < 64; ++i) {
            std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = h + S1 + ch + K[i] + w[i];
            std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = S0 + maj;
            h = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        state_[0] += a;
        state_[1] += b;
        state_[2] += c;
        state_[3] += d;
        state_[4] += e;
        state_[5] += f;
        state_[6] += g;
        state_[7] += h;
    }

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_;
    std::size_t buffer_len_ = 0;
    std::uint64_t total_len_ = 0;
};

/// HMAC-SHA-256 with the inner/outer key blocks pre-absorbed, so scoring
/// many messages under one key costs two compressions per message.
class HmacSha256 {
public:
    explicit HmacSha256(std::string_view key) {
        std::array<std::uint8_t, 64> k{};
        if (key.size() > 64) {
            Digest kd = Sha256::hash(key);
            std::memcpy(k.data(), kd.data(), kd.size());
        } else {
            std::memcpy(k.data(), key.data(), key.size());
        }
        std::array<std::uint8_t, 64> pad;
        for (int i = 0; i < 64; ++i) pad[i] = k[i] ^ 0x36;
        inner_.update(pad.data(), 64);
        for (int i = 0; i < 64; ++i) pad[i] = k[i] ^ 0x5c;
        outer_.update(pad.data(), 64);
    }

    Digest operator()(std::string_view message) const {
        Sha256 inner = inner_;
        inner.update(message);
        Digest id = inner.finalize();
        Sha256 outer = outer_;
        outer.update(id.data(), id.size());
        return outer.finalize();
    }

private:
    Sha256 inner_;  // midstate after the ipad block
    Sha256 outer_;  // midstate after the opad block
};

inline Digest hmac_sha256(std::string_view key, std::string_view message) {
    return HmacSha256(key)(message);
}

inline std::string to_hex(const Digest& d) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t b : d) {
        out += hex[b >> 4];
        out += hex[b & 0xf];
    }
    return out;
}

}  // namespace muse
