#include "webcorpus/hash.hpp"

#include <cstring>

namespace webcorpus {

namespace {

inline std::uint32_t rotl(std::uint32_t v, int n) {
    return (v << n) | (v >> (32 - n));
}

}  // namespace

void Sha1::reset() {
    state_[0] = 0x67452301u;
    state_[1] = 0xEFCDAB89u;
    state_[2] = 0x98BADCFEu;
    state_[3] = 0x10325476u;
    state_[4] = 0xC3D2E1F0u;
    total_bytes_ = 0;
    buffered_ = 0;
}

void Sha1::process_block(const std::uint8_t* block) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
        w[i] = (std::uint32_t(block[i * 4]) << 24) | (std::uint32_t(block[i * 4 + 1]) << 16) |
               (std::uint32_t(block[i * 4 + 2]) << 8) | std::uint32_t(block[i * 4 + 3]);
    }
    for (int i = 16; i < 80; ++i) {
        w[i] = rotl(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    }

    std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3], e = state_[4];
    for (int i = 0; i < 80; ++i) {
        std::uint32_t f, k;
        if (i < 20) {
            f = (b & c) | (~b & d);
            k = 0x5A827999u;
        } else if (i < 40) {
            f = b ^ c ^ d;
            k = 0x6ED9EBA1u;
        } else if (i < 60) {
            f = (b & c) | (b & d) | (c & d);
            k = 0x8F1BBCDCu;
        } else {
            f = b ^ c ^ d;
            k = 0xCA62C1D6u;
        }
        std::uint32_t tmp = rotl(a, 5) + f + e + k + w[i];
        e = d;
        d = c;
        c = rotl(b, 30);
        b = a;
        a = tmp;
    }

    state_[0] += a;
    state_[1] += b;
    state_[2] += c;
    state_[3] += d;
    state_[4] += e;
}

void Sha1::update(const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    total_bytes_ += len;
    if (buffered_ > 0) {
        std::size_t take = std::min(len, sizeof(buffer_) - buffered_);
        std::memcpy(buffer_ + buffered_, p, take);
        buffered_ += take;
        p += take;
        len -= take;
        if (buffered_ == sizeof(buffer_)) {
            process_block(buffer_);
            buffered_ = 0;
        }
    }
    while (len >= 64) {
        process_block(p);
        p += 64;
        len -= 64;
    }
    if (len > 0) {
        std::memcpy(buffer_, p, len);
        buffered_ = len;
    }
}

std::array<std::uint8_t, 20> Sha1::finish() {
    std::uint64_t bit_len = total_bytes_ * 8;
    const std::uint8_t pad = 0x80;
    update(&pad, 1);
    const std::uint8_t zero = 0x00;
    while (buffered_ != 56) {
        update(&zero, 1);
    }
    std::uint8_t len_be[8];
    for (int i = 0; i < 8; ++i) {
        len_be[i] = std::uint8_t(bit_len >> (56 - 8 * i));
    }
    // update() counts these into total_bytes_, but bit_len is already latched.
    std::memcpy(buffer_ + buffered_, len_be, 8);
    buffered_ += 8;
    process_block(buffer_);
    buffered_ = 0;

    std::array<std::uint8_t, 20> out;
    for (int i = 0; i < 5; ++i) {
        out[i * 4] = std::uint8_t(state_[i] >> 24);
        out[i * 4 + 1] = std::uint8_t(state_[i] >> 16);
        out[i * 4 + 2] = std::uint8_t(state_[i] >> 8);
        out[i * 4 + 3] = std::uint8_t(state_[i]);
    }
    return out;
}

std::array<std::uint8_t, 20> sha1(const void* data, std::size_t len) {
    Sha1 h;
    h.update(data, len);
    return h.finish();
}

std::string base32_encode(const std::uint8_t* data, std::size_t len) {
    static const char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";
    std::string out;
    out.reserve((len * 8 + 4) / 5);
    std::uint32_t acc = 0;
    int bits = 0;
    for (std::size_t i = 0; i < len; ++i) {
        acc = (acc << 8) | data[i];
        bits += 8;
        while (bits >= 5) {
            bits -= 5;
            out.push_back(alphabet[(acc >> bits) & 0x1F]);
        }
    }
    if (bits > 0) {
        out.push_back(alphabet[(acc << (5 - bits)) & 0x1F]);
    }
    return out;
}

std::string sha1_base32(const void* data, std::size_t len) {
    auto digest = sha1(data, len);
    return base32_encode(digest.data(), digest.size());
}

std::string sha1_base32(std::string_view data) {
    return sha1_base32(data.data(), data.size());
}

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
    static const char alphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= len; i += 3) {
        std::uint32_t acc = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(alphabet[(acc >> 18) & 0x3F]);
        out.push_back(alphabet[(acc >> 12) & 0x3F]);
        out.push_back(alphabet[(acc >> 6) & 0x3F]);
        out.push_back(alphabet[acc & 0x3F]);
    }
    if (i + 1 == len) {
        std::uint32_t acc = data[i] << 16;
        out.push_back(alphabet[(acc >> 18) & 0x3F]);
        out.push_back(alphabet[(acc >> 12) & 0x3F]);
        out += "==";
    } else if (i + 2 == len) {
        std::uint32_t acc = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(alphabet[(acc >> 18) & 0x3F]);
        out.push_back(alphabet[(acc >> 12) & 0x3F]);
        out.push_back(alphabet[(acc >> 6) & 0x3F]);
        out += "=";
    }
    return out;
}

}  // namespace webcorpus
