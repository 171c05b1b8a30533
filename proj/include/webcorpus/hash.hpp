#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace webcorpus {

// Incremental SHA-1. Self-contained so archive digests do not depend on
// a crypto library being present at runtime.
class Sha1 {
public:
    Sha1() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    std::array<std::uint8_t, 20> finish();

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t state_[5];
    std::uint64_t total_bytes_ = 0;
    std::uint8_t buffer_[64];
    std::size_t buffered_ = 0;
};

std::array<std::uint8_t, 20> sha1(const void* data, std::size_t len);

// RFC 4648 base32 (A-Z, 2-7), no padding. A 20-byte SHA-1 digest encodes
// to exactly 32 characters, the convention used by CDX digest fields.
std::string base32_encode(const std::uint8_t* data, std::size_t len);

// base32(SHA-1(data)) in one step.
std::string sha1_base32(std::string_view data);
std::string sha1_base32(const void* data, std::size_t len);

// RFC 4648 base64 with padding (JSON byte-field output).
std::string base64_encode(const std::uint8_t* data, std::size_t len);

}  // namespace webcorpus
