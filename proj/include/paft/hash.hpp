#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

namespace paft {

// 64-bit FNV-1a. This is the one stable hash used everywhere a documented,
// cross-platform value is required: feature buckets, prompt ids, parameter
// digests, config-addressed run directories.
//
// Reference vectors (bytes -> hash):
//   ""    -> 0xcbf29ce484222325
//   "a"   -> 0xaf63dc4c8601ec8c
//   "abc" -> 0xe71fa2190541574b
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= static_cast<uint64_t>(p[i]);
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a64(std::string_view s) {
    return fnv1a64(s.data(), s.size());
}

/// Digest of a double vector: FNV-1a over the little-endian IEEE-754 bytes
/// of each value, in order. Bit-exact across runs on the same platform.
inline uint64_t digest_doubles(const std::vector<double>& values, uint64_t seed = 0xcbf29ce484222325ull) {
    uint64_t h = seed;
    for (double v : values) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) {
            bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
        }
        h = fnv1a64(bytes, 8, h);
    }
    return h;
}

inline std::string hex64(uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

} // namespace paft
