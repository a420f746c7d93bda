// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsmscrub {

// Error taxonomy. Everything user-facing derives from Error so the CLI can
// map exception class -> exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct BackendError : Error {
    using Error::Error;
};
struct StageError : Error {
    using Error::Error;
};

template <class Ch, class Tr = std::char_traits<Ch>>
inline void cat_to_stream(std::basic_ostream<Ch, Tr>&) {}

template <class Ch, class Tr = std::char_traits<Ch>, class H, class... T>
inline void cat_to_stream(std::basic_ostream<Ch, Tr>& os, H&& head, T&&... tail) {
    os << std::forward<H>(head);
    cat_to_stream(os, std::forward<T>(tail)...);
}

// Stream-based string building; avoids pulling in a formatting library.
template <class... T>
inline std::string cat(T&&... vals) {
    std::ostringstream os;
    cat_to_stream(os, std::forward<T>(vals)...);
    return os.str();
}

struct Vec2f {
    float u = 0.f;
    float v = 0.f;
    friend bool operator==(const Vec2f&, const Vec2f&) = default;
};

struct Vec3f {
    float x = 0.f;
    float y = 0.f;
    float z = 0.f;
    friend bool operator==(const Vec3f&, const Vec3f&) = default;
};

using Tri = std::array<std::uint32_t, 3>;

// FNV-1a 64-bit. Used for the manifest file inventory and stage signatures;
// not a cryptographic hash.
inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

inline std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(cat("cannot open for hashing: ", path));
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return to_hex(h);
}

inline std::string hash_bytes(const std::string& bytes) {
    return to_hex(fnv1a64(bytes.data(), bytes.size()));
}

// splitmix64; used where a stateless per-coordinate random value is needed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline const char* kBase64Chars =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_decode(const std::string& in) {
    std::array<int, 256> lut;
    lut.fill(-1);
    for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kBase64Chars[i])] = i;
    std::string out;
    out.reserve(in.size() / 4 * 3);
    int val = 0, bits = 0;
    for (unsigned char c : in) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        int d = lut[c];
        if (d < 0) throw ParseError("invalid base64 character");
        val = (val << 6) | d;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((val >> bits) & 0xff));
        }
    }
    return out;
}

inline std::string base64_encode(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::string out;
    out.reserve((size + 2) / 3 * 4);
    for (std::size_t i = 0; i < size; i += 3) {
        std::uint32_t v = p[i] << 16;
        if (i + 1 < size) v |= p[i + 1] << 8;
        if (i + 2 < size) v |= p[i + 2];
        out.push_back(kBase64Chars[(v >> 18) & 63]);
        out.push_back(kBase64Chars[(v >> 12) & 63]);
        out.push_back(i + 1 < size ? kBase64Chars[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < size ? kBase64Chars[v & 63] : '=');
    }
    return out;
}

}  // namespace dsmscrub
