#ifndef PQPKI_BYTES_HPP
#define PQPKI_BYTES_HPP

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pqpki {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(b.begin(), b.end());
}

inline void append(Bytes& out, ByteView more) {
    out.insert(out.end(), more.begin(), more.end());
}

inline void append_u32be(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_u64be(Bytes& out, std::uint64_t v) {
    append_u32be(out, static_cast<std::uint32_t>(v >> 32));
    append_u32be(out, static_cast<std::uint32_t>(v));
}

inline std::uint32_t read_u32be(ByteView b) {
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline std::uint64_t read_u64be(ByteView b) {
    return (std::uint64_t(read_u32be(b)) << 32) | read_u32be(b.subspan(4));
}

inline Bytes u32be_bytes(std::uint32_t v) {
    Bytes out;
    append_u32be(out, v);
    return out;
}

inline Bytes u64be_bytes(std::uint64_t v) {
    Bytes out;
    append_u64be(out, v);
    return out;
}

inline std::string to_hex(ByteView b) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (auto c : b) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

inline int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

// Returns empty on odd length or non-hex characters (callers treat that as
// a parameter problem; an empty input is a valid empty byte string).
inline bool from_hex(std::string_view s, Bytes& out) {
    if (s.size() % 2 != 0) return false;
    out.clear();
    out.reserve(s.size() / 2);
    for (std::size_t i = 0; i < s.size(); i += 2) {
        int hi = hex_nibble(s[i]);
        int lo = hex_nibble(s[i + 1]);
        if (hi < 0 || lo < 0) return false;
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return true;
}

inline Bytes xor_bytes(ByteView a, ByteView b) {
    Bytes out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i % b.size()];
    return out;
}

// Fixed-pattern comparison: every position contributes regardless of where
// the first mismatch sits. Use for tags and digests.
inline bool equal_bytes(ByteView a, ByteView b) {
    if (a.size() != b.size()) return false;
    std::uint8_t acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc |= a[i] ^ b[i];
    return acc == 0;
}

// True if `needle` occurs as a contiguous substring of `haystack`.
inline bool contains_subsequence(ByteView haystack, ByteView needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        if (std::memcmp(haystack.data() + i, needle.data(), needle.size()) == 0) return true;
    }
    return false;
}

}  // namespace pqpki

#endif
