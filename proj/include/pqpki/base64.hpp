#ifndef PQPKI_BASE64_HPP
#define PQPKI_BASE64_HPP

#include <string>
#include <string_view>

#include "pqpki/bytes.hpp"
#include "pqpki/errors.hpp"

namespace pqpki {

inline std::string base64_encode(ByteView data) {
    static constexpr char alphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
    }
    std::size_t rem = data.size() - i;
    if (rem == 1) {
        std::uint32_t v = data[i] << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.append("==");
    } else if (rem == 2) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

inline int base64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

// Whitespace anywhere is skipped so wrapped armor bodies decode directly.
inline Bytes base64_decode(std::string_view text) {
    Bytes out;
    std::uint32_t acc = 0;
    int bits = 0;
    std::size_t symbols = 0;
    std::size_t pad = 0;
    for (char c : text) {
        if (c == '\n' || c == '\r' || c == ' ' || c == '\t') continue;
        if (c == '=') {
            ++pad;
            continue;
        }
        if (pad > 0) throw DecodeError("base64: data after padding");
        int v = base64_value(c);
        if (v < 0) throw DecodeError("base64: invalid character");
        ++symbols;
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>(acc >> bits));
        }
    }
    // Strict tail: full quartets, padding that matches the remainder, and no
    // stray bits smuggled into the final symbol.
    const std::size_t expected_pad = (4 - symbols % 4) % 4;
    if ((symbols + pad) % 4 != 0 || pad != expected_pad || pad > 2 ||
        (bits != 0 && (acc & ((1u << bits) - 1)) != 0)) {
        throw DecodeError("base64: malformed tail");
    }
    return out;
}

// Armored text form: base64 of the TLV body between BEGIN/END lines,
// wrapped at 64 columns.
//
//   -----BEGIN PQPKI <KIND>-----
//   ...base64...
//   -----END PQPKI <KIND>-----
inline std::string armor(std::string_view kind, ByteView body) {
    std::string b64 = base64_encode(body);
    std::string out = "-----BEGIN PQPKI " + std::string(kind) + "-----\n";
    for (std::size_t i = 0; i < b64.size(); i += 64) {
        out += b64.substr(i, 64);
        out += '\n';
    }
    out += "-----END PQPKI " + std::string(kind) + "-----\n";
    return out;
}

// Decodes an armored block; the kind must match exactly.
inline Bytes dearmor(std::string_view kind, std::string_view text) {
    std::string begin = "-----BEGIN PQPKI " + std::string(kind) + "-----";
    std::string end = "-----END PQPKI " + std::string(kind) + "-----";
    auto b = text.find(begin);
    if (b == std::string_view::npos) throw DecodeError("armor: missing BEGIN for " + std::string(kind));
    auto e = text.find(end, b);
    if (e == std::string_view::npos) throw DecodeError("armor: missing END for " + std::string(kind));
    auto body = text.substr(b + begin.size(), e - b - begin.size());
    return base64_decode(body);
}

}  // namespace pqpki

#endif
