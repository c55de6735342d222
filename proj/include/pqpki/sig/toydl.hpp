#ifndef PQPKI_SIG_TOYDL_HPP
#define PQPKI_SIG_TOYDL_HPP

// Schnorr-style signatures over a 64-bit prime-order subgroup.  Deliberately
// small: the point of this scheme is to stand in for the discrete-log family
// that a large quantum computer breaks outright, and to be recoverable by
// brute force when instantiated with the breakable preset.  Never a real
// security boundary.
//
// Keys:       private x in [1, q-1], public y = g^x mod p (8-byte BE each)
// Signature:  e || s, 8-byte BE each, where
//               k = H(x || message) mod (q-1) + 1        (deterministic nonce)
//               r = g^k mod p
//               e = H(r || y || message) mod q
//               s = k + x*e mod q
// Verify:     r' = g^s * y^(q-e) mod p, accept iff H(r' || y || m) mod q == e

#include <cstdint>
#include <optional>

#include "pqpki/bytes.hpp"
#include "pqpki/errors.hpp"
#include "pqpki/rng.hpp"
#include "pqpki/sha256.hpp"
#include "pqpki/sig/params.hpp"

namespace pqpki::sig::toydl {

inline constexpr std::size_t kFieldBytes = 8;
inline constexpr std::size_t kSignatureBytes = 2 * kFieldBytes;

struct RawKeyPair {
    Bytes public_key;   // y, 8-byte BE
    Bytes private_key;  // x, 8-byte BE
};

namespace detail {

// Length-prefixed parts so adjacent fields cannot blur into each other.
inline std::uint64_t hash_to_u64(const char* label,
                                 std::initializer_list<ByteView> parts) {
    Sha256 h;
    h.update(label);
    for (ByteView p : parts) {
        h.update_u64be(p.size());
        h.update(p);
    }
    const auto digest = h.finish();
    return read_u64be(ByteView(digest.data(), 8));
}

}  // namespace detail

inline RawKeyPair keygen(const SchemeParams& p, SeedRng& rng) {
    const std::uint64_t x = 1 + rng.below(p.subgroup_order_q - 1);
    const std::uint64_t y =
        sig::detail::powmod_u64(p.generator_g, x, p.prime_p);
    return RawKeyPair{u64be_bytes(y), u64be_bytes(x)};
}

inline Bytes sign(const SchemeParams& p, ByteView private_key, ByteView message) {
    if (private_key.size() != kFieldBytes)
        throw ParameterError("toy-dl private key must be 8 bytes");
    const std::uint64_t q = p.subgroup_order_q;
    const std::uint64_t x = read_u64be(private_key);
    if (x == 0 || x >= q) throw ParameterError("toy-dl private key out of range");
    const std::uint64_t y = sig::detail::powmod_u64(p.generator_g, x, p.prime_p);
    const std::uint64_t k =
        detail::hash_to_u64("pqpki.toydl.nonce", {private_key, message}) % (q - 1) + 1;
    const std::uint64_t r = sig::detail::powmod_u64(p.generator_g, k, p.prime_p);
    const Bytes rb = u64be_bytes(r);
    const Bytes yb = u64be_bytes(y);
    const std::uint64_t e = detail::hash_to_u64(
        "pqpki.toydl.chal", {ByteView(rb), ByteView(yb), message}) % q;
    const std::uint64_t s = (k + sig::detail::mulmod_u64(x, e, q)) % q;
    Bytes out;
    append_u64be(out, e);
    append_u64be(out, s);
    return out;
}

inline bool verify(const SchemeParams& p, ByteView public_key, ByteView message,
                   ByteView signature) {
    if (public_key.size() != kFieldBytes)
        throw DecodeError("toy-dl public key must be 8 bytes");
    if (signature.size() != kSignatureBytes)
        throw DecodeError("toy-dl signature must be 16 bytes");
    const std::uint64_t q = p.subgroup_order_q;
    const std::uint64_t y = read_u64be(public_key);
    if (y == 0 || y >= p.prime_p) return false;
    const std::uint64_t e = read_u64be(signature);
    const std::uint64_t s = read_u64be(signature.subspan(8));
    if (e >= q || s >= q) return false;
    // y has order q, so y^(q-e) is the inverse of y^e.
    const std::uint64_t r = sig::detail::mulmod_u64(
        sig::detail::powmod_u64(p.generator_g, s, p.prime_p),
        sig::detail::powmod_u64(y, q - e, p.prime_p), p.prime_p);
    const Bytes rb = u64be_bytes(r);
    const std::uint64_t expect = detail::hash_to_u64(
        "pqpki.toydl.chal", {ByteView(rb), public_key, message}) % q;
    return expect == e;
}

struct DlogResult {
    std::optional<std::uint64_t> exponent;  // absent: budget hit or no solution
    std::uint64_t operations = 0;           // group multiplications spent
};

// Exhaustive search for x with g^x = y (mod p) over x in [0, q-1].  Gives up
// once `budget` multiplications are spent.  A found exponent is re-checked
// before being reported.
inline DlogResult brute_force_dlog(const SchemeParams& p, ByteView public_key,
                                   std::uint64_t budget) {
    if (public_key.size() != kFieldBytes)
        throw DecodeError("toy-dl public key must be 8 bytes");
    const std::uint64_t y = read_u64be(public_key);
    DlogResult res;
    std::uint64_t acc = 1;
    for (std::uint64_t x = 0; x < p.subgroup_order_q; ++x) {
        if (acc == y) {
            if (sig::detail::powmod_u64(p.generator_g, x, p.prime_p) != y)
                throw ParameterError("dlog search accumulator drifted");
            res.exponent = x;
            return res;
        }
        if (res.operations >= budget) return res;
        acc = sig::detail::mulmod_u64(acc, p.generator_g, p.prime_p);
        ++res.operations;
    }
    return res;  // y outside the subgroup
}

}  // namespace pqpki::sig::toydl

#endif
