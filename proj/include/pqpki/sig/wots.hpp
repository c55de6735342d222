#ifndef PQPKI_SIG_WOTS_HPP
#define PQPKI_SIG_WOTS_HPP

// Winternitz one-time signatures over SHA-256 chains, with per-position keys
// and bitmasks derived from a public seed.  The same chain machinery signs
// standalone messages and tree leaves; the `leaf` argument keeps the two
// address spaces apart (standalone keys always use leaf 0 against their own
// seeds, tree keys pass their leaf index).
//
// Standalone key layout:
//   public  = publicSeed(n) || compressedChainEnds(n)
//   private = secretSeed(n) || publicSeed(n)
// Signature payload: len chains of n bytes each, concatenated.

#include <cstdint>
#include <vector>

#include "pqpki/bytes.hpp"
#include "pqpki/errors.hpp"
#include "pqpki/rng.hpp"
#include "pqpki/sha256.hpp"
#include "pqpki/sig/params.hpp"

namespace pqpki::sig::wots {

// Chain start values, one per chain, derived from the secret seed.
inline Bytes chain_secret(ByteView secret_seed, std::uint32_t leaf,
                          std::uint32_t chain, std::uint32_t n) {
    const Bytes pos_leaf = u32be_bytes(leaf);
    const Bytes pos_chain = u32be_bytes(chain);
    return labeled_hash("pqpki.wots.sk",
                        {secret_seed, ByteView(pos_leaf), ByteView(pos_chain)}, n);
}

// One keyed, masked chain step: F(key, value ^ mask).
inline Bytes chain_step(ByteView value, ByteView public_seed, std::uint32_t leaf,
                        std::uint32_t chain, std::uint32_t step, std::uint32_t n) {
    const Bytes pos_leaf = u32be_bytes(leaf);
    const Bytes pos_chain = u32be_bytes(chain);
    const Bytes pos_step = u32be_bytes(step);
    const Bytes key = labeled_hash(
        "pqpki.wots.key",
        {public_seed, ByteView(pos_leaf), ByteView(pos_chain), ByteView(pos_step)},
        n);
    const Bytes mask = labeled_hash(
        "pqpki.wots.msk",
        {public_seed, ByteView(pos_leaf), ByteView(pos_chain), ByteView(pos_step)},
        n);
    const Bytes masked = xor_bytes(value, mask);
    return labeled_hash("pqpki.wots.f", {ByteView(key), ByteView(masked)}, n);
}

inline Bytes apply_chain(Bytes value, ByteView public_seed, std::uint32_t leaf,
                         std::uint32_t chain, std::uint32_t from_step,
                         std::uint32_t num_steps, std::uint32_t n) {
    for (std::uint32_t s = 0; s < num_steps; ++s)
        value = chain_step(value, public_seed, leaf, chain, from_step + s, n);
    return value;
}

// Splits an n-byte digest into len1 base-w digits (big-endian bit order) and
// appends the len2 checksum digits of sum(w-1-d).
inline std::vector<std::uint32_t> message_digits(ByteView digest, std::uint32_t n,
                                                 std::uint32_t w) {
    const WotsChainLengths cl = wots_chain_lengths(n, w);
    if (digest.size() != n) throw ParameterError("digest length mismatch");
    const std::uint32_t lgw = static_cast<std::uint32_t>(std::bit_width(w) - 1);
    std::vector<std::uint32_t> digits;
    digits.reserve(cl.len);
    for (std::uint32_t i = 0; i < cl.len1; ++i) {
        const std::uint32_t bit = i * lgw;
        const std::uint32_t byte = bit / 8;
        const std::uint32_t shift = 8 - lgw - (bit % 8);
        digits.push_back((digest[byte] >> shift) & (w - 1));
    }
    std::uint64_t csum = 0;
    for (std::uint32_t d : digits) csum += w - 1 - d;
    for (std::uint32_t i = 0; i < cl.len2; ++i) {
        const std::uint32_t shift = lgw * (cl.len2 - 1 - i);
        digits.push_back(static_cast<std::uint32_t>(csum >> shift) & (w - 1));
    }
    return digits;
}

// Full chain-end values for one leaf, in chain order.
inline std::vector<Bytes> public_chain_ends(ByteView secret_seed,
                                            ByteView public_seed,
                                            std::uint32_t leaf, std::uint32_t n,
                                            std::uint32_t w) {
    const WotsChainLengths cl = wots_chain_lengths(n, w);
    std::vector<Bytes> ends;
    ends.reserve(cl.len);
    for (std::uint32_t c = 0; c < cl.len; ++c)
        ends.push_back(apply_chain(chain_secret(secret_seed, leaf, c, n),
                                   public_seed, leaf, c, 0, w - 1, n));
    return ends;
}

// Signature chains for a digest: chain c advanced to its digit.
inline Bytes sign_digest(ByteView secret_seed, ByteView public_seed,
                         std::uint32_t leaf, ByteView digest, std::uint32_t n,
                         std::uint32_t w) {
    const auto digits = message_digits(digest, n, w);
    Bytes out;
    out.reserve(digits.size() * n);
    for (std::uint32_t c = 0; c < digits.size(); ++c) {
        const Bytes v = apply_chain(chain_secret(secret_seed, leaf, c, n),
                                    public_seed, leaf, c, 0, digits[c], n);
        append(out, v);
    }
    return out;
}

// Completes the chains of a signature payload back to their end values.
inline std::vector<Bytes> chain_ends_from_signature(ByteView payload,
                                                    ByteView public_seed,
                                                    std::uint32_t leaf,
                                                    ByteView digest,
                                                    std::uint32_t n,
                                                    std::uint32_t w) {
    const auto digits = message_digits(digest, n, w);
    if (payload.size() != digits.size() * static_cast<std::size_t>(n))
        throw DecodeError("wots signature payload has wrong length");
    std::vector<Bytes> ends;
    ends.reserve(digits.size());
    for (std::uint32_t c = 0; c < digits.size(); ++c) {
        Bytes v(payload.begin() + static_cast<std::ptrdiff_t>(c) * n,
                payload.begin() + static_cast<std::ptrdiff_t>(c + 1) * n);
        ends.push_back(apply_chain(std::move(v), public_seed, leaf, c, digits[c],
                                   w - 1 - digits[c], n));
    }
    return ends;
}

inline Bytes compress_chain_ends(ByteView public_seed, std::uint32_t leaf,
                                 const std::vector<Bytes>& ends, std::uint32_t n) {
    Sha256 h;
    h.update("pqpki.wots.compress");
    h.update(public_seed);
    h.update_u32be(leaf);
    for (const Bytes& e : ends) h.update(ByteView(e));
    const auto digest = h.finish();
    return Bytes(digest.begin(), digest.begin() + n);
}

// --- standalone one-time scheme ---------------------------------------------

struct RawKeyPair {
    Bytes public_key;   // publicSeed || compressed chain ends
    Bytes private_key;  // secretSeed || publicSeed
};

inline Bytes message_digest(ByteView public_seed, ByteView message,
                            std::uint32_t n) {
    return labeled_hash("pqpki.wots.msg", {public_seed, message}, n);
}

inline RawKeyPair keygen(const SchemeParams& p, SeedRng& rng) {
    const Bytes secret_seed = rng.bytes(p.n);
    const Bytes public_seed = rng.bytes(p.n);
    const auto ends = public_chain_ends(secret_seed, public_seed, 0, p.n, p.w);
    RawKeyPair kp;
    kp.public_key = public_seed;
    append(kp.public_key, compress_chain_ends(public_seed, 0, ends, p.n));
    kp.private_key = secret_seed;
    append(kp.private_key, public_seed);
    return kp;
}

inline Bytes sign(const SchemeParams& p, ByteView private_key, ByteView message) {
    if (private_key.size() != 2 * static_cast<std::size_t>(p.n))
        throw ParameterError("wots private key has wrong length");
    const ByteView secret_seed = private_key.subspan(0, p.n);
    const ByteView public_seed = private_key.subspan(p.n, p.n);
    const Bytes digest = message_digest(public_seed, message, p.n);
    return sign_digest(secret_seed, public_seed, 0, digest, p.n, p.w);
}

inline bool verify(const SchemeParams& p, ByteView public_key, ByteView message,
                   ByteView payload) {
    if (public_key.size() != 2 * static_cast<std::size_t>(p.n))
        throw DecodeError("wots public key has wrong length");
    const WotsChainLengths cl = wots_chain_lengths(p.n, p.w);
    if (payload.size() != static_cast<std::size_t>(cl.len) * p.n)
        throw DecodeError("wots signature payload has wrong length");
    const ByteView public_seed = public_key.subspan(0, p.n);
    const ByteView root = public_key.subspan(p.n, p.n);
    const Bytes digest = message_digest(public_seed, message, p.n);
    const auto ends =
        chain_ends_from_signature(payload, public_seed, 0, digest, p.n, p.w);
    return equal_bytes(compress_chain_ends(public_seed, 0, ends, p.n), root);
}

}  // namespace pqpki::sig::wots

#endif
