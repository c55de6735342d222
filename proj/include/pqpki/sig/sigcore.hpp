#ifndef PQPKI_SIG_SIGCORE_HPP
#define PQPKI_SIG_SIGCORE_HPP

// Scheme-agnostic key and signature handling.  Everything above this layer
// (certificates, enrollment, revocation) talks to keygen/sign/verify and the
// serializers here and never to a concrete scheme.
//
// State rules for the stateful schemes:
//   - a one-time key refuses its second signature (OneTimeKeyReuse);
//   - a tree key hands out each leaf exactly once and refuses leaf 2^h
//     (StateExhausted);
//   - the state advances *before* the signature is released, so a crash
//     between the two loses a leaf instead of reusing it;
//   - concurrent sign() calls on one key are safe: leaf reservation is a
//     single atomic compare-and-swap.
//
// Hybrid keys hold two inner key pairs (legacy first, quantum-resistant
// second).  A hybrid signature carries one component per inner key and
// verifies under REQUIRE_BOTH by default; ACCEPT_ANY exists for staged
// migrations and treats a malformed component as a failed component rather
// than a decode error.

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pqpki/base64.hpp"
#include "pqpki/bytes.hpp"
#include "pqpki/errors.hpp"
#include "pqpki/rng.hpp"
#include "pqpki/sig/params.hpp"
#include "pqpki/sig/toydl.hpp"
#include "pqpki/sig/wots.hpp"
#include "pqpki/sig/xmss.hpp"
#include "pqpki/tlv.hpp"

namespace pqpki::sig {

struct KeyPair {
    SchemeDescriptor descriptor;
    Bytes public_key;
    Bytes private_key;
    // Stateful schemes: next unused one-time index (tree leaf, or 0/1 for a
    // standalone one-time key). Absent for stateless and hybrid keys.
    std::optional<std::uint64_t> signer_state;
    // HYBRID: the two inner key pairs, legacy first.
    std::vector<KeyPair> inner;
    // XMSS working data; immutable once built, shared by copies.
    std::shared_ptr<const xmss::NodeCache> cache;
};

struct SignatureValue {
    SchemeId scheme_id = SchemeId::kToyDl;
    Bytes payload;                          // empty for hybrid
    std::optional<std::uint64_t> leaf_index;  // tree schemes: which leaf signed
    std::vector<SignatureValue> components;   // hybrid: legacy first

    bool operator==(const SignatureValue&) const = default;
};

enum class VerifyMode : std::uint8_t {
    kRequireBoth = 0,  // every hybrid component must verify
    kAcceptAny = 1,    // one verifying component suffices
};

// Total one-time signatures a key can produce; absent for stateless schemes.
inline std::optional<std::uint64_t> signature_capacity(const SchemeDescriptor& d) {
    switch (d.scheme_id) {
        case SchemeId::kWotsPlus: return 1;
        case SchemeId::kXmssMt: return xmss::leaf_capacity(d.params.h);
        default: return std::nullopt;
    }
}

// Exact public key length under a descriptor.  Hybrid composites carry two
// length-prefixed fields, five bytes of framing each.
inline std::size_t public_key_size(const SchemeDescriptor& d) {
    switch (d.scheme_id) {
        case SchemeId::kToyDl:
            return toydl::kFieldBytes;
        case SchemeId::kWotsPlus:
        case SchemeId::kXmssMt:
            return 2 * d.params.n;
        case SchemeId::kHybrid:
            if (d.inner.size() != 2)
                throw ParameterError("hybrid descriptor needs two inner schemes");
            return 10 + public_key_size(d.inner[0]) + public_key_size(d.inner[1]);
    }
    throw ParameterError("unknown scheme id");
}

inline std::uint64_t signatures_remaining(const KeyPair& kp) {
    const auto cap = signature_capacity(kp.descriptor);
    if (!cap || !kp.signer_state) return 0;
    return *cap - std::min(*cap, *kp.signer_state);
}

// Raw key-material sizes (framing excluded). For hybrids these sum the
// inner parts.
inline std::size_t public_key_bytes(const KeyPair& kp) {
    if (kp.descriptor.scheme_id != SchemeId::kHybrid) return kp.public_key.size();
    std::size_t total = 0;
    for (const auto& in : kp.inner) total += public_key_bytes(in);
    return total;
}

inline std::size_t private_key_bytes(const KeyPair& kp) {
    if (kp.descriptor.scheme_id != SchemeId::kHybrid) return kp.private_key.size();
    std::size_t total = 0;
    for (const auto& in : kp.inner) total += private_key_bytes(in);
    return total;
}

inline std::size_t signature_payload_bytes(const SignatureValue& sv) {
    std::size_t total = sv.payload.size();
    for (const auto& c : sv.components) total += signature_payload_bytes(c);
    return total;
}

// --- descriptor / params serialization ---------------------------------------

inline Bytes encode_params(const SchemeParams& p) {
    tlv::Writer w;
    if (p.n != 0) w.u32(tlv::kParamN, p.n);
    if (p.w != 0) w.u32(tlv::kParamW, p.w);
    if (p.h != 0) w.u32(tlv::kParamH, p.h);
    if (p.prime_p != 0) w.u64(tlv::kParamPrimeP, p.prime_p);
    if (p.subgroup_order_q != 0) w.u64(tlv::kParamOrderQ, p.subgroup_order_q);
    if (p.generator_g != 0) w.u64(tlv::kParamGenG, p.generator_g);
    return w.move();
}

inline SchemeParams decode_params(ByteView data) {
    tlv::Reader r(data);
    SchemeParams p;
    if (r.next_is(tlv::kParamN)) p.n = r.u32(tlv::kParamN);
    if (r.next_is(tlv::kParamW)) p.w = r.u32(tlv::kParamW);
    if (r.next_is(tlv::kParamH)) p.h = r.u32(tlv::kParamH);
    if (r.next_is(tlv::kParamPrimeP)) p.prime_p = r.u64(tlv::kParamPrimeP);
    if (r.next_is(tlv::kParamOrderQ)) p.subgroup_order_q = r.u64(tlv::kParamOrderQ);
    if (r.next_is(tlv::kParamGenG)) p.generator_g = r.u64(tlv::kParamGenG);
    r.expect_done();
    return p;
}

inline Bytes encode_descriptor(const SchemeDescriptor& d) {
    tlv::Writer w;
    w.u8(tlv::kSchemeId, static_cast<std::uint8_t>(d.scheme_id));
    if (!d.display_name.empty()) w.text(tlv::kDisplayName, d.display_name);
    if (!(d.params == SchemeParams{})) w.nested(tlv::kParams, encode_params(d.params));
    for (const auto& in : d.inner)
        w.nested(tlv::kInnerDescriptor, encode_descriptor(in));
    return w.move();
}

inline SchemeDescriptor decode_descriptor(ByteView data) {
    tlv::Reader r(data);
    SchemeDescriptor d;
    const std::uint8_t id = r.u8(tlv::kSchemeId);
    if (id < 1 || id > 4) throw DecodeError("unknown scheme id");
    d.scheme_id = static_cast<SchemeId>(id);
    if (r.next_is(tlv::kDisplayName)) d.display_name = r.text(tlv::kDisplayName);
    if (r.next_is(tlv::kParams)) d.params = decode_params(r.value(tlv::kParams));
    while (r.next_is(tlv::kInnerDescriptor))
        d.inner.push_back(decode_descriptor(r.value(tlv::kInnerDescriptor)));
    r.expect_done();
    return d;
}

// Decoded descriptors from untrusted bytes get a semantic check too; the
// parameter problems surface as decode errors at this boundary.
inline SchemeDescriptor decode_descriptor_checked(ByteView data) {
    SchemeDescriptor d = decode_descriptor(data);
    try {
        validate(d);
    } catch (const ParameterError& e) {
        throw DecodeError(std::string("descriptor rejected: ") + e.what());
    }
    return d;
}

// --- key generation -----------------------------------------------------------

inline KeyPair keygen(const SchemeDescriptor& d, SeedRng& rng) {
    validate(d);
    KeyPair kp;
    kp.descriptor = d;
    switch (d.scheme_id) {
        case SchemeId::kToyDl: {
            auto raw = toydl::keygen(d.params, rng);
            kp.public_key = std::move(raw.public_key);
            kp.private_key = std::move(raw.private_key);
            break;
        }
        case SchemeId::kWotsPlus: {
            auto raw = wots::keygen(d.params, rng);
            kp.public_key = std::move(raw.public_key);
            kp.private_key = std::move(raw.private_key);
            kp.signer_state = 0;
            break;
        }
        case SchemeId::kXmssMt: {
            auto raw = xmss::keygen(d.params, rng);
            kp.public_key = std::move(raw.public_key);
            kp.private_key = std::move(raw.private_key);
            kp.cache = std::move(raw.cache);
            kp.signer_state = 0;
            break;
        }
        case SchemeId::kHybrid: {
            kp.inner.push_back(keygen(d.inner[0], rng));
            kp.inner.push_back(keygen(d.inner[1], rng));
            tlv::Writer w;
            w.bytes(tlv::kKpPublic, kp.inner[0].public_key);
            w.bytes(tlv::kKpPublic, kp.inner[1].public_key);
            kp.public_key = w.move();
            break;
        }
    }
    return kp;
}

// Splits a composite hybrid public key into its two inner keys.
inline std::pair<Bytes, Bytes> split_hybrid_public(ByteView public_key) {
    tlv::Reader r(public_key);
    Bytes first = r.bytes(tlv::kKpPublic);
    Bytes second = r.bytes(tlv::kKpPublic);
    r.expect_done();
    return {std::move(first), std::move(second)};
}

// --- signing --------------------------------------------------------------------

namespace detail {

// Reserves the next one-time index, advancing the state before any
// signature bytes exist. Safe against concurrent callers.
inline std::uint64_t reserve_index(KeyPair& kp, std::uint64_t capacity) {
    if (!kp.signer_state) throw ParameterError("key has no signer state");
    std::atomic_ref<std::uint64_t> state(*kp.signer_state);
    std::uint64_t current = state.load(std::memory_order_relaxed);
    for (;;) {
        if (current >= capacity) {
            if (kp.descriptor.scheme_id == SchemeId::kWotsPlus)
                throw OneTimeKeyReuse("one-time key has already signed");
            throw StateExhausted("tree key has no unused leaves left");
        }
        if (state.compare_exchange_weak(current, current + 1,
                                        std::memory_order_acq_rel))
            return current;
    }
}

inline void ensure_cache(KeyPair& kp) {
    if (kp.descriptor.scheme_id == SchemeId::kXmssMt && !kp.cache) {
        if (kp.private_key.empty())
            throw ParameterError("cannot sign: private key material missing");
        kp.cache = xmss::rebuild_cache(kp.descriptor.params, kp.private_key);
    }
}

}  // namespace detail

inline SignatureValue sign(KeyPair& kp, ByteView message) {
    SignatureValue sv;
    sv.scheme_id = kp.descriptor.scheme_id;
    switch (kp.descriptor.scheme_id) {
        case SchemeId::kToyDl:
            sv.payload = toydl::sign(kp.descriptor.params, kp.private_key, message);
            break;
        case SchemeId::kWotsPlus:
            detail::reserve_index(kp, 1);
            sv.payload = wots::sign(kp.descriptor.params, kp.private_key, message);
            break;
        case SchemeId::kXmssMt: {
            detail::ensure_cache(kp);
            const std::uint64_t leaf = detail::reserve_index(
                kp, xmss::leaf_capacity(kp.descriptor.params.h));
            sv.payload = xmss::sign_with_leaf(kp.descriptor.params, kp.private_key,
                                              *kp.cache,
                                              static_cast<std::uint32_t>(leaf),
                                              message);
            sv.leaf_index = leaf;
            break;
        }
        case SchemeId::kHybrid: {
            if (kp.inner.size() != 2)
                throw ParameterError("hybrid key pair must hold two inner keys");
            sv.components.push_back(sign(kp.inner[0], message));
            sv.components.push_back(sign(kp.inner[1], message));
            break;
        }
    }
    return sv;
}

// --- verification ----------------------------------------------------------------

inline bool verify(ByteView public_key, const SchemeDescriptor& d,
                   ByteView message, const SignatureValue& sv,
                   VerifyMode mode = VerifyMode::kRequireBoth) {
    if (sv.scheme_id != d.scheme_id)
        throw ParameterError("signature scheme does not match descriptor");
    switch (d.scheme_id) {
        case SchemeId::kToyDl:
            if (!sv.components.empty())
                throw DecodeError("unexpected components on a plain signature");
            return toydl::verify(d.params, public_key, message, sv.payload);
        case SchemeId::kWotsPlus:
            if (!sv.components.empty())
                throw DecodeError("unexpected components on a plain signature");
            return wots::verify(d.params, public_key, message, sv.payload);
        case SchemeId::kXmssMt:
            if (!sv.components.empty())
                throw DecodeError("unexpected components on a plain signature");
            return xmss::verify(d.params, public_key, message, sv.payload);
        case SchemeId::kHybrid: {
            if (sv.components.size() != 2)
                throw DecodeError("hybrid signature must carry two components");
            if (!sv.payload.empty())
                throw DecodeError("hybrid signature carries a stray payload");
            if (sv.components[0].scheme_id != d.inner[0].scheme_id ||
                sv.components[1].scheme_id != d.inner[1].scheme_id)
                throw DecodeError("hybrid component schemes do not match");
            const auto [legacy_pub, pq_pub] = split_hybrid_public(public_key);
            if (mode == VerifyMode::kRequireBoth) {
                return verify(legacy_pub, d.inner[0], message, sv.components[0], mode) &&
                       verify(pq_pub, d.inner[1], message, sv.components[1], mode);
            }
            bool any = false;
            try {
                any = verify(legacy_pub, d.inner[0], message, sv.components[0], mode);
            } catch (const DecodeError&) {
            }
            if (any) return true;
            try {
                any = verify(pq_pub, d.inner[1], message, sv.components[1], mode);
            } catch (const DecodeError&) {
            }
            return any;
        }
    }
    throw ParameterError("unknown scheme id");
}

// --- key / signature serialization -------------------------------------------------

inline Bytes encode_keypair(const KeyPair& kp) {
    tlv::Writer w;
    w.nested(tlv::kKpDescriptor, encode_descriptor(kp.descriptor));
    if (!kp.public_key.empty()) w.bytes(tlv::kKpPublic, kp.public_key);
    if (!kp.private_key.empty()) w.bytes(tlv::kKpPrivate, kp.private_key);
    if (kp.signer_state) w.u64(tlv::kKpSignerState, *kp.signer_state);
    for (const auto& in : kp.inner) w.nested(tlv::kKpInner, encode_keypair(in));
    return tlv::wrap(tlv::kKeyPair, w.take());
}

inline KeyPair decode_keypair(ByteView data) {
    const ByteView body = tlv::unwrap(tlv::kKeyPair, data);
    tlv::Reader r(body);
    KeyPair kp;
    kp.descriptor = decode_descriptor_checked(r.value(tlv::kKpDescriptor));
    if (r.next_is(tlv::kKpPublic)) kp.public_key = r.bytes(tlv::kKpPublic);
    if (r.next_is(tlv::kKpPrivate)) kp.private_key = r.bytes(tlv::kKpPrivate);
    if (r.next_is(tlv::kKpSignerState))
        kp.signer_state = r.u64(tlv::kKpSignerState);
    while (r.next_is(tlv::kKpInner))
        kp.inner.push_back(decode_keypair(r.value(tlv::kKpInner)));
    r.expect_done();
    if (kp.descriptor.scheme_id == SchemeId::kXmssMt && !kp.private_key.empty()) {
        // Loading a tree key rebuilds its node cache; a public key that does
        // not match the seeds means the record was stitched together.
        kp.cache = xmss::rebuild_cache(kp.descriptor.params, kp.private_key);
        Bytes expect(kp.public_key.begin(),
                     kp.public_key.begin() +
                         std::min<std::size_t>(kp.public_key.size(),
                                               kp.descriptor.params.n));
        append(expect, kp.cache->root());
        if (!equal_bytes(expect, kp.public_key))
            throw DecodeError("tree public key does not match private seeds");
    }
    return kp;
}

struct PublicKeyBundle {
    SchemeDescriptor descriptor;
    Bytes public_key;
};

inline Bytes encode_public_bundle(const SchemeDescriptor& d, ByteView public_key) {
    tlv::Writer w;
    w.nested(tlv::kKpDescriptor, encode_descriptor(d));
    w.raw(tlv::kKpPublic, public_key);
    return tlv::wrap(tlv::kPublicKeyBundle, w.take());
}

inline PublicKeyBundle decode_public_bundle(ByteView data) {
    const ByteView body = tlv::unwrap(tlv::kPublicKeyBundle, data);
    tlv::Reader r(body);
    PublicKeyBundle b;
    b.descriptor = decode_descriptor_checked(r.value(tlv::kKpDescriptor));
    b.public_key = r.bytes(tlv::kKpPublic);
    r.expect_done();
    return b;
}

inline Bytes encode_signature(const SignatureValue& sv) {
    tlv::Writer w;
    w.u8(tlv::kSigSchemeId, static_cast<std::uint8_t>(sv.scheme_id));
    if (!sv.payload.empty()) w.bytes(tlv::kSigPayload, sv.payload);
    if (sv.leaf_index) w.u64(tlv::kSigLeafIndex, *sv.leaf_index);
    for (const auto& c : sv.components)
        w.nested(tlv::kSigComponent, encode_signature(c));
    return tlv::wrap(tlv::kSignature, w.take());
}

inline SignatureValue decode_signature(ByteView data) {
    const ByteView body = tlv::unwrap(tlv::kSignature, data);
    tlv::Reader r(body);
    SignatureValue sv;
    const std::uint8_t id = r.u8(tlv::kSigSchemeId);
    if (id < 1 || id > 4) throw DecodeError("unknown scheme id");
    sv.scheme_id = static_cast<SchemeId>(id);
    if (r.next_is(tlv::kSigPayload)) sv.payload = r.bytes(tlv::kSigPayload);
    if (r.next_is(tlv::kSigLeafIndex)) sv.leaf_index = r.u64(tlv::kSigLeafIndex);
    while (r.next_is(tlv::kSigComponent))
        sv.components.push_back(decode_signature(r.value(tlv::kSigComponent)));
    r.expect_done();
    return sv;
}

// --- armored text forms --------------------------------------------------------

inline std::string armor_keypair(const KeyPair& kp) {
    return armor("KEY", encode_keypair(kp));
}

inline KeyPair dearmor_keypair(std::string_view text) {
    return decode_keypair(dearmor("KEY", text));
}

inline std::string armor_public_bundle(const SchemeDescriptor& d, ByteView pub) {
    return armor("PUBLIC KEY", encode_public_bundle(d, pub));
}

inline PublicKeyBundle dearmor_public_bundle(std::string_view text) {
    return decode_public_bundle(dearmor("PUBLIC KEY", text));
}

inline std::string armor_signature(const SignatureValue& sv) {
    return armor("SIGNATURE", encode_signature(sv));
}

inline SignatureValue dearmor_signature(std::string_view text) {
    return decode_signature(dearmor("SIGNATURE", text));
}

}  // namespace pqpki::sig

#endif
