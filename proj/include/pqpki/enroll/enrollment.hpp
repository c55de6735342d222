#ifndef PQPKI_ENROLL_ENROLLMENT_HPP
#define PQPKI_ENROLL_ENROLLMENT_HPP

// Executable model of the device-enrollment topology: a maintainer root, a
// production-line frontend acting as second-level CA, a manufacturer, an
// operator, and devices with a simulated TEE.  Parties exchange messages
// over in-process channels with an optional adversary in the middle; every
// run is deterministic under its seeds and yields a replayable transcript.
//
// The transport models an authenticated-encryption link, not real TLS:
// payloads are XOR-sealed under a hash keystream and carry a keyed
// integrity tag.  The session key comes from an ephemeral toy discrete-log
// exchange, which is exactly what makes the store-now-decrypt-later attack
// demonstrable against the breakable parameter profile.  The handshake
// itself is sealed under an empty key (cleartext by design; key exchange
// is public data).

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pqpki/base64.hpp"
#include "pqpki/bytes.hpp"
#include "pqpki/cert/certmodel.hpp"
#include "pqpki/errors.hpp"
#include "pqpki/party.hpp"
#include "pqpki/rng.hpp"
#include "pqpki/sha256.hpp"
#include "pqpki/sig/sigcore.hpp"
#include "pqpki/tlv.hpp"

namespace pqpki::enroll {

inline constexpr std::uint64_t kGenesisTime = 1700000000;
inline constexpr std::uint64_t kYearSeconds = 365ull * 86400;
inline constexpr std::uint64_t kDeviceTtlSeconds = 30ull * 86400;
inline constexpr std::size_t kChallengeBytes = 32;

// --- channel message ---------------------------------------------------------

enum class ChannelKind : std::uint8_t {
    kControl = 1,
    kCertMaterial = 2,
};

inline const char* channel_kind_name(ChannelKind k) {
    switch (k) {
        case ChannelKind::kControl: return "CONTROL";
        case ChannelKind::kCertMaterial: return "CERT_MATERIAL";
    }
    throw ParameterError("unknown channel kind");
}

enum class Outcome : std::uint8_t {
    kSuccess = 1,
    kDetectedTampering = 2,
    kPinningMismatch = 3,
    kAttestationFailed = 4,
    kTokenRequired = 5,
};

inline const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::kSuccess: return "SUCCESS";
        case Outcome::kDetectedTampering: return "DETECTED_TAMPERING";
        case Outcome::kPinningMismatch: return "PINNING_MISMATCH";
        case Outcome::kAttestationFailed: return "ATTESTATION_FAILED";
        case Outcome::kTokenRequired: return "TOKEN_REQUIRED";
    }
    throw ParameterError("unknown outcome");
}

inline Outcome outcome_from_name(const std::string& name) {
    for (auto o : {Outcome::kSuccess, Outcome::kDetectedTampering,
                   Outcome::kPinningMismatch, Outcome::kAttestationFailed,
                   Outcome::kTokenRequired})
        if (name == outcome_name(o)) return o;
    throw DecodeError("unknown outcome name: " + name);
}

enum class InjectionPath : std::uint8_t {
    kFrontend = 1,   // manufacturer-mediated, at production time
    kDeviceApi = 2,  // operator-mediated, in the field
};

inline const char* injection_path_name(InjectionPath p) {
    switch (p) {
        case InjectionPath::kFrontend: return "FRONTEND";
        case InjectionPath::kDeviceApi: return "DEVICE_API";
    }
    throw ParameterError("unknown injection path");
}

inline InjectionPath injection_path_from_name(const std::string& name) {
    if (name == "FRONTEND") return InjectionPath::kFrontend;
    if (name == "DEVICE_API") return InjectionPath::kDeviceApi;
    throw DecodeError("unknown injection path: " + name);
}

// One sealed record on the wire.  `payload` is one cleartext type byte (the
// channel kind, so separation is checkable on the transcript) followed by
// the ciphertext body; `integrity_tag` is keyed over header and plaintext.
struct ChannelMessage {
    ChannelKind kind = ChannelKind::kControl;
    cert::Role sender = cert::Role::kDevice;
    cert::Role receiver = cert::Role::kDevice;
    std::uint64_t sequence = 0;
    Bytes payload;
    Bytes integrity_tag;

    bool operator==(const ChannelMessage&) const = default;
};

inline Bytes encode_channel_message(const ChannelMessage& m) {
    tlv::Writer w;
    w.u8(tlv::kMsgKind, static_cast<std::uint8_t>(m.kind));
    w.u8(tlv::kMsgSender, static_cast<std::uint8_t>(m.sender));
    w.u8(tlv::kMsgReceiver, static_cast<std::uint8_t>(m.receiver));
    w.u64(tlv::kMsgSequence, m.sequence);
    w.bytes(tlv::kMsgPayload, m.payload);
    w.bytes(tlv::kMsgIntegrityTag, m.integrity_tag);
    return tlv::wrap(tlv::kChannelMessage, w.move());
}

inline ChannelMessage decode_channel_message(ByteView data) {
    const ByteView body = tlv::unwrap(tlv::kChannelMessage, data);
    tlv::Reader r(body);
    ChannelMessage m;
    const std::uint8_t kind = r.u8(tlv::kMsgKind);
    if (kind < 1 || kind > 2) throw DecodeError("bad channel kind");
    m.kind = static_cast<ChannelKind>(kind);
    const std::uint8_t sender = r.u8(tlv::kMsgSender);
    const std::uint8_t receiver = r.u8(tlv::kMsgReceiver);
    if (sender < 1 || sender > 5 || receiver < 1 || receiver > 5)
        throw DecodeError("bad message role");
    m.sender = static_cast<cert::Role>(sender);
    m.receiver = static_cast<cert::Role>(receiver);
    m.sequence = r.u64(tlv::kMsgSequence);
    m.payload = r.bytes(tlv::kMsgPayload);
    m.integrity_tag = r.bytes(tlv::kMsgIntegrityTag);
    if (m.integrity_tag.size() != 32) throw DecodeError("bad integrity tag size");
    r.expect_done();
    return m;
}

// --- adversary and transcript --------------------------------------------------

struct AdversaryConfig {
    bool eavesdrop = false;
    double modify_probability = 0.0;
    bool replay = false;
    bool record_for_later = false;
    std::vector<Bytes> recorded_log;  // wire bytes as originally sent
    std::uint64_t random_seed = 0;
};

// Digest over the behavioral fields only; the recorded log is output, not
// configuration.
inline Bytes config_digest(const AdversaryConfig& a) {
    char prob[64];
    std::snprintf(prob, sizeof(prob), "%.17g", a.modify_probability);
    std::string text;
    text += "eavesdrop=" + std::string(a.eavesdrop ? "true" : "false") + "\n";
    text += "modify_probability=" + std::string(prob) + "\n";
    text += "replay=" + std::string(a.replay ? "true" : "false") + "\n";
    text += "record_for_later=" + std::string(a.record_for_later ? "true" : "false") + "\n";
    text += "random_seed=" + std::to_string(a.random_seed) + "\n";
    return sha256(text);
}

struct EnrollmentTranscript {
    std::vector<ChannelMessage> ordered_messages;
    Outcome outcome = Outcome::kDetectedTampering;
    std::optional<cert::Certificate> issued_certificate;
};

// Targeted man-in-the-middle actions.  These model an attacker who owns the
// transport session (and so can re-seal records); random byte corruption is
// configured through AdversaryConfig instead.
struct ActiveAttack {
    enum class Kind : std::uint8_t {
        kNone = 0,
        kSubstituteFrontend = 1,  // replace the presented frontend certificate
        kReplayCsr = 2,           // replace the CSR with a previously captured one
    };
    Kind kind = Kind::kNone;
    std::optional<cert::Certificate> rogue_certificate;
    std::optional<cert::Csr> stale_csr;
};

struct PartySet {
    Party maintainer_root;
    Party production_line;
    Party manufacturer;
    Party operator_party;
    // Hardware token that must co-sign second-level signing requests.
    sig::KeyPair maintainer_token;
    // Simulation wall clock used for issuance and validity decisions.
    std::uint64_t clock = 0;
};

// --- hardware token ------------------------------------------------------------

struct TokenApproval {
    Bytes request_digest;
    sig::SignatureValue signature;
    Bytes token_public;  // descriptor+key bundle of the approving token

    bool operator==(const TokenApproval&) const = default;
};

inline Bytes token_approval_message(ByteView request_digest) {
    return labeled_hash("pqpki.token.approve", {request_digest});
}

inline Bytes encode_token_approval(const TokenApproval& t) {
    tlv::Writer w;
    w.bytes(tlv::kApprovalRequestDigest, t.request_digest);
    w.nested(tlv::kApprovalSignature, sig::encode_signature(t.signature));
    w.bytes(tlv::kApprovalTokenPublic, t.token_public);
    return tlv::wrap(tlv::kTokenApproval, w.move());
}

inline TokenApproval decode_token_approval(ByteView data) {
    const ByteView body = tlv::unwrap(tlv::kTokenApproval, data);
    tlv::Reader r(body);
    TokenApproval t;
    t.request_digest = r.bytes(tlv::kApprovalRequestDigest);
    if (t.request_digest.size() != 32) throw DecodeError("bad request digest size");
    t.signature = sig::decode_signature(r.value(tlv::kApprovalSignature));
    t.token_public = r.bytes(tlv::kApprovalTokenPublic);
    r.expect_done();
    return t;
}

// Absent result means the operator did not present the token; the caller
// reports TOKEN_REQUIRED.  Never an error.
inline std::optional<TokenApproval> hardware_token_confirm(
    const Bytes& request_digest, bool token_present, sig::KeyPair& token_keys) {
    if (!token_present) return std::nullopt;
    TokenApproval a;
    a.request_digest = request_digest;
    a.signature = sig::sign(token_keys, token_approval_message(request_digest));
    a.token_public =
        sig::encode_public_bundle(token_keys.descriptor, token_keys.public_key);
    return a;
}

inline bool verify_token_approval(const TokenApproval& a,
                                  const Bytes& request_digest) {
    if (a.request_digest != request_digest) return false;
    try {
        const auto bundle = sig::decode_public_bundle(a.token_public);
        return sig::verify(bundle.public_key, bundle.descriptor,
                           token_approval_message(request_digest), a.signature);
    } catch (const DecodeError&) {
        return false;
    } catch (const ParameterError&) {
        return false;
    }
}

// --- key wrapping ----------------------------------------------------------------

// Simulation-grade hybrid-of-nothing confidentiality: an ephemeral toy
// discrete-log agreement keys a hash stream.  Stands in for real key
// wrapping so that symmetric material can move to a TEE in the model; the
// whole construction falls to the same brute-force discrete log as the
// channel, which is the point of the demo.
struct WrappedKey {
    std::uint64_t ephemeral_public = 0;
    Bytes nonce;  // 16 bytes, fresh per invocation
    Bytes ciphertext;
    Bytes tag;  // 32 bytes over the shared secret, nonce, and ciphertext

    bool operator==(const WrappedKey&) const = default;
};

inline Bytes encode_wrapped_key(const WrappedKey& wk) {
    tlv::Writer w;
    w.bytes(tlv::kWrapNonce, wk.nonce);
    w.u64(tlv::kWrapEphemeral, wk.ephemeral_public);
    w.bytes(tlv::kWrapCiphertext, wk.ciphertext);
    w.bytes(tlv::kWrapTag, wk.tag);
    return tlv::wrap(tlv::kWrappedKey, w.move());
}

inline WrappedKey decode_wrapped_key(ByteView data) {
    const ByteView body = tlv::unwrap(tlv::kWrappedKey, data);
    tlv::Reader r(body);
    WrappedKey wk;
    wk.nonce = r.bytes(tlv::kWrapNonce);
    if (wk.nonce.size() != 16) throw DecodeError("bad wrap nonce size");
    wk.ephemeral_public = r.u64(tlv::kWrapEphemeral);
    wk.ciphertext = r.bytes(tlv::kWrapCiphertext);
    wk.tag = r.bytes(tlv::kWrapTag);
    if (wk.tag.size() != 32) throw DecodeError("bad wrap tag size");
    r.expect_done();
    return wk;
}

namespace detail {

inline const sig::SchemeParams& dl_group_of(const sig::SchemeDescriptor& d) {
    if (d.scheme_id == sig::SchemeId::kToyDl) return d.params;
    if (d.scheme_id == sig::SchemeId::kHybrid && !d.inner.empty() &&
        d.inner[0].scheme_id == sig::SchemeId::kToyDl)
        return d.inner[0].params;
    throw ParameterError("no discrete-log component in descriptor");
}

inline Bytes wrap_stream(std::uint64_t shared, ByteView nonce, std::size_t n) {
    Bytes out;
    const Bytes sb = u64be_bytes(shared);
    for (std::uint64_t i = 0; out.size() < n; ++i)
        append(out, labeled_hash("pqpki.wrap.stream",
                                 {ByteView(sb), nonce, ByteView(u64be_bytes(i))}));
    out.resize(n);
    return out;
}

inline Bytes wrap_tag(std::uint64_t shared, ByteView nonce, ByteView ciphertext) {
    const Bytes sb = u64be_bytes(shared);
    return labeled_hash("pqpki.wrap.tag", {ByteView(sb), nonce, ciphertext});
}

}  // namespace detail

inline WrappedKey wrap_key(const Bytes& symmetric_key,
                           const sig::SchemeDescriptor& recipient_descriptor,
                           ByteView recipient_public, SeedRng& rng) {
    const sig::SchemeParams& g = detail::dl_group_of(recipient_descriptor);
    if (recipient_public.size() != sig::toydl::kFieldBytes)
        throw ParameterError("recipient public key must be 8 bytes");
    const std::uint64_t y = read_u64be(recipient_public);
    const std::uint64_t e = 1 + rng.below(g.subgroup_order_q - 1);
    const std::uint64_t shared =
        sig::detail::powmod_u64(y, e, g.prime_p);
    WrappedKey wk;
    wk.ephemeral_public = sig::detail::powmod_u64(g.generator_g, e, g.prime_p);
    wk.nonce = rng.bytes(16);
    const Bytes ks = detail::wrap_stream(shared, wk.nonce, symmetric_key.size());
    wk.ciphertext = symmetric_key;
    for (std::size_t i = 0; i < wk.ciphertext.size(); ++i) wk.ciphertext[i] ^= ks[i];
    wk.tag = detail::wrap_tag(shared, wk.nonce, wk.ciphertext);
    return wk;
}

inline Bytes unwrap_key(const WrappedKey& wk, const sig::KeyPair& recipient) {
    const sig::SchemeParams& g = detail::dl_group_of(recipient.descriptor);
    const sig::KeyPair& leaf =
        recipient.descriptor.scheme_id == sig::SchemeId::kHybrid ? recipient.inner[0]
                                                                 : recipient;
    if (leaf.private_key.size() != sig::toydl::kFieldBytes)
        throw ParameterError("recipient private key must be 8 bytes");
    const std::uint64_t x = read_u64be(leaf.private_key);
    const std::uint64_t shared =
        sig::detail::powmod_u64(wk.ephemeral_public, x, g.prime_p);
    if (detail::wrap_tag(shared, wk.nonce, wk.ciphertext) != wk.tag)
        throw UnwrapFailed("wrapped key does not open under this key");
    Bytes out = wk.ciphertext;
    const Bytes ks = detail::wrap_stream(shared, wk.nonce, out.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= ks[i];
    return out;
}

// --- sealed channel machinery ---------------------------------------------------

namespace detail {

inline Bytes message_header(ChannelKind kind, cert::Role sender,
                            cert::Role receiver, std::uint64_t sequence) {
    Bytes h;
    h.push_back(static_cast<std::uint8_t>(kind));
    h.push_back(static_cast<std::uint8_t>(sender));
    h.push_back(static_cast<std::uint8_t>(receiver));
    append_u64be(h, sequence);
    return h;
}

inline Bytes channel_stream(ByteView session_key, ByteView header, std::size_t n) {
    Bytes out;
    for (std::uint64_t i = 0; out.size() < n; ++i)
        append(out, labeled_hash("pqpki.channel.stream",
                                 {session_key, header, ByteView(u64be_bytes(i))}));
    out.resize(n);
    return out;
}

inline Bytes channel_tag(ByteView session_key, ByteView header, ByteView plain) {
    return labeled_hash("pqpki.channel.tag", {session_key, header, plain});
}

inline ChannelMessage seal_message(ChannelKind kind, cert::Role sender,
                                   cert::Role receiver, std::uint64_t sequence,
                                   ByteView session_key, ByteView plain_body) {
    ChannelMessage m;
    m.kind = kind;
    m.sender = sender;
    m.receiver = receiver;
    m.sequence = sequence;
    const Bytes header = message_header(kind, sender, receiver, sequence);
    m.payload.push_back(static_cast<std::uint8_t>(kind));
    Bytes ct(plain_body.begin(), plain_body.end());
    const Bytes ks = channel_stream(session_key, header, ct.size());
    for (std::size_t i = 0; i < ct.size(); ++i) ct[i] ^= ks[i];
    append(m.payload, ct);
    m.integrity_tag = channel_tag(session_key, header, plain_body);
    return m;
}

// Decrypts without judging: used by the attack replayer, which works on
// recorded wire bytes and supplies whatever key it has derived.
inline Bytes unseal_body(const ChannelMessage& m, ByteView session_key) {
    const Bytes header = message_header(m.kind, m.sender, m.receiver, m.sequence);
    Bytes body(m.payload.begin() + 1, m.payload.end());
    const Bytes ks = channel_stream(session_key, header, body.size());
    for (std::size_t i = 0; i < body.size(); ++i) body[i] ^= ks[i];
    return body;
}

// One run's wire: sequences per directed (sender, receiver, kind) triple,
// the transcript under construction, and the adversary tap.
struct Wire {
    AdversaryConfig* adversary = nullptr;
    SeedRng* adversary_rng = nullptr;
    std::vector<ChannelMessage>* transcript = nullptr;
    std::map<std::tuple<std::uint8_t, std::uint8_t, std::uint8_t>, std::uint64_t>
        send_sequence;
    std::map<std::tuple<std::uint8_t, std::uint8_t, std::uint8_t>, std::uint64_t>
        seen_sequence;
    bool replay_spent = false;

    static std::tuple<std::uint8_t, std::uint8_t, std::uint8_t> triple(
        const ChannelMessage& m) {
        return {static_cast<std::uint8_t>(m.sender),
                static_cast<std::uint8_t>(m.receiver),
                static_cast<std::uint8_t>(m.kind)};
    }

    // Seals and transmits; returns every copy that arrives at the receiver
    // (the adversary may corrupt the copy in flight or re-deliver it).
    std::vector<ChannelMessage> transmit(ChannelKind kind, cert::Role sender,
                                         cert::Role receiver, ByteView session_key,
                                         ByteView plain_body) {
        const std::uint64_t seq = ++send_sequence[{
            static_cast<std::uint8_t>(sender), static_cast<std::uint8_t>(receiver),
            static_cast<std::uint8_t>(kind)}];
        ChannelMessage m =
            seal_message(kind, sender, receiver, seq, session_key, plain_body);
        if (adversary &&
            (adversary->eavesdrop || adversary->record_for_later))
            adversary->recorded_log.push_back(encode_channel_message(m));
        std::vector<ChannelMessage> arrivals;
        if (adversary && adversary_rng &&
            adversary_rng->chance(adversary->modify_probability) &&
            !m.payload.empty()) {
            const std::size_t at = adversary_rng->below(m.payload.size());
            m.payload[at] ^=
                static_cast<std::uint8_t>(1 + adversary_rng->below(255));
        }
        arrivals.push_back(m);
        if (adversary && adversary->replay && !replay_spent &&
            kind == ChannelKind::kCertMaterial) {
            arrivals.push_back(m);
            replay_spent = true;
        }
        for (const auto& copy : arrivals) transcript->push_back(copy);
        return arrivals;
    }

    // Receiver side: type byte, keyed tag, strictly increasing sequence.
    std::optional<Bytes> open(const ChannelMessage& m, ByteView session_key) {
        if (m.payload.empty() ||
            m.payload[0] != static_cast<std::uint8_t>(m.kind))
            return std::nullopt;
        const Bytes body = unseal_body(m, session_key);
        const Bytes header =
            message_header(m.kind, m.sender, m.receiver, m.sequence);
        if (channel_tag(session_key, header, body) != m.integrity_tag)
            return std::nullopt;
        std::uint64_t& last = seen_sequence[triple(m)];
        if (m.sequence <= last) return std::nullopt;
        last = m.sequence;
        return body;
    }

    // Transmit plus receive of every arriving copy.  Absent result means
    // the receiver saw at least one bad copy and flags tampering.
    std::optional<Bytes> step(ChannelKind kind, cert::Role sender,
                              cert::Role receiver, ByteView session_key,
                              ByteView plain_body) {
        std::optional<Bytes> good;
        bool bad = false;
        for (const auto& copy : transmit(kind, sender, receiver, session_key,
                                         plain_body)) {
            auto body = open(copy, session_key);
            if (!body)
                bad = true;
            else if (!good)
                good = std::move(body);
        }
        if (bad) return std::nullopt;
        return good;
    }
};

inline Bytes handshake_init_body(const sig::SchemeParams& g, std::uint64_t pub) {
    tlv::Writer w;
    w.u64(tlv::kHsPrime, g.prime_p);
    w.u64(tlv::kHsGenerator, g.generator_g);
    w.u64(tlv::kHsOrder, g.subgroup_order_q);
    w.u64(tlv::kHsPublic, pub);
    return w.move();
}

inline Bytes handshake_reply_body(std::uint64_t pub) {
    tlv::Writer w;
    w.u64(tlv::kHsPublic, pub);
    return w.move();
}

inline Bytes session_key_from(std::uint64_t shared, std::uint64_t pub_init,
                              std::uint64_t pub_reply) {
    return labeled_hash("pqpki.channel.key",
                        {ByteView(u64be_bytes(shared)),
                         ByteView(u64be_bytes(pub_init)),
                         ByteView(u64be_bytes(pub_reply))});
}

// Runs the two-message exchange on the wire and returns the session key,
// or nothing when either message was mangled in flight.
inline std::optional<Bytes> run_handshake(Wire& wire, const sig::SchemeParams& g,
                                          cert::Role initiator,
                                          cert::Role responder, SeedRng& rng) {
    const std::uint64_t x = 1 + rng.below(g.subgroup_order_q - 1);
    const std::uint64_t gx = sig::detail::powmod_u64(g.generator_g, x, g.prime_p);
    auto m1 = wire.step(ChannelKind::kControl, initiator, responder, {},
                        handshake_init_body(g, gx));
    if (!m1) return std::nullopt;
    // Responder answers based on what actually arrived.
    std::uint64_t seen_gx = 0;
    {
        tlv::Reader r(*m1);
        r.u64(tlv::kHsPrime);
        r.u64(tlv::kHsGenerator);
        r.u64(tlv::kHsOrder);
        seen_gx = r.u64(tlv::kHsPublic);
        r.expect_done();
    }
    const std::uint64_t y = 1 + rng.below(g.subgroup_order_q - 1);
    const std::uint64_t gy = sig::detail::powmod_u64(g.generator_g, y, g.prime_p);
    auto m2 = wire.step(ChannelKind::kControl, responder, initiator, {},
                        handshake_reply_body(gy));
    if (!m2) return std::nullopt;
    const std::uint64_t shared = sig::detail::powmod_u64(seen_gx, y, g.prime_p);
    return session_key_from(shared, seen_gx, gy);
}

}  // namespace detail

// --- hierarchy -------------------------------------------------------------------

namespace detail {

inline cert::SubjectInfo named_subject(const std::string& name, cert::Role role) {
    cert::SubjectInfo s;
    s.common_name = name;
    s.role = role;
    return s;
}

inline cert::Csr csr_for(Party& party, cert::KeyUsage usage) {
    cert::Csr csr;
    csr.subject = party.identity;
    csr.public_keys = cert::key_entries_for(party.keys, usage);
    const Bytes body = cert::csr_canonical_body(csr);
    if (party.keys.descriptor.scheme_id == sig::SchemeId::kHybrid) {
        for (auto& inner : party.keys.inner)
            csr.proofs.push_back(sig::sign(inner, body));
    } else {
        csr.proofs.push_back(sig::sign(party.keys, body));
    }
    return csr;
}

}  // namespace detail

// Builds the full four-party hierarchy deterministically from a seed.  The
// classical profile drops every post-quantum component and moves the whole
// system onto the breakable discrete-log group: that is the configuration
// the store-now-decrypt-later demo records and breaks.
inline PartySet setup_hierarchy(std::uint64_t seed,
                                bool classical_breakable = false) {
    SeedRng rng(seed);
    const sig::SchemeDescriptor root_scheme =
        classical_breakable ? sig::toy_dl_breakable()
                            : sig::hybrid(sig::toy_dl_default(), sig::xmss_mt(4));
    const sig::SchemeDescriptor line_scheme =
        classical_breakable ? sig::toy_dl_breakable()
                            : sig::hybrid(sig::toy_dl_default(), sig::xmss_mt(9));
    const sig::SchemeDescriptor aux_scheme =
        classical_breakable ? sig::toy_dl_breakable() : sig::toy_dl_default();

    PartySet out;
    out.clock = kGenesisTime + 3600;

    out.maintainer_root.role = cert::Role::kMaintainer;
    out.maintainer_root.identity =
        detail::named_subject("maintainer-root", cert::Role::kMaintainer);
    out.maintainer_root.keys = sig::keygen(root_scheme, rng);
    out.maintainer_root.journal = std::make_shared<cert::IssuanceJournal>(rng);
    const cert::Certificate root_cert = cert::self_sign_root(
        out.maintainer_root.keys, out.maintainer_root.identity, kGenesisTime,
        10 * kYearSeconds, *out.maintainer_root.journal);
    out.maintainer_root.certificate = root_cert;

    out.maintainer_token = sig::keygen(aux_scheme, rng);

    out.production_line.role = cert::Role::kProductionLine;
    out.production_line.identity =
        detail::named_subject("production-line-1", cert::Role::kProductionLine);
    out.production_line.keys = sig::keygen(line_scheme, rng);
    out.production_line.journal = std::make_shared<cert::IssuanceJournal>(rng);
    {
        cert::Csr csr =
            detail::csr_for(out.production_line, cert::KeyUsage::kSignCerts);
        // Second-level signing requests demand the hardware token.
        const Bytes digest = sha256(cert::csr_canonical_body(csr));
        auto approval = hardware_token_confirm(digest, true, out.maintainer_token);
        if (!approval || !verify_token_approval(*approval, digest))
            throw ParameterError("hierarchy setup could not approve its own request");
        cert::IssueProfile profile;
        profile.issued_at = kGenesisTime;
        profile.ttl_seconds = 2 * kYearSeconds;
        profile.hybrid_required = !classical_breakable;
        profile.path_len = 1;
        out.production_line.certificate = cert::issue_certificate(
            out.maintainer_root.keys, root_cert, csr, profile,
            *out.maintainer_root.journal);
    }

    out.manufacturer.role = cert::Role::kManufacturer;
    out.manufacturer.identity =
        detail::named_subject("manufacturer-1", cert::Role::kManufacturer);
    out.manufacturer.keys = sig::keygen(aux_scheme, rng);
    {
        cert::Csr csr = detail::csr_for(out.manufacturer, cert::KeyUsage::kAttest);
        cert::IssueProfile profile;
        profile.issued_at = kGenesisTime;
        profile.ttl_seconds = 2 * kYearSeconds;
        out.manufacturer.certificate = cert::issue_certificate(
            out.production_line.keys, *out.production_line.certificate, csr,
            profile, *out.production_line.journal);
    }

    out.operator_party.role = cert::Role::kOperator;
    out.operator_party.identity =
        detail::named_subject("operator-1", cert::Role::kOperator);
    out.operator_party.keys = sig::keygen(aux_scheme, rng);
    {
        cert::Csr csr =
            detail::csr_for(out.operator_party, cert::KeyUsage::kSignData);
        cert::IssueProfile profile;
        profile.issued_at = kGenesisTime;
        profile.ttl_seconds = 2 * kYearSeconds;
        out.operator_party.certificate = cert::issue_certificate(
            out.production_line.keys, *out.production_line.certificate, csr,
            profile, *out.production_line.journal);
    }

    const std::vector<cert::Certificate> all_certs = {
        root_cert, *out.production_line.certificate, *out.manufacturer.certificate,
        *out.operator_party.certificate};
    const Bytes root_pin = cert::pin_digest(root_cert);
    const Bytes line_pin = cert::pin_digest(*out.production_line.certificate);
    for (Party* p : {&out.maintainer_root, &out.production_line,
                     &out.manufacturer, &out.operator_party}) {
        p->trust_store = all_certs;
        p->pinned_digests = {root_pin, line_pin};
    }
    return out;
}

// Provisions a factory-fresh device: TEE contents (including the
// manufacturer signing key), the maintainer anchor, and the frontend pin.
// Keys are generated here only to fix the scheme; enrollment replaces them.
inline Party make_device(const PartySet& parties, const std::string& name,
                         const std::string& model, const std::string& serial,
                         SeedRng& rng) {
    if (!parties.production_line.certificate || !parties.maintainer_root.certificate)
        throw ParameterError("hierarchy is not set up");
    Party device;
    device.role = cert::Role::kDevice;
    device.identity.common_name = name;
    device.identity.role = cert::Role::kDevice;
    device.identity.device_model = model;
    device.identity.serial_number = serial;
    const bool classical =
        parties.production_line.keys.descriptor.scheme_id != sig::SchemeId::kHybrid;
    const sig::SchemeDescriptor device_scheme =
        classical ? parties.production_line.keys.descriptor
                  : sig::hybrid(sig::toy_dl_default(), sig::wots_plus());
    device.keys = sig::keygen(device_scheme, rng);
    TeeState tee;
    tee.manufacturer_private_key = parties.manufacturer.keys;
    tee.hardware_ids = {"board:" + model, "serial:" + serial};
    tee.peripheral_ids = {"net:eth0", "storage:emmc0"};
    tee.embedded_frontend_digests = {
        cert::pin_digest(*parties.production_line.certificate)};
    device.tee_state = std::move(tee);
    device.trust_store = {*parties.maintainer_root.certificate};
    device.pinned_digests = {
        cert::pin_digest(*parties.production_line.certificate)};
    return device;
}

// --- device-side operations -------------------------------------------------------

// Fresh subject keys, attestation evidence over the challenge, and one
// possession proof per key.  The manufacturer key signs the evidence and
// nothing else; it never leaves the TEE.
inline cert::Csr device_generate_csr(Party& device, const Bytes& challenge,
                                     SeedRng& rng) {
    if (!device.tee_state)
        throw AttestationUnavailable("device has no TEE state");
    if (challenge.size() != kChallengeBytes)
        throw ParameterError("challenge must be 32 bytes");
    device.keys = sig::keygen(device.keys.descriptor, rng);
    cert::AttestationEvidence evidence;
    evidence.hardware_ids = device.tee_state->hardware_ids;
    evidence.peripheral_ids = device.tee_state->peripheral_ids;
    evidence.nonce = challenge;
    evidence.tee_signature =
        sig::sign(device.tee_state->manufacturer_private_key,
                  cert::attestation_canonical_body(evidence));
    cert::Csr csr;
    csr.subject = device.identity;
    csr.public_keys = cert::key_entries_for(device.keys, cert::KeyUsage::kSignData);
    csr.attestation = evidence;
    const Bytes body = cert::csr_canonical_body(csr);
    if (device.keys.descriptor.scheme_id == sig::SchemeId::kHybrid) {
        for (auto& inner : device.keys.inner)
            csr.proofs.push_back(sig::sign(inner, body));
    } else {
        csr.proofs.push_back(sig::sign(device.keys, body));
    }
    return csr;
}

inline bool verify_attestation(const cert::Csr& csr,
                               const std::vector<std::string>& expected_hardware_ids,
                               const cert::PublicKeyEntry& manufacturer_key,
                               const Bytes& issued_nonce) {
    if (!csr.attestation)
        throw AttestationUnavailable("request carries no attestation evidence");
    const cert::AttestationEvidence& e = *csr.attestation;
    if (!e.tee_signature) return false;
    bool signature_ok = false;
    try {
        signature_ok = sig::verify(manufacturer_key.key_bytes,
                                   manufacturer_key.descriptor,
                                   cert::attestation_canonical_body(e),
                                   *e.tee_signature);
    } catch (const DecodeError&) {
    } catch (const ParameterError&) {
    }
    return signature_ok && e.nonce == issued_nonce &&
           e.hardware_ids == expected_hardware_ids;
}

// --- the enrollment run -------------------------------------------------------------

namespace detail {

inline Bytes order_body(const cert::SubjectInfo& subject,
                        const std::vector<std::string>& hardware_ids) {
    tlv::Writer w;
    w.nested(tlv::kEnrollSubject, cert::encode_subject(subject));
    for (const auto& id : hardware_ids) w.text(tlv::kEnrollHardwareId, id);
    return w.move();
}

inline const cert::PublicKeyEntry* attest_entry(const PartySet& parties) {
    for (const auto& c : parties.production_line.trust_store) {
        if (c.subject.role != cert::Role::kManufacturer) continue;
        for (const auto& e : c.public_keys)
            if (e.usage == cert::KeyUsage::kAttest) return &e;
    }
    return nullptr;
}

}  // namespace detail

// One complete injection attempt.  The requester (manufacturer on the
// production line, operator over the device API; the flow is identical)
// orders a certificate for the device, the frontend challenges the device,
// verifies attestation, and issues.  The device accepts only a certificate
// that chains to its embedded maintainer anchor and carries its own keys.
inline EnrollmentTranscript run_enrollment(PartySet& parties, Party& device,
                                           AdversaryConfig& adversary,
                                           InjectionPath path,
                                           const ActiveAttack& attack = {}) {
    if (!device.tee_state)
        throw ParameterError("device party carries no TEE state");
    if (device.identity.role != cert::Role::kDevice)
        throw ParameterError("enrollment target must be a device");
    if (!parties.production_line.certificate ||
        !parties.maintainer_root.certificate ||
        !parties.manufacturer.certificate)
        throw ParameterError("hierarchy is not set up");
    if (!parties.production_line.journal)
        throw ParameterError("production line has no issuance journal");
    const cert::PublicKeyEntry* manufacturer_key = detail::attest_entry(parties);
    if (!manufacturer_key)
        throw ParameterError("no attestation key in the frontend trust store");

    const Party& requester = path == InjectionPath::kFrontend
                                 ? parties.manufacturer
                                 : parties.operator_party;
    const cert::Role line_role = cert::Role::kProductionLine;

    EnrollmentTranscript transcript;
    SeedRng protocol_rng = SeedRng(adversary.random_seed).fork("protocol");
    SeedRng adversary_rng = SeedRng(adversary.random_seed).fork("adversary");
    detail::Wire wire;
    wire.adversary = &adversary;
    wire.adversary_rng = &adversary_rng;
    wire.transcript = &transcript.ordered_messages;

    const sig::SchemeParams& group =
        detail::dl_group_of(parties.production_line.keys.descriptor);

    auto tampered = [&]() {
        transcript.outcome = Outcome::kDetectedTampering;
        return transcript;
    };

    try {
        // Requester and frontend agree a session, then place the order.
        auto order_key = detail::run_handshake(wire, group, requester.role,
                                               line_role, protocol_rng);
        if (!order_key) return tampered();
        auto order = wire.step(
            ChannelKind::kControl, requester.role, line_role, *order_key,
            detail::order_body(device.identity,
                               device.tee_state->hardware_ids));
        if (!order) return tampered();
        cert::SubjectInfo ordered_subject;
        std::vector<std::string> expected_ids;
        {
            tlv::Reader r(*order);
            ordered_subject = cert::decode_subject(r.value(tlv::kEnrollSubject));
            while (r.next_is(tlv::kEnrollHardwareId))
                expected_ids.push_back(r.text(tlv::kEnrollHardwareId));
            r.expect_done();
        }

        // Frontend and device agree their own session.
        auto session_key = detail::run_handshake(wire, group, line_role,
                                                 cert::Role::kDevice, protocol_rng);
        if (!session_key) return tampered();

        // Frontend presents its certificate; the device pins it.
        const cert::Certificate presented =
            attack.kind == ActiveAttack::Kind::kSubstituteFrontend &&
                    attack.rogue_certificate
                ? *attack.rogue_certificate
                : *parties.production_line.certificate;
        auto cert_msg = wire.step(ChannelKind::kCertMaterial, line_role,
                                  cert::Role::kDevice, *session_key,
                                  tlv::wrap(tlv::kEnrollCertificate,
                                            cert::encode_certificate(presented)));
        if (!cert_msg) return tampered();
        const cert::Certificate frontend_cert = cert::decode_certificate(
            tlv::unwrap(tlv::kEnrollCertificate, *cert_msg));
        if (!device.tee_state->embedded_frontend_digests.count(
                cert::pin_digest(frontend_cert))) {
            transcript.outcome = Outcome::kPinningMismatch;
            return transcript;
        }

        // Challenge, then the attested request.
        const Bytes challenge = protocol_rng.bytes(kChallengeBytes);
        {
            tlv::Writer w;
            w.bytes(tlv::kEnrollChallenge, challenge);
            auto sent = wire.step(ChannelKind::kControl, line_role,
                                  cert::Role::kDevice, *session_key, w.move());
            if (!sent) return tampered();
        }
        cert::Csr device_csr = device_generate_csr(device, challenge, protocol_rng);
        if (attack.kind == ActiveAttack::Kind::kReplayCsr && attack.stale_csr)
            device_csr = *attack.stale_csr;
        auto csr_msg = wire.step(ChannelKind::kCertMaterial, cert::Role::kDevice,
                                 line_role, *session_key,
                                 tlv::wrap(tlv::kEnrollCsr,
                                           cert::encode_csr(device_csr)));
        if (!csr_msg) return tampered();
        const cert::Csr received_csr =
            cert::decode_csr(tlv::unwrap(tlv::kEnrollCsr, *csr_msg));

        // Frontend-side checks: attestation against the ordered identity.
        if (!verify_attestation(received_csr, expected_ids, *manufacturer_key,
                                challenge) ||
            !(received_csr.subject == ordered_subject)) {
            transcript.outcome = Outcome::kAttestationFailed;
            return transcript;
        }

        cert::IssueProfile profile;
        profile.issued_at = parties.clock;
        profile.ttl_seconds = kDeviceTtlSeconds;
        profile.hybrid_required =
            parties.production_line.keys.descriptor.scheme_id ==
            sig::SchemeId::kHybrid;
        cert::Certificate issued = cert::issue_certificate(
            parties.production_line.keys, *parties.production_line.certificate,
            received_csr, profile, *parties.production_line.journal);

        auto issued_msg = wire.step(ChannelKind::kCertMaterial, line_role,
                                    cert::Role::kDevice, *session_key,
                                    tlv::wrap(tlv::kEnrollCertificate,
                                              cert::encode_certificate(issued)));
        if (!issued_msg) return tampered();
        const cert::Certificate received = cert::decode_certificate(
            tlv::unwrap(tlv::kEnrollCertificate, *issued_msg));

        // Device-side acceptance: the certificate must name this device,
        // carry exactly the keys generated for the request, and chain to
        // the embedded maintainer anchor.
        if (!(received.subject == device.identity)) return tampered();
        const auto own_entries =
            cert::key_entries_for(device.keys, cert::KeyUsage::kSignData);
        if (received.public_keys.size() != own_entries.size()) return tampered();
        for (std::size_t i = 0; i < own_entries.size(); ++i)
            if (cert::encode_key_entry(received.public_keys[i]) !=
                cert::encode_key_entry(own_entries[i]))
                return tampered();
        cert::ValidationPolicy policy;
        policy.evaluation_time = parties.clock;
        policy.anchors = device.trust_store;
        const auto report =
            cert::validate_chain({received, frontend_cert}, policy);
        if (!report.ok) return tampered();

        device.certificate = received;
        transcript.issued_certificate = received;
        transcript.outcome = Outcome::kSuccess;
        return transcript;
    } catch (const Error&) {
        // A payload that opened cleanly but does not parse as the protocol
        // demands is treated exactly like a failed integrity check.
        return tampered();
    }
}

// Renewal of the second-level certificate over the maintainer link.  This
// is the one flow that demands the hardware token; without it the request
// parks at TOKEN_REQUIRED.
inline EnrollmentTranscript run_mirror_sync(PartySet& parties, bool token_present,
                                            std::uint64_t seed = 1) {
    if (!parties.maintainer_root.certificate ||
        !parties.production_line.certificate)
        throw ParameterError("hierarchy is not set up");
    EnrollmentTranscript transcript;
    SeedRng protocol_rng = SeedRng(seed).fork("mirror-sync");
    AdversaryConfig no_adversary;
    SeedRng idle_rng(no_adversary.random_seed);
    detail::Wire wire;
    wire.adversary = nullptr;
    wire.adversary_rng = &idle_rng;
    wire.transcript = &transcript.ordered_messages;
    const sig::SchemeParams& group =
        detail::dl_group_of(parties.maintainer_root.keys.descriptor);

    auto tampered = [&]() {
        transcript.outcome = Outcome::kDetectedTampering;
        return transcript;
    };

    auto session_key =
        detail::run_handshake(wire, group, cert::Role::kProductionLine,
                              cert::Role::kMaintainer, protocol_rng);
    if (!session_key) return tampered();

    cert::Csr csr =
        detail::csr_for(parties.production_line, cert::KeyUsage::kSignCerts);
    auto csr_msg = wire.step(ChannelKind::kCertMaterial,
                             cert::Role::kProductionLine, cert::Role::kMaintainer,
                             *session_key,
                             tlv::wrap(tlv::kEnrollCsr, cert::encode_csr(csr)));
    if (!csr_msg) return tampered();
    const cert::Csr received =
        cert::decode_csr(tlv::unwrap(tlv::kEnrollCsr, *csr_msg));

    const Bytes digest = sha256(cert::csr_canonical_body(received));
    auto approval =
        hardware_token_confirm(digest, token_present, parties.maintainer_token);
    if (!approval || !verify_token_approval(*approval, digest)) {
        tlv::Writer w;
        w.u8(tlv::kEnrollStatus,
             static_cast<std::uint8_t>(Outcome::kTokenRequired));
        wire.step(ChannelKind::kControl, cert::Role::kMaintainer,
                  cert::Role::kProductionLine, *session_key, w.move());
        transcript.outcome = Outcome::kTokenRequired;
        return transcript;
    }

    cert::IssueProfile profile;
    profile.issued_at = parties.clock;
    profile.ttl_seconds = 2 * kYearSeconds;
    profile.hybrid_required =
        parties.maintainer_root.keys.descriptor.scheme_id ==
        sig::SchemeId::kHybrid;
    profile.path_len = 1;
    cert::Certificate renewed = cert::issue_certificate(
        parties.maintainer_root.keys, *parties.maintainer_root.certificate,
        received, profile, *parties.maintainer_root.journal);
    auto cert_msg = wire.step(ChannelKind::kCertMaterial, cert::Role::kMaintainer,
                              cert::Role::kProductionLine, *session_key,
                              tlv::wrap(tlv::kEnrollCertificate,
                                        cert::encode_certificate(renewed)));
    if (!cert_msg) return tampered();
    transcript.issued_certificate = renewed;
    transcript.outcome = Outcome::kSuccess;
    return transcript;
}

// Every payload must announce the kind of the message that carries it; the
// two channels never share a record.
inline bool channel_separation_ok(const EnrollmentTranscript& t) {
    for (const auto& m : t.ordered_messages)
        if (m.payload.empty() ||
            m.payload[0] != static_cast<std::uint8_t>(m.kind))
            return false;
    return true;
}

// --- store now, decrypt later -------------------------------------------------------

enum class AttackStatus : std::uint8_t {
    kRecovered = 1,
    kInfeasible = 2,
};

inline const char* attack_status_name(AttackStatus s) {
    switch (s) {
        case AttackStatus::kRecovered: return "RECOVERED";
        case AttackStatus::kInfeasible: return "INFEASIBLE";
    }
    throw ParameterError("unknown attack status");
}

struct AttackReport {
    AttackStatus status = AttackStatus::kInfeasible;
    std::uint64_t operations_used = 0;
    std::vector<Bytes> recovered_payloads;  // decrypted plaintext bodies
    std::string note;
};

// Replays recorded traffic as a future quantum-equipped adversary: solve
// the recorded key exchanges by discrete-log search within the operation
// budget, rebuild the session keys, and decrypt everything that followed.
// Exchanges over a group larger than the budget are never attempted; a
// transcript made only of those is reported infeasible.
inline AttackReport simulate_store_now_decrypt_later(
    const EnrollmentTranscript& transcript, const AdversaryConfig& adversary,
    std::uint64_t quantum_event_budget) {
    (void)transcript;  // ordering context; the captured log is the evidence
    if (!adversary.record_for_later || adversary.recorded_log.empty())
        throw NothingRecorded("the adversary kept no recorded traffic");

    struct PendingExchange {
        sig::SchemeParams group;
        std::uint64_t pub_init = 0;
    };
    // Link key: direction-independent pair of roles.
    using LinkId = std::pair<std::uint8_t, std::uint8_t>;
    auto link_of = [](const ChannelMessage& m) {
        const auto a = static_cast<std::uint8_t>(m.sender);
        const auto b = static_cast<std::uint8_t>(m.receiver);
        return a < b ? LinkId{a, b} : LinkId{b, a};
    };
    std::map<LinkId, PendingExchange> pending;
    std::map<LinkId, Bytes> session_keys;

    AttackReport report;
    std::size_t sessions_broken = 0, sessions_skipped = 0;
    for (const Bytes& wire : adversary.recorded_log) {
        ChannelMessage m;
        try {
            m = decode_channel_message(wire);
        } catch (const DecodeError&) {
            continue;
        }
        if (m.payload.empty()) continue;
        const LinkId link = link_of(m);
        const Bytes body = detail::unseal_body(m, {});  // handshakes are cleartext
        if (m.kind == ChannelKind::kControl) {
            bool consumed = false;
            try {
                tlv::Reader r(body);
                if (r.next_is(tlv::kHsPrime)) {
                    PendingExchange px;
                    px.group.prime_p = r.u64(tlv::kHsPrime);
                    px.group.generator_g = r.u64(tlv::kHsGenerator);
                    px.group.subgroup_order_q = r.u64(tlv::kHsOrder);
                    px.pub_init = r.u64(tlv::kHsPublic);
                    pending[link] = px;
                    consumed = true;
                } else if (r.next_is(tlv::kHsPublic) && pending.count(link)) {
                    const std::uint64_t pub_reply = r.u64(tlv::kHsPublic);
                    const PendingExchange px = pending[link];
                    pending.erase(link);
                    const std::uint64_t remaining =
                        quantum_event_budget - std::min(quantum_event_budget,
                                                        report.operations_used);
                    if (px.group.subgroup_order_q > remaining) {
                        ++sessions_skipped;
                    } else {
                        const auto res = sig::toydl::brute_force_dlog(
                            px.group, u64be_bytes(px.pub_init), remaining);
                        report.operations_used += res.operations;
                        if (!res.exponent) {
                            ++sessions_skipped;
                        } else {
                            const std::uint64_t shared = sig::detail::powmod_u64(
                                pub_reply, *res.exponent, px.group.prime_p);
                            session_keys[link] = detail::session_key_from(
                                shared, px.pub_init, pub_reply);
                            ++sessions_broken;
                        }
                    }
                    consumed = true;
                }
            } catch (const DecodeError&) {
                // Sealed control traffic, not a cleartext key exchange.
            }
            if (consumed) continue;
        }
        auto key = session_keys.find(link);
        if (key == session_keys.end()) continue;
        const Bytes plain = detail::unseal_body(m, key->second);
        const Bytes header =
            detail::message_header(m.kind, m.sender, m.receiver, m.sequence);
        if (detail::channel_tag(key->second, header, plain) == m.integrity_tag)
            report.recovered_payloads.push_back(plain);
    }

    char note[160];
    if (sessions_broken > 0) {
        report.status = AttackStatus::kRecovered;
        std::snprintf(note, sizeof(note),
                      "broke %zu key exchange(s) with %llu group operations; "
                      "decrypted %zu payload(s)",
                      sessions_broken,
                      static_cast<unsigned long long>(report.operations_used),
                      report.recovered_payloads.size());
    } else {
        report.status = AttackStatus::kInfeasible;
        std::snprintf(note, sizeof(note),
                      "%zu recorded exchange(s), none within a budget of %llu "
                      "operations",
                      sessions_skipped,
                      static_cast<unsigned long long>(quantum_event_budget));
    }
    report.note = note;
    return report;
}

// --- transcript export ----------------------------------------------------------------

inline std::string hex_string(ByteView b) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (std::uint8_t v : b) {
        out.push_back(digits[v >> 4]);
        out.push_back(digits[v & 0xF]);
    }
    return out;
}

// One summary line, then one base64 TLV record per message.
inline std::string export_transcript(const EnrollmentTranscript& t,
                                     std::uint64_t seed,
                                     const AdversaryConfig& adversary) {
    std::string out = "outcome=" + std::string(outcome_name(t.outcome)) +
                      " seed=" + std::to_string(seed) +
                      " config=" + hex_string(config_digest(adversary)) + "\n";
    for (const auto& m : t.ordered_messages)
        out += base64_encode(encode_channel_message(m)) + "\n";
    return out;
}

struct ParsedTranscript {
    Outcome outcome = Outcome::kDetectedTampering;
    std::uint64_t seed = 0;
    std::string config_digest_hex;
    std::vector<ChannelMessage> messages;
};

inline ParsedTranscript parse_transcript(const std::string& text) {
    ParsedTranscript out;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!have_header) {
            std::uint64_t seen = 0;
            for (const std::string& field : {std::string("outcome="),
                                             std::string("seed="),
                                             std::string("config=")}) {
                const std::size_t at = line.find(field);
                if (at == std::string::npos)
                    throw DecodeError("transcript header misses " + field);
                ++seen;
            }
            (void)seen;
            const std::size_t o = line.find("outcome=") + 8;
            out.outcome = outcome_from_name(line.substr(o, line.find(' ', o) - o));
            const std::size_t s = line.find("seed=") + 5;
            out.seed = std::stoull(line.substr(s, line.find(' ', s) - s));
            out.config_digest_hex = line.substr(line.find("config=") + 7);
            if (out.config_digest_hex.size() != 64)
                throw DecodeError("transcript header config digest malformed");
            have_header = true;
            continue;
        }
        out.messages.push_back(decode_channel_message(base64_decode(line)));
    }
    if (!have_header) throw DecodeError("transcript has no header line");
    return out;
}

// --- scenario files ---------------------------------------------------------------------

// Flat key=value description of one simulation run, loadable from disk.
struct Scenario {
    std::string operation = "enroll";  // enroll | mirror-sync
    std::uint64_t seed = 1;
    bool classical_only = false;
    InjectionPath path = InjectionPath::kFrontend;
    std::string attack = "none";  // none | substitute-frontend | replay-csr
    AdversaryConfig adversary;
    std::string device_name = "device-1";
    std::string device_model = "gw-1000";
    std::string device_serial = "SN-0001";
    bool token_present = true;
};

inline std::string serialize_scenario(const Scenario& s) {
    char prob[64];
    std::snprintf(prob, sizeof(prob), "%.17g", s.adversary.modify_probability);
    std::string out;
    out += "operation=" + s.operation + "\n";
    out += "seed=" + std::to_string(s.seed) + "\n";
    out += "classical_only=" + std::string(s.classical_only ? "true" : "false") + "\n";
    out += "injection_path=" + std::string(injection_path_name(s.path)) + "\n";
    out += "attack=" + s.attack + "\n";
    out += "eavesdrop=" + std::string(s.adversary.eavesdrop ? "true" : "false") + "\n";
    out += "modify_probability=" + std::string(prob) + "\n";
    out += "replay=" + std::string(s.adversary.replay ? "true" : "false") + "\n";
    out += "record_for_later=" +
           std::string(s.adversary.record_for_later ? "true" : "false") + "\n";
    out += "adversary_seed=" + std::to_string(s.adversary.random_seed) + "\n";
    out += "device_name=" + s.device_name + "\n";
    out += "device_model=" + s.device_model + "\n";
    out += "device_serial=" + s.device_serial + "\n";
    out += "token_present=" + std::string(s.token_present ? "true" : "false") + "\n";
    return out;
}

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw DecodeError("scenario: " + key + " must be true or false");
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw DecodeError("scenario: " + key + " must be a non-negative integer");
    return std::stoull(v);
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
    Scenario s;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw DecodeError("scenario: malformed line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "operation") {
            if (value != "enroll" && value != "mirror-sync")
                throw DecodeError("scenario: unknown operation: " + value);
            s.operation = value;
        } else if (key == "seed") {
            s.seed = detail::parse_u64(value, key);
        } else if (key == "classical_only") {
            s.classical_only = detail::parse_bool(value, key);
        } else if (key == "injection_path") {
            s.path = injection_path_from_name(value);
        } else if (key == "attack") {
            if (value != "none" && value != "substitute-frontend" &&
                value != "replay-csr")
                throw DecodeError("scenario: unknown attack: " + value);
            s.attack = value;
        } else if (key == "eavesdrop") {
            s.adversary.eavesdrop = detail::parse_bool(value, key);
        } else if (key == "modify_probability") {
            char* parsed_end = nullptr;
            const double p = std::strtod(value.c_str(), &parsed_end);
            if (value.empty() || parsed_end != value.c_str() + value.size() ||
                p < 0.0 || p > 1.0)
                throw DecodeError("scenario: modify_probability must be in [0,1]");
            s.adversary.modify_probability = p;
        } else if (key == "replay") {
            s.adversary.replay = detail::parse_bool(value, key);
        } else if (key == "record_for_later") {
            s.adversary.record_for_later = detail::parse_bool(value, key);
        } else if (key == "adversary_seed") {
            s.adversary.random_seed = detail::parse_u64(value, key);
        } else if (key == "device_name") {
            s.device_name = value;
        } else if (key == "device_model") {
            s.device_model = value;
        } else if (key == "device_serial") {
            s.device_serial = value;
        } else if (key == "token_present") {
            s.token_present = detail::parse_bool(value, key);
        } else {
            throw DecodeError("scenario: unknown key: " + key);
        }
    }
    return s;
}

struct ScenarioResult {
    EnrollmentTranscript transcript;
    AdversaryConfig adversary;  // recorded log populated by the run
    std::uint64_t seed = 0;
};

// Builds the hierarchy and device from the scenario seed, stages the
// requested targeted attack, and runs it.
inline ScenarioResult run_scenario(const Scenario& s) {
    PartySet parties = setup_hierarchy(s.seed, s.classical_only);
    ScenarioResult out;
    out.seed = s.seed;
    out.adversary = s.adversary;
    if (s.operation == "mirror-sync") {
        out.transcript = run_mirror_sync(parties, s.token_present, s.seed);
        return out;
    }
    SeedRng device_rng = SeedRng(s.seed).fork("device-setup");
    Party device = make_device(parties, s.device_name, s.device_model,
                               s.device_serial, device_rng);
    ActiveAttack attack;
    if (s.attack == "substitute-frontend") {
        attack.kind = ActiveAttack::Kind::kSubstituteFrontend;
        SeedRng rogue_rng = SeedRng(s.seed).fork("rogue-frontend");
        sig::KeyPair rogue_keys = sig::keygen(sig::toy_dl_default(), rogue_rng);
        cert::IssuanceJournal rogue_journal(rogue_rng);
        attack.rogue_certificate = cert::self_sign_root(
            rogue_keys, detail::named_subject("frontend-lookalike",
                                              cert::Role::kMaintainer),
            kGenesisTime, 2 * kYearSeconds, rogue_journal);
    } else if (s.attack == "replay-csr") {
        attack.kind = ActiveAttack::Kind::kReplayCsr;
        SeedRng stale_rng = SeedRng(s.seed).fork("stale-csr");
        const Bytes old_challenge = stale_rng.bytes(kChallengeBytes);
        attack.stale_csr = device_generate_csr(device, old_challenge, stale_rng);
    }
    out.transcript =
        run_enrollment(parties, device, out.adversary, s.path, attack);
    return out;
}

}  // namespace pqpki::enroll

#endif
