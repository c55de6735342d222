#ifndef PQPKI_TESTS_TESTUTIL_HPP
#define PQPKI_TESTS_TESTUTIL_HPP

// Shared fixtures: deterministic subjects, CSRs with valid possession
// proofs, and small signed hierarchies sized for fast test runs.

#include <string>
#include <vector>

#include "pqpki/cert/certmodel.hpp"
#include "pqpki/rng.hpp"
#include "pqpki/sig/sigcore.hpp"

namespace testutil {

using namespace pqpki;

inline constexpr std::uint64_t kT0 = 1700000000;  // fixed base instant
inline constexpr std::uint64_t kYear = 365ull * 86400;

inline cert::SubjectInfo maintainer_subject(const std::string& name = "root-ca") {
    cert::SubjectInfo s;
    s.common_name = name;
    s.role = cert::Role::kMaintainer;
    return s;
}

inline cert::SubjectInfo production_line_subject(const std::string& name = "line-1") {
    cert::SubjectInfo s;
    s.common_name = name;
    s.role = cert::Role::kProductionLine;
    return s;
}

inline cert::SubjectInfo device_subject(const std::string& name,
                                        const std::string& model,
                                        const std::string& serial) {
    cert::SubjectInfo s;
    s.common_name = name;
    s.role = cert::Role::kDevice;
    s.device_model = model;
    s.serial_number = serial;
    return s;
}

// CSR over the key pair's entries with one valid proof per entry. The key
// pair is mutated: stateful components consume one signature per proof.
inline cert::Csr make_csr(const cert::SubjectInfo& subject, sig::KeyPair& kp,
                          cert::KeyUsage usage,
                          std::optional<cert::AttestationEvidence> att = {}) {
    cert::Csr csr;
    csr.subject = subject;
    csr.public_keys = cert::key_entries_for(kp, usage);
    csr.attestation = std::move(att);
    const Bytes body = cert::csr_canonical_body(csr);
    if (kp.descriptor.scheme_id == sig::SchemeId::kHybrid) {
        for (auto& inner : kp.inner) csr.proofs.push_back(sig::sign(inner, body));
    } else {
        csr.proofs.push_back(sig::sign(kp, body));
    }
    return csr;
}

// Small hybrid hierarchy: root (toy DL + XMSS h=4) signing a production
// line (h=4), which signs devices.  Capacities: 16 signatures each.
struct Hierarchy {
    sig::KeyPair root_keys;
    cert::Certificate root_cert;
    sig::KeyPair line_keys;
    cert::Certificate line_cert;
    cert::IssuanceJournal root_journal;
    cert::IssuanceJournal line_journal;
};

inline Hierarchy make_hierarchy(SeedRng& rng, std::uint32_t line_tree_height = 4) {
    Hierarchy h{
        {}, {}, {}, {}, cert::IssuanceJournal(rng.bytes(16)),
        cert::IssuanceJournal(rng.bytes(16)),
    };
    h.root_keys = sig::keygen(
        sig::hybrid(sig::toy_dl_default(), sig::xmss_mt(4)), rng);
    h.root_cert = cert::self_sign_root(h.root_keys, maintainer_subject(), kT0,
                                       10 * kYear, h.root_journal);

    h.line_keys = sig::keygen(
        sig::hybrid(sig::toy_dl_default(), sig::xmss_mt(line_tree_height)), rng);
    cert::Csr line_csr =
        make_csr(production_line_subject(), h.line_keys, cert::KeyUsage::kSignCerts);
    cert::IssueProfile profile;
    profile.issued_at = kT0;
    profile.ttl_seconds = 2 * kYear;
    profile.hybrid_required = true;
    profile.path_len = 1;
    h.line_cert = cert::issue_certificate(h.root_keys, h.root_cert, line_csr,
                                          profile, h.root_journal);
    return h;
}

// Issues one device certificate from the hierarchy's production line.
inline cert::Certificate issue_device(Hierarchy& h, SeedRng& rng,
                                      const std::string& name,
                                      const std::string& model,
                                      const std::string& serial,
                                      std::uint64_t ttl = 30 * 86400,
                                      bool hybrid_required = true) {
    sig::KeyPair kp =
        sig::keygen(sig::hybrid(sig::toy_dl_default(), sig::wots_plus()), rng);
    cert::Csr csr = make_csr(device_subject(name, model, serial), kp,
                             cert::KeyUsage::kSignData);
    cert::IssueProfile profile;
    profile.issued_at = kT0;
    profile.ttl_seconds = ttl;
    profile.hybrid_required = hybrid_required;
    return cert::issue_certificate(h.line_keys, h.line_cert, csr, profile,
                                   h.line_journal);
}

inline cert::ValidationPolicy policy_for(const Hierarchy& h,
                                         std::uint64_t at = kT0 + 3600) {
    cert::ValidationPolicy p;
    p.evaluation_time = at;
    p.anchors = {h.root_cert};
    return p;
}

// Downgrade helpers: keep only the legacy component of every hybrid
// signature, as a standalone plain signature.
inline cert::Certificate strip_pq_components(const cert::Certificate& c) {
    cert::Certificate out = c;
    for (auto& sv : out.signatures)
        if (sv.scheme_id == sig::SchemeId::kHybrid && sv.components.size() == 2) {
            sig::SignatureValue legacy = sv.components[0];
            sv = std::move(legacy);
        }
    return out;
}

// Alternative downgrade: keep the hybrid framing but zero the post-quantum
// component's payload.
inline cert::Certificate zero_pq_components(const cert::Certificate& c) {
    cert::Certificate out = c;
    for (auto& sv : out.signatures)
        if (sv.scheme_id == sig::SchemeId::kHybrid && sv.components.size() == 2)
            std::fill(sv.components[1].payload.begin(),
                      sv.components[1].payload.end(), std::uint8_t{0});
    return out;
}

// --- random instances for round-trip suites ------------------------------------
//
// Generated values satisfy every decode-time invariant (valid descriptors,
// exact key lengths, device subjects fully named, hybrid-required implying a
// quantum-resistant entry) so encode -> decode -> encode must be identity.

inline std::string random_name(SeedRng& rng, std::size_t min_len = 3) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789-";
    const std::size_t len = min_len + static_cast<std::size_t>(rng.below(10));
    std::string s;
    for (std::size_t i = 0; i < len; ++i)
        s.push_back(alphabet[rng.below(sizeof(alphabet) - 1)]);
    return s;
}

inline cert::SubjectInfo random_subject(SeedRng& rng) {
    cert::SubjectInfo s;
    s.common_name = random_name(rng);
    s.role = static_cast<cert::Role>(1 + rng.below(5));
    if (s.role == cert::Role::kDevice || rng.chance(0.3)) {
        s.device_model = random_name(rng);
        s.serial_number = random_name(rng);
    }
    return s;
}

inline sig::SchemeDescriptor random_plain_descriptor(SeedRng& rng) {
    const std::uint32_t ns[] = {16, 24, 32};
    const std::uint32_t ws[] = {4, 16, 256};
    switch (rng.below(4)) {
        case 0: return sig::toy_dl_default();
        case 1: return sig::toy_dl_breakable();
        case 2:
            return sig::wots_plus(ns[rng.below(3)], ws[rng.below(3)]);
        default:
            return sig::xmss_mt(1 + static_cast<std::uint32_t>(rng.below(12)),
                                ns[rng.below(3)], ws[rng.below(3)]);
    }
}

inline sig::SchemeDescriptor random_pq_descriptor(SeedRng& rng) {
    for (;;) {
        sig::SchemeDescriptor d = random_plain_descriptor(rng);
        if (!sig::quantum_vulnerable(d)) return d;
    }
}

inline sig::SchemeDescriptor random_descriptor(SeedRng& rng) {
    if (rng.chance(0.25)) {
        sig::SchemeDescriptor legacy =
            rng.chance(0.5) ? sig::toy_dl_default() : sig::toy_dl_breakable();
        return sig::hybrid(legacy, random_pq_descriptor(rng));
    }
    return random_plain_descriptor(rng);
}

inline cert::PublicKeyEntry random_entry(SeedRng& rng) {
    cert::PublicKeyEntry e;
    e.descriptor = random_descriptor(rng);
    e.key_bytes = rng.bytes(sig::public_key_size(e.descriptor));
    e.usage = static_cast<cert::KeyUsage>(1 + rng.below(3));
    return e;
}

inline sig::SignatureValue random_signature(SeedRng& rng, bool allow_hybrid = true) {
    sig::SignatureValue sv;
    switch (rng.below(allow_hybrid ? 4u : 3u)) {
        case 0:
            sv.scheme_id = sig::SchemeId::kToyDl;
            sv.payload = rng.bytes(16);
            break;
        case 1:
            sv.scheme_id = sig::SchemeId::kWotsPlus;
            sv.payload = rng.bytes(32 + rng.below(256));
            break;
        case 2:
            sv.scheme_id = sig::SchemeId::kXmssMt;
            sv.payload = rng.bytes(32 + rng.below(256));
            sv.leaf_index = rng.below(1024);
            break;
        default:
            sv.scheme_id = sig::SchemeId::kHybrid;
            sv.components.push_back(random_signature(rng, false));
            sv.components.push_back(random_signature(rng, false));
            break;
    }
    return sv;
}

inline cert::Extensions random_extensions(SeedRng& rng) {
    cert::Extensions x;
    x.hybrid_required = rng.chance(0.5);
    if (rng.chance(0.5)) x.attestation_digest = rng.bytes(32);
    if (rng.chance(0.5)) x.service_zone_state = random_name(rng);
    if (rng.chance(0.5)) x.device_binding = rng.bytes(8 + rng.below(32));
    if (rng.chance(0.5)) x.path_len = 1 + static_cast<std::uint32_t>(rng.below(4));
    return x;
}

inline cert::Certificate random_certificate(SeedRng& rng) {
    cert::Certificate c;
    c.version = 1;
    c.serial = rng.bytes(16);
    c.issuer = random_subject(rng);
    c.subject = random_subject(rng);
    c.not_before = kT0 + rng.below(kYear);
    c.not_after = c.not_before + 1 + rng.below(10 * kYear);
    const std::size_t keys = 1 + rng.below(3);
    for (std::size_t i = 0; i < keys; ++i) c.public_keys.push_back(random_entry(rng));
    c.extensions = random_extensions(rng);
    if (c.extensions.hybrid_required) {
        bool has_pq = false;
        for (const auto& e : c.public_keys)
            if (!sig::quantum_vulnerable(e.descriptor)) has_pq = true;
        if (!has_pq) {
            cert::PublicKeyEntry e;
            e.descriptor = random_pq_descriptor(rng);
            e.key_bytes = rng.bytes(sig::public_key_size(e.descriptor));
            e.usage = cert::KeyUsage::kSignData;
            c.public_keys.push_back(e);
        }
    }
    const std::size_t sigs = 1 + rng.below(2);
    for (std::size_t i = 0; i < sigs; ++i)
        c.signatures.push_back(random_signature(rng));
    return c;
}

inline cert::AttestationEvidence random_attestation(SeedRng& rng) {
    cert::AttestationEvidence a;
    const std::size_t hw = 1 + rng.below(3);
    for (std::size_t i = 0; i < hw; ++i) a.hardware_ids.push_back(random_name(rng));
    const std::size_t ph = rng.below(3);
    for (std::size_t i = 0; i < ph; ++i) a.peripheral_ids.push_back(random_name(rng));
    a.nonce = rng.bytes(32);
    if (rng.chance(0.5)) a.tee_signature = random_signature(rng, false);
    return a;
}

inline cert::Csr random_csr(SeedRng& rng) {
    cert::Csr c;
    c.subject = random_subject(rng);
    const std::size_t keys = 1 + rng.below(3);
    for (std::size_t i = 0; i < keys; ++i) c.public_keys.push_back(random_entry(rng));
    if (rng.chance(0.6)) c.attestation = random_attestation(rng);
    for (std::size_t i = 0; i < keys; ++i)
        c.proofs.push_back(random_signature(rng));
    return c;
}

inline cert::RevocationList random_revocation_list(SeedRng& rng) {
    cert::RevocationList rl;
    rl.version = 1 + rng.below(1000);
    rl.issued_at = kT0 + rng.below(kYear);
    const std::size_t n = rng.below(6);
    for (std::size_t i = 0; i < n; ++i) {
        cert::RevocationEntry e;
        switch (rng.below(3)) {
            case 0: e.scope = cert::SerialScope{rng.bytes(16)}; break;
            case 1: e.scope = cert::DeviceModelScope{random_name(rng)}; break;
            default: e.scope = cert::CaScope{random_subject(rng)}; break;
        }
        e.reason = static_cast<cert::RevocationReason>(1 + rng.below(3));
        e.revoked_at = kT0 + rng.below(kYear);
        rl.entries.push_back(std::move(e));
    }
    rl.issuer = random_subject(rng);
    if (rng.chance(0.7)) rl.signature = random_signature(rng);
    return rl;
}

}  // namespace testutil

#endif
