#ifndef PQPKI_CERT_CERTMODEL_HPP
#define PQPKI_CERT_CERTMODEL_HPP

// Certificate data model and chain validation.
//
// The model mirrors a conventional X.509 deployment in miniature: subjects
// with roles instead of DN strings, a fixed three-level hierarchy depth by
// policy, key entries instead of SubjectPublicKeyInfo (a certificate may
// carry several, so one certificate can bind a legacy key and a
// quantum-resistant key at once), and extensions limited to the handful the
// toolkit acts on.
//
// Encoding discipline: every structure has a canonical to-be-signed body
// (fields in ascending tag order, options omitted when absent) and a full
// encoding that appends the signatures.  Signing and verifying always use
// the canonical body; pin digests hash the full encoding so a pinned
// certificate cannot have its signature set swapped.
//
// Validity windows are half-open: a certificate is current at time t iff
// notBefore <= t < notAfter.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pqpki/base64.hpp"
#include "pqpki/bytes.hpp"
#include "pqpki/errors.hpp"
#include "pqpki/io.hpp"
#include "pqpki/sha256.hpp"
#include "pqpki/sig/sigcore.hpp"
#include "pqpki/tlv.hpp"

namespace pqpki::cert {

enum class Role : std::uint8_t {
    kMaintainer = 1,      // owns the root and the revocation authority
    kProductionLine = 2,  // second-level issuing frontend
    kManufacturer = 3,    // provisions devices, reports key injections
    kOperator = 4,        // human or service operating enrolled devices
    kDevice = 5,
};

inline const char* role_name(Role r) {
    switch (r) {
        case Role::kMaintainer: return "maintainer";
        case Role::kProductionLine: return "production-line";
        case Role::kManufacturer: return "manufacturer";
        case Role::kOperator: return "operator";
        case Role::kDevice: return "device";
    }
    return "unknown";
}

inline Role role_from_name(const std::string& name) {
    if (name == "maintainer") return Role::kMaintainer;
    if (name == "production-line") return Role::kProductionLine;
    if (name == "manufacturer") return Role::kManufacturer;
    if (name == "operator") return Role::kOperator;
    if (name == "device") return Role::kDevice;
    throw ParameterError("unknown role: " + name);
}

enum class KeyUsage : std::uint8_t {
    kSignCerts = 1,
    kSignData = 2,
    kAttest = 3,
};

inline const char* usage_name(KeyUsage u) {
    switch (u) {
        case KeyUsage::kSignCerts: return "sign-certs";
        case KeyUsage::kSignData: return "sign-data";
        case KeyUsage::kAttest: return "attest";
    }
    return "unknown";
}

inline KeyUsage usage_from_name(const std::string& name) {
    if (name == "sign-certs") return KeyUsage::kSignCerts;
    if (name == "sign-data") return KeyUsage::kSignData;
    if (name == "attest") return KeyUsage::kAttest;
    throw ParameterError("unknown key usage: " + name);
}

// Empty device_model / serial_number mean "not set" and are omitted from the
// encoding.
struct SubjectInfo {
    std::string common_name;
    Role role = Role::kDevice;
    std::string device_model;
    std::string serial_number;

    bool operator==(const SubjectInfo&) const = default;
};

inline void validate_subject(const SubjectInfo& s) {
    if (s.common_name.empty()) throw ParameterError("subject needs a common name");
    if (s.role == Role::kDevice &&
        (s.device_model.empty() || s.serial_number.empty()))
        throw ParameterError("device subjects need a model and a serial number");
}

struct PublicKeyEntry {
    sig::SchemeDescriptor descriptor;
    Bytes key_bytes;
    KeyUsage usage = KeyUsage::kSignData;

    bool operator==(const PublicKeyEntry&) const = default;
};

struct Extensions {
    bool hybrid_required = false;
    std::optional<Bytes> attestation_digest;   // 32 bytes when present
    std::optional<std::string> service_zone_state;
    std::optional<Bytes> device_binding;
    std::uint32_t path_len = 0;  // issuing levels allowed beneath this cert

    bool operator==(const Extensions&) const = default;
};

struct Certificate {
    std::uint32_t version = 1;
    Bytes serial;  // 16 bytes, unique per issuing journal
    SubjectInfo issuer;
    SubjectInfo subject;
    std::uint64_t not_before = 0;
    std::uint64_t not_after = 0;
    std::vector<PublicKeyEntry> public_keys;
    Extensions extensions;
    std::vector<sig::SignatureValue> signatures;

    bool operator==(const Certificate&) const = default;
};

struct AttestationEvidence {
    std::vector<std::string> hardware_ids;
    std::vector<std::string> peripheral_ids;
    Bytes nonce;  // 32-byte challenge from the enrolling frontend
    std::optional<sig::SignatureValue> tee_signature;

    bool operator==(const AttestationEvidence&) const = default;
};

struct Csr {
    SubjectInfo subject;
    std::vector<PublicKeyEntry> public_keys;
    std::optional<AttestationEvidence> attestation;
    // One proof of possession per key entry, over the canonical CSR body.
    std::vector<sig::SignatureValue> proofs;

    bool operator==(const Csr&) const = default;
};

// --- revocation data ----------------------------------------------------------

enum class RevocationReason : std::uint8_t {
    kCompromise = 1,
    kExpiryPolicy = 2,
    kSuperseded = 3,
};

struct SerialScope {
    Bytes serial;  // 16 bytes
    bool operator==(const SerialScope&) const = default;
};
struct DeviceModelScope {
    std::string model;
    bool operator==(const DeviceModelScope&) const = default;
};
// Matches every certificate the named CA issued. A self-signed root names
// itself as issuer, so revoking a root also revokes the root certificate.
struct CaScope {
    SubjectInfo ca;
    bool operator==(const CaScope&) const = default;
};

using RevocationScope = std::variant<SerialScope, DeviceModelScope, CaScope>;

struct RevocationEntry {
    RevocationScope scope;
    RevocationReason reason = RevocationReason::kCompromise;
    std::uint64_t revoked_at = 0;

    bool operator==(const RevocationEntry&) const = default;
};

struct RevocationList {
    std::uint64_t version = 0;  // strictly increasing per issuer
    std::uint64_t issued_at = 0;
    std::vector<RevocationEntry> entries;
    SubjectInfo issuer;
    std::optional<sig::SignatureValue> signature;

    bool operator==(const RevocationList&) const = default;
};

// --- encoding -------------------------------------------------------------------

inline Bytes encode_subject(const SubjectInfo& s) {
    tlv::Writer w;
    w.text(tlv::kSubjCommonName, s.common_name);
    w.u8(tlv::kSubjRole, static_cast<std::uint8_t>(s.role));
    if (!s.device_model.empty()) w.text(tlv::kSubjDeviceModel, s.device_model);
    if (!s.serial_number.empty()) w.text(tlv::kSubjSerialNumber, s.serial_number);
    return w.move();
}

inline SubjectInfo decode_subject(ByteView data) {
    tlv::Reader r(data);
    SubjectInfo s;
    s.common_name = r.text(tlv::kSubjCommonName);
    const std::uint8_t role = r.u8(tlv::kSubjRole);
    if (role < 1 || role > 5) throw DecodeError("unknown role value");
    s.role = static_cast<Role>(role);
    if (r.next_is(tlv::kSubjDeviceModel)) s.device_model = r.text(tlv::kSubjDeviceModel);
    if (r.next_is(tlv::kSubjSerialNumber))
        s.serial_number = r.text(tlv::kSubjSerialNumber);
    r.expect_done();
    try {
        validate_subject(s);
    } catch (const ParameterError& e) {
        throw DecodeError(e.what());
    }
    return s;
}

inline Bytes encode_key_entry(const PublicKeyEntry& e) {
    tlv::Writer w;
    w.nested(tlv::kEntryDescriptor, sig::encode_descriptor(e.descriptor));
    w.bytes(tlv::kEntryKeyBytes, e.key_bytes);
    w.u8(tlv::kEntryUsage, static_cast<std::uint8_t>(e.usage));
    return w.move();
}

inline PublicKeyEntry decode_key_entry(ByteView data) {
    tlv::Reader r(data);
    PublicKeyEntry e;
    e.descriptor = sig::decode_descriptor_checked(r.value(tlv::kEntryDescriptor));
    e.key_bytes = r.bytes(tlv::kEntryKeyBytes);
    if (e.key_bytes.size() != sig::public_key_size(e.descriptor))
        throw DecodeError("key length does not fit the declared scheme");
    const std::uint8_t usage = r.u8(tlv::kEntryUsage);
    if (usage < 1 || usage > 3) throw DecodeError("unknown key usage value");
    e.usage = static_cast<KeyUsage>(usage);
    r.expect_done();
    return e;
}

inline Bytes encode_extensions(const Extensions& x) {
    tlv::Writer w;
    w.boolean(tlv::kExtHybridRequired, x.hybrid_required);
    if (x.attestation_digest) w.bytes(tlv::kExtAttestationDigest, *x.attestation_digest);
    if (x.service_zone_state) w.text(tlv::kExtServiceZoneState, *x.service_zone_state);
    if (x.device_binding) w.bytes(tlv::kExtDeviceBinding, *x.device_binding);
    if (x.path_len != 0) w.u32(tlv::kExtPathLen, x.path_len);
    return w.move();
}

inline Extensions decode_extensions(ByteView data) {
    tlv::Reader r(data);
    Extensions x;
    x.hybrid_required = r.boolean(tlv::kExtHybridRequired);
    if (r.next_is(tlv::kExtAttestationDigest)) {
        x.attestation_digest = r.bytes(tlv::kExtAttestationDigest);
        if (x.attestation_digest->size() != 32)
            throw DecodeError("attestation digest must be 32 bytes");
    }
    if (r.next_is(tlv::kExtServiceZoneState))
        x.service_zone_state = r.text(tlv::kExtServiceZoneState);
    if (r.next_is(tlv::kExtDeviceBinding))
        x.device_binding = r.bytes(tlv::kExtDeviceBinding);
    if (r.next_is(tlv::kExtPathLen)) {
        x.path_len = r.u32(tlv::kExtPathLen);
        if (x.path_len == 0) throw DecodeError("zero path length must be omitted");
    }
    r.expect_done();
    return x;
}

// To-be-signed body: everything except the signatures.
inline Bytes certificate_canonical_body(const Certificate& c) {
    tlv::Writer w;
    w.u32(tlv::kCertVersion, c.version);
    w.bytes(tlv::kCertSerial, c.serial);
    w.nested(tlv::kCertIssuer, encode_subject(c.issuer));
    w.nested(tlv::kCertSubject, encode_subject(c.subject));
    w.u64(tlv::kCertNotBefore, c.not_before);
    w.u64(tlv::kCertNotAfter, c.not_after);
    for (const auto& e : c.public_keys)
        w.nested(tlv::kCertKeyEntry, encode_key_entry(e));
    w.nested(tlv::kCertExtensions, encode_extensions(c.extensions));
    return w.move();
}

inline Bytes encode_certificate(const Certificate& c) {
    tlv::Writer w;
    Bytes body = certificate_canonical_body(c);
    for (const auto& s : c.signatures)
        w.nested(tlv::kCertSignature, sig::encode_signature(s));
    append(body, w.take());
    return tlv::wrap(tlv::kCertificate, body);
}

inline Certificate decode_certificate(ByteView data) {
    const ByteView body = tlv::unwrap(tlv::kCertificate, data);
    tlv::Reader r(body);
    Certificate c;
    c.version = r.u32(tlv::kCertVersion);
    if (c.version != 1) throw DecodeError("unsupported certificate version");
    c.serial = r.bytes(tlv::kCertSerial);
    if (c.serial.size() != 16) throw DecodeError("certificate serial must be 16 bytes");
    c.issuer = decode_subject(r.value(tlv::kCertIssuer));
    c.subject = decode_subject(r.value(tlv::kCertSubject));
    c.not_before = r.u64(tlv::kCertNotBefore);
    c.not_after = r.u64(tlv::kCertNotAfter);
    while (r.next_is(tlv::kCertKeyEntry))
        c.public_keys.push_back(decode_key_entry(r.value(tlv::kCertKeyEntry)));
    c.extensions = decode_extensions(r.value(tlv::kCertExtensions));
    while (r.next_is(tlv::kCertSignature))
        c.signatures.push_back(sig::decode_signature(r.value(tlv::kCertSignature)));
    r.expect_done();
    if (c.not_before >= c.not_after)
        throw DecodeError("certificate validity window is empty");
    if (c.extensions.hybrid_required) {
        bool has_pq = false;
        for (const auto& e : c.public_keys)
            if (!sig::quantum_vulnerable(e.descriptor)) has_pq = true;
        if (!has_pq)
            throw DecodeError(
                "hybrid-required certificate lists no quantum-resistant key");
    }
    return c;
}

inline Bytes attestation_canonical_body(const AttestationEvidence& a) {
    tlv::Writer w;
    for (const auto& id : a.hardware_ids) w.text(tlv::kAttHardwareId, id);
    for (const auto& id : a.peripheral_ids) w.text(tlv::kAttPeripheralId, id);
    w.bytes(tlv::kAttNonce, a.nonce);
    return w.move();
}

inline Bytes encode_attestation(const AttestationEvidence& a) {
    Bytes body = attestation_canonical_body(a);
    if (a.tee_signature) {
        tlv::Writer w;
        w.nested(tlv::kAttTeeSignature, sig::encode_signature(*a.tee_signature));
        append(body, w.take());
    }
    return body;
}

inline AttestationEvidence decode_attestation(ByteView data) {
    tlv::Reader r(data);
    AttestationEvidence a;
    while (r.next_is(tlv::kAttHardwareId))
        a.hardware_ids.push_back(r.text(tlv::kAttHardwareId));
    while (r.next_is(tlv::kAttPeripheralId))
        a.peripheral_ids.push_back(r.text(tlv::kAttPeripheralId));
    a.nonce = r.bytes(tlv::kAttNonce);
    if (a.nonce.size() != 32) throw DecodeError("attestation nonce must be 32 bytes");
    if (r.next_is(tlv::kAttTeeSignature))
        a.tee_signature = sig::decode_signature(r.value(tlv::kAttTeeSignature));
    r.expect_done();
    return a;
}

// To-be-signed body for proofs of possession: subject, keys, and the full
// attestation evidence (including its TEE signature, which the proofs endorse).
inline Bytes csr_canonical_body(const Csr& c) {
    tlv::Writer w;
    w.nested(tlv::kCsrSubject, encode_subject(c.subject));
    for (const auto& e : c.public_keys)
        w.nested(tlv::kCsrKeyEntry, encode_key_entry(e));
    if (c.attestation)
        w.nested(tlv::kCsrAttestation, encode_attestation(*c.attestation));
    return w.move();
}

inline Bytes encode_csr(const Csr& c) {
    Bytes body = csr_canonical_body(c);
    tlv::Writer w;
    for (const auto& p : c.proofs)
        w.nested(tlv::kCsrProof, sig::encode_signature(p));
    append(body, w.take());
    return tlv::wrap(tlv::kCsr, body);
}

inline Csr decode_csr(ByteView data) {
    const ByteView body = tlv::unwrap(tlv::kCsr, data);
    tlv::Reader r(body);
    Csr c;
    c.subject = decode_subject(r.value(tlv::kCsrSubject));
    while (r.next_is(tlv::kCsrKeyEntry))
        c.public_keys.push_back(decode_key_entry(r.value(tlv::kCsrKeyEntry)));
    if (r.next_is(tlv::kCsrAttestation))
        c.attestation = decode_attestation(r.value(tlv::kCsrAttestation));
    while (r.next_is(tlv::kCsrProof))
        c.proofs.push_back(sig::decode_signature(r.value(tlv::kCsrProof)));
    r.expect_done();
    return c;
}

inline Bytes encode_revocation_entry(const RevocationEntry& e) {
    tlv::Writer w;
    if (const auto* s = std::get_if<SerialScope>(&e.scope))
        w.bytes(tlv::kRevScopeSerial, s->serial);
    else if (const auto* m = std::get_if<DeviceModelScope>(&e.scope))
        w.text(tlv::kRevScopeDeviceModel, m->model);
    else
        w.nested(tlv::kRevScopeCa, encode_subject(std::get<CaScope>(e.scope).ca));
    w.u8(tlv::kRevReason, static_cast<std::uint8_t>(e.reason));
    w.u64(tlv::kRevRevokedAt, e.revoked_at);
    return w.move();
}

inline RevocationEntry decode_revocation_entry(ByteView data) {
    tlv::Reader r(data);
    RevocationEntry e;
    if (r.next_is(tlv::kRevScopeSerial)) {
        SerialScope s;
        s.serial = r.bytes(tlv::kRevScopeSerial);
        if (s.serial.size() != 16) throw DecodeError("scope serial must be 16 bytes");
        e.scope = std::move(s);
    } else if (r.next_is(tlv::kRevScopeDeviceModel)) {
        e.scope = DeviceModelScope{r.text(tlv::kRevScopeDeviceModel)};
    } else {
        e.scope = CaScope{decode_subject(r.value(tlv::kRevScopeCa))};
    }
    const std::uint8_t reason = r.u8(tlv::kRevReason);
    if (reason < 1 || reason > 3) throw DecodeError("unknown revocation reason");
    e.reason = static_cast<RevocationReason>(reason);
    e.revoked_at = r.u64(tlv::kRevRevokedAt);
    r.expect_done();
    return e;
}

inline Bytes revocation_list_canonical_body(const RevocationList& rl) {
    tlv::Writer w;
    w.u64(tlv::kRlVersion, rl.version);
    w.u64(tlv::kRlIssuedAt, rl.issued_at);
    for (const auto& e : rl.entries)
        w.nested(tlv::kRlEntry, encode_revocation_entry(e));
    w.nested(tlv::kRlIssuer, encode_subject(rl.issuer));
    return w.move();
}

inline Bytes encode_revocation_list(const RevocationList& rl) {
    Bytes body = revocation_list_canonical_body(rl);
    if (rl.signature) {
        tlv::Writer w;
        w.nested(tlv::kRlSignature, sig::encode_signature(*rl.signature));
        append(body, w.take());
    }
    return tlv::wrap(tlv::kRevocationList, body);
}

inline RevocationList decode_revocation_list(ByteView data) {
    const ByteView body = tlv::unwrap(tlv::kRevocationList, data);
    tlv::Reader r(body);
    RevocationList rl;
    rl.version = r.u64(tlv::kRlVersion);
    rl.issued_at = r.u64(tlv::kRlIssuedAt);
    while (r.next_is(tlv::kRlEntry))
        rl.entries.push_back(decode_revocation_entry(r.value(tlv::kRlEntry)));
    rl.issuer = decode_subject(r.value(tlv::kRlIssuer));
    if (r.next_is(tlv::kRlSignature))
        rl.signature = sig::decode_signature(r.value(tlv::kRlSignature));
    r.expect_done();
    return rl;
}

// Pin digest: hash of the full encoding, signatures included, so a pinned
// certificate cannot be re-signed without detection.
inline Bytes pin_digest(const Certificate& c) {
    return sha256(encode_certificate(c));
}

// --- key entries and signature checks -------------------------------------------

// One entry per concrete key: hybrids contribute their two inner keys as
// separate entries so relying parties can verify each component.
inline std::vector<PublicKeyEntry> key_entries_for(const sig::KeyPair& kp,
                                                   KeyUsage usage) {
    std::vector<PublicKeyEntry> out;
    if (kp.descriptor.scheme_id == sig::SchemeId::kHybrid) {
        for (const auto& in : kp.inner)
            out.push_back(PublicKeyEntry{in.descriptor, in.public_key, usage});
    } else {
        out.push_back(PublicKeyEntry{kp.descriptor, kp.public_key, usage});
    }
    return out;
}

struct SignatureCheck {
    bool valid = false;
    // True when the verified signature includes a component under a
    // quantum-resistant key; the downgrade rule keys off this.
    bool pq_backed = false;
};

// Tries to verify `sv` over `message` with any compatible combination of the
// given entries.  Hybrid signatures verify AND-composed: both components
// must hold.  Malformed payloads count as failed, not as errors; the caller
// is evaluating untrusted input.
inline SignatureCheck verify_against_entries(const std::vector<PublicKeyEntry>& entries,
                                             ByteView message,
                                             const sig::SignatureValue& sv) {
    SignatureCheck out;
    if (sv.scheme_id != sig::SchemeId::kHybrid) {
        for (const auto& e : entries) {
            if (e.descriptor.scheme_id != sv.scheme_id) continue;
            try {
                if (sig::verify(e.key_bytes, e.descriptor, message, sv)) {
                    out.valid = true;
                    out.pq_backed = !sig::quantum_vulnerable(e.descriptor);
                    return out;
                }
            } catch (const DecodeError&) {
            } catch (const ParameterError&) {
            }
        }
        return out;
    }
    if (sv.components.size() != 2) return out;
    for (const auto& legacy : entries) {
        if (legacy.descriptor.scheme_id != sv.components[0].scheme_id) continue;
        for (const auto& pq : entries) {
            if (pq.descriptor.scheme_id != sv.components[1].scheme_id) continue;
            if (&pq == &legacy) continue;
            sig::SchemeDescriptor composite;
            composite.scheme_id = sig::SchemeId::kHybrid;
            composite.inner = {legacy.descriptor, pq.descriptor};
            tlv::Writer w;
            w.bytes(tlv::kKpPublic, legacy.key_bytes);
            w.bytes(tlv::kKpPublic, pq.key_bytes);
            const Bytes composite_public = w.move();
            try {
                if (sig::verify(composite_public, composite, message, sv,
                                sig::VerifyMode::kRequireBoth)) {
                    out.valid = true;
                    out.pq_backed = !sig::quantum_vulnerable(pq.descriptor);
                    return out;
                }
            } catch (const DecodeError&) {
            } catch (const ParameterError&) {
            }
        }
    }
    return out;
}

inline std::vector<PublicKeyEntry> entries_with_usage(const Certificate& c,
                                                      KeyUsage usage) {
    std::vector<PublicKeyEntry> out;
    for (const auto& e : c.public_keys)
        if (e.usage == usage) out.push_back(e);
    return out;
}

// Best signature check for `candidate` under the issuer's cert-signing keys.
inline SignatureCheck check_issued_by(const Certificate& candidate,
                                      const Certificate& issuer) {
    const auto signing = entries_with_usage(issuer, KeyUsage::kSignCerts);
    const Bytes body = certificate_canonical_body(candidate);
    SignatureCheck best;
    for (const auto& sv : candidate.signatures) {
        const SignatureCheck c = verify_against_entries(signing, body, sv);
        if (c.valid && (!best.valid || (c.pq_backed && !best.pq_backed))) best = c;
        if (best.valid && best.pq_backed) break;
    }
    return best;
}

inline bool is_self_signed(const Certificate& c) { return c.issuer == c.subject; }

// --- revocation matching ----------------------------------------------------------

inline bool is_revoked(const Certificate& c, const RevocationList& rl) {
    for (const auto& e : rl.entries) {
        if (const auto* s = std::get_if<SerialScope>(&e.scope)) {
            if (s->serial == c.serial) return true;
        } else if (const auto* m = std::get_if<DeviceModelScope>(&e.scope)) {
            if (!c.subject.device_model.empty() && c.subject.device_model == m->model)
                return true;
        } else {
            if (c.issuer == std::get<CaScope>(e.scope).ca) return true;
        }
    }
    return false;
}

// --- chain validation ---------------------------------------------------------------

struct ValidationPolicy {
    std::uint64_t evaluation_time = 0;
    std::size_t max_chain_length = 4;
    bool require_hybrid = false;  // demand quantum-resistant backing everywhere
    std::vector<Certificate> anchors;
    std::optional<RevocationList> revocation;
    // When non-empty, the pin digest of the trust root must be listed here.
    std::set<Bytes> pinned_digests;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    bool ok = false;
    std::vector<CheckResult> checks;

    const CheckResult* find(std::string_view name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {

inline std::string cert_label(const Certificate& c, std::size_t index) {
    return "#" + std::to_string(index) + " (" + c.subject.common_name + ")";
}

}  // namespace detail

// Validates `chain` ordered leaf first.  The last element may be the trust
// root itself or a certificate issued directly by one of the policy anchors.
// Every check runs; the report lists each outcome so a failure names the
// rule it broke.
inline ValidationReport validate_chain(const std::vector<Certificate>& chain,
                                       const ValidationPolicy& policy) {
    ValidationReport report;
    auto add = [&report](std::string name, bool passed, std::string detail) {
        report.checks.push_back({std::move(name), passed, std::move(detail)});
    };

    // structure
    {
        bool ok = !chain.empty();
        std::string detail = ok ? "" : "empty chain";
        for (std::size_t i = 0; ok && i < chain.size(); ++i) {
            const Certificate& c = chain[i];
            if (c.version != 1) {
                ok = false;
                detail = detail::cert_label(c, i) + ": unsupported version";
            } else if (c.serial.size() != 16) {
                ok = false;
                detail = detail::cert_label(c, i) + ": malformed serial";
            } else if (c.public_keys.empty()) {
                ok = false;
                detail = detail::cert_label(c, i) + ": no public keys";
            } else if (c.not_before >= c.not_after) {
                ok = false;
                detail = detail::cert_label(c, i) + ": empty validity window";
            } else if (c.subject.common_name.empty() || c.issuer.common_name.empty()) {
                ok = false;
                detail = detail::cert_label(c, i) + ": unnamed subject or issuer";
            } else if (c.signatures.empty()) {
                ok = false;
                detail = detail::cert_label(c, i) + ": unsigned";
            } else if (c.extensions.hybrid_required) {
                bool has_pq = false;
                for (const auto& e : c.public_keys)
                    if (!sig::quantum_vulnerable(e.descriptor)) has_pq = true;
                if (!has_pq) {
                    ok = false;
                    detail = detail::cert_label(c, i) +
                             ": hybrid required without a quantum-resistant key";
                }
            }
        }
        add("structure", ok, detail);
        if (!ok) {
            report.ok = false;
            return report;
        }
    }

    // chain-length
    add("chain-length", chain.size() <= policy.max_chain_length,
        chain.size() <= policy.max_chain_length
            ? ""
            : "chain of " + std::to_string(chain.size()) + " exceeds limit of " +
                  std::to_string(policy.max_chain_length));

    // time
    {
        bool ok = true;
        std::string detail;
        for (std::size_t i = 0; i < chain.size(); ++i) {
            const Certificate& c = chain[i];
            if (policy.evaluation_time < c.not_before) {
                ok = false;
                detail = detail::cert_label(c, i) + ": not yet valid";
                break;
            }
            if (policy.evaluation_time >= c.not_after) {
                ok = false;
                detail = detail::cert_label(c, i) + ": expired";
                break;
            }
        }
        add("time", ok, detail);
    }

    // signatures + anchor resolution
    const Certificate* trust_root = nullptr;
    std::vector<SignatureCheck> link_checks(chain.size());
    {
        bool ok = true;
        std::string detail;
        for (std::size_t i = 0; ok && i + 1 < chain.size(); ++i) {
            link_checks[i] = check_issued_by(chain[i], chain[i + 1]);
            if (!link_checks[i].valid) {
                ok = false;
                detail = detail::cert_label(chain[i], i) +
                         ": signature does not verify under " +
                         detail::cert_label(chain[i + 1], i + 1);
            }
        }
        if (ok) {
            const std::size_t last = chain.size() - 1;
            const Certificate& tail = chain[last];
            if (is_self_signed(tail)) {
                link_checks[last] = check_issued_by(tail, tail);
                if (!link_checks[last].valid) {
                    ok = false;
                    detail = detail::cert_label(tail, last) +
                             ": self-signature does not verify";
                } else {
                    trust_root = &tail;
                }
            } else {
                for (const Certificate& anchor : policy.anchors) {
                    const SignatureCheck c = check_issued_by(tail, anchor);
                    if (c.valid) {
                        link_checks[last] = c;
                        trust_root = &anchor;
                        break;
                    }
                }
                if (trust_root == nullptr) {
                    ok = false;
                    detail = detail::cert_label(tail, last) +
                             ": no anchor signs the chain tail";
                }
            }
        }
        add("signatures", ok, detail);
    }

    // anchor: the trust root itself must be one of the configured anchors.
    {
        bool ok = false;
        std::string detail;
        if (policy.anchors.empty()) {
            detail = "no trust anchors configured";
        } else if (trust_root == nullptr) {
            detail = "chain does not reach a trust root";
        } else {
            const Bytes root_pin = pin_digest(*trust_root);
            for (const Certificate& anchor : policy.anchors) {
                if (pin_digest(anchor) == root_pin) {
                    ok = true;
                    break;
                }
            }
            if (!ok) detail = "trust root is not a configured anchor";
        }
        add("anchor", ok, detail);
    }

    // path-length: a certificate at height i must be allowed to carry i
    // levels beneath it.
    {
        bool ok = true;
        std::string detail;
        for (std::size_t i = 1; i < chain.size(); ++i) {
            if (chain[i].extensions.path_len < i) {
                ok = false;
                detail = detail::cert_label(chain[i], i) + ": path length " +
                         std::to_string(chain[i].extensions.path_len) +
                         " cannot carry " + std::to_string(i) + " levels";
                break;
            }
        }
        add("path-length", ok, detail);
    }

    // downgrade: hybrid-required certificates must verify with a
    // quantum-resistant component; a valid legacy-only signature is a
    // downgrade, not a pass.
    {
        bool ok = true;
        std::string detail;
        for (std::size_t i = 0; i < chain.size(); ++i) {
            const bool demanded =
                chain[i].extensions.hybrid_required || policy.require_hybrid;
            if (!demanded) continue;
            if (!link_checks[i].valid) continue;  // signature check already failed
            if (!link_checks[i].pq_backed) {
                ok = false;
                detail = detail::cert_label(chain[i], i) +
                         ": accepted signature lacks a quantum-resistant component";
                break;
            }
        }
        add("downgrade", ok, detail);
    }

    // revocation: a present list must be root-signed; unverifiable lists
    // fail closed.
    {
        bool ok = true;
        std::string detail;
        if (policy.revocation) {
            const RevocationList& rl = *policy.revocation;
            bool rl_trusted = false;
            if (rl.signature) {
                const Bytes body = revocation_list_canonical_body(rl);
                for (const Certificate& anchor : policy.anchors) {
                    const auto signing = entries_with_usage(anchor, KeyUsage::kSignCerts);
                    if (verify_against_entries(signing, body, *rl.signature).valid) {
                        rl_trusted = true;
                        break;
                    }
                }
            }
            if (!rl_trusted) {
                ok = false;
                detail = "revocation list is not signed by a trust anchor";
            } else {
                for (std::size_t i = 0; ok && i < chain.size(); ++i) {
                    if (is_revoked(chain[i], rl)) {
                        ok = false;
                        detail = detail::cert_label(chain[i], i) + ": revoked";
                    }
                }
            }
        }
        add("revocation", ok, detail);
    }

    // pinning
    {
        bool ok = true;
        std::string detail;
        if (!policy.pinned_digests.empty()) {
            if (trust_root == nullptr) {
                ok = false;
                detail = "no trust root to compare against the pin set";
            } else if (policy.pinned_digests.count(pin_digest(*trust_root)) == 0) {
                ok = false;
                detail = "trust root digest is not pinned";
            }
        }
        add("pinning", ok, detail);
    }

    report.ok = true;
    for (const auto& c : report.checks) report.ok = report.ok && c.passed;
    return report;
}

// --- issuance -------------------------------------------------------------------

// Append-only issuance record. Attach a file to persist entries across
// processes; the journal then replays existing lines and appends new ones.
// Serials are derived from a per-instance nonce and a monotone counter, so
// one instance never repeats itself; record() additionally refuses serials
// already on file, which guards the cross-instance case.
class IssuanceJournal {
public:
    struct Entry {
        Bytes serial;
        SubjectInfo subject;
        std::uint64_t not_after = 0;
    };

    explicit IssuanceJournal(Bytes nonce16) : nonce_(std::move(nonce16)) {
        if (nonce_.size() != 16)
            throw ParameterError("journal nonce must be 16 bytes");
    }

    explicit IssuanceJournal(SeedRng& rng) : IssuanceJournal(rng.bytes(16)) {}

    void attach_file(const std::string& path) {
        std::lock_guard<std::mutex> lock(*mu_);
        path_ = path;
        std::string text;
        try {
            text = read_text_file(path);
        } catch (const IoError&) {
            write_text_file(path, "");
            return;
        }
        entries_.clear();
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string::npos) nl = text.size();
            const std::string line = text.substr(pos, nl - pos);
            pos = nl + 1;
            if (line.empty()) continue;
            entries_.push_back(decode_entry(base64_decode(line)));
        }
        counter_ = entries_.size();
    }

    // Unique, unpredictable-but-deterministic 16-byte serial.
    Bytes next_serial() {
        std::lock_guard<std::mutex> lock(*mu_);
        return serial_for(counter_++);
    }

    void record(Bytes serial, SubjectInfo subject, std::uint64_t not_after) {
        std::lock_guard<std::mutex> lock(*mu_);
        for (const auto& e : entries_)
            if (e.serial == serial)
                throw ParameterError("journal already holds this serial");
        Entry e{std::move(serial), std::move(subject), not_after};
        if (!path_.empty()) {
            std::string text = read_text_file(path_);
            text += base64_encode(encode_entry(e));
            text += '\n';
            write_text_file(path_, text);
        }
        entries_.push_back(std::move(e));
    }

    bool contains(ByteView serial) const {
        std::lock_guard<std::mutex> lock(*mu_);
        for (const auto& e : entries_)
            if (equal_bytes(e.serial, serial)) return true;
        return false;
    }

    std::vector<Entry> entries() const {
        std::lock_guard<std::mutex> lock(*mu_);
        return entries_;
    }

private:
    Bytes serial_for(std::uint64_t counter) const {
        const Bytes c = u64be_bytes(counter);
        return labeled_hash("pqpki.journal.serial", {ByteView(nonce_), ByteView(c)},
                            16);
    }

    static Bytes encode_entry(const Entry& e) {
        tlv::Writer w;
        w.bytes(tlv::kJournalSerial, e.serial);
        w.nested(tlv::kJournalSubject, encode_subject(e.subject));
        w.u64(tlv::kJournalNotAfter, e.not_after);
        return tlv::wrap(tlv::kJournalEntry, w.take());
    }

    static Entry decode_entry(ByteView data) {
        const ByteView body = tlv::unwrap(tlv::kJournalEntry, data);
        tlv::Reader r(body);
        Entry e;
        e.serial = r.bytes(tlv::kJournalSerial);
        if (e.serial.size() != 16) throw DecodeError("journal serial must be 16 bytes");
        e.subject = decode_subject(r.value(tlv::kJournalSubject));
        e.not_after = r.u64(tlv::kJournalNotAfter);
        r.expect_done();
        return e;
    }

    // Held through a pointer so journals stay movable.
    mutable std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
    Bytes nonce_;
    std::uint64_t counter_ = 0;
    std::vector<Entry> entries_;
    std::string path_;
};

struct IssueProfile {
    std::uint64_t issued_at = 0;
    std::uint64_t ttl_seconds = 0;
    bool hybrid_required = false;
    // When set, overrides the usage of every issued key entry.
    std::optional<KeyUsage> usage_override;
    std::uint32_t path_len = 0;
    std::optional<std::string> service_zone_state;
};

inline Bytes device_binding_digest(const std::string& serial_number) {
    return labeled_hash("pqpki.device-binding", {ByteView(to_bytes(serial_number))});
}

// Checks that `ca_keys` is the key pair the CA certificate binds for
// certificate signing.
inline bool cert_binds_signing_key(const Certificate& ca_cert,
                                   const sig::KeyPair& ca_keys) {
    const auto wanted = key_entries_for(ca_keys, KeyUsage::kSignCerts);
    const auto have = entries_with_usage(ca_cert, KeyUsage::kSignCerts);
    for (const auto& w : wanted) {
        bool found = false;
        for (const auto& h : have)
            if (h.descriptor == w.descriptor && h.key_bytes == w.key_bytes)
                found = true;
        if (!found) return false;
    }
    return true;
}

// Issues a certificate over an approved CSR.  The CA certificate must be
// current, must be entitled to carry subordinates (path length), and must
// bind the signing key pair; the CSR must prove possession of every listed
// key over its canonical body.
inline Certificate issue_certificate(sig::KeyPair& ca_keys,
                                     const Certificate& ca_cert, const Csr& csr,
                                     const IssueProfile& profile,
                                     IssuanceJournal& journal) {
    if (profile.ttl_seconds == 0)
        throw ParameterError("certificate lifetime must be positive");
    if (profile.issued_at < ca_cert.not_before ||
        profile.issued_at >= ca_cert.not_after)
        throw CaIneligible("issuing certificate is not currently valid");
    if (ca_cert.extensions.path_len < 1)
        throw CaIneligible("issuing certificate cannot carry subordinates");
    if (profile.path_len >= ca_cert.extensions.path_len)
        throw CaIneligible("requested path length exceeds the issuer's");
    if (!cert_binds_signing_key(ca_cert, ca_keys))
        throw CaIneligible("signing key is not bound by the issuing certificate");

    try {
        validate_subject(csr.subject);
    } catch (const ParameterError& e) {
        throw CsrInvalid(e.what());
    }
    if (csr.public_keys.empty()) throw CsrInvalid("request lists no keys");
    if (csr.proofs.size() != csr.public_keys.size())
        throw CsrInvalid("request needs one possession proof per key");
    const Bytes body = csr_canonical_body(csr);
    for (std::size_t i = 0; i < csr.public_keys.size(); ++i) {
        const auto& entry = csr.public_keys[i];
        bool ok = false;
        try {
            ok = sig::verify(entry.key_bytes, entry.descriptor, body, csr.proofs[i]);
        } catch (const DecodeError&) {
        } catch (const ParameterError&) {
        }
        if (!ok)
            throw CsrInvalid("possession proof " + std::to_string(i) +
                             " does not verify");
    }
    if (profile.hybrid_required) {
        bool has_pq = false;
        for (const auto& e : csr.public_keys)
            if (!sig::quantum_vulnerable(e.descriptor)) has_pq = true;
        if (!has_pq)
            throw CsrInvalid("hybrid policy requires a quantum-resistant key");
    }

    Certificate cert;
    cert.version = 1;
    cert.serial = journal.next_serial();
    cert.issuer = ca_cert.subject;
    cert.subject = csr.subject;
    cert.not_before = profile.issued_at;
    cert.not_after = profile.issued_at + profile.ttl_seconds;
    cert.public_keys = csr.public_keys;
    if (profile.usage_override)
        for (auto& e : cert.public_keys) e.usage = *profile.usage_override;
    cert.extensions.hybrid_required = profile.hybrid_required;
    cert.extensions.path_len = profile.path_len;
    cert.extensions.service_zone_state = profile.service_zone_state;
    if (csr.attestation)
        cert.extensions.attestation_digest =
            sha256(attestation_canonical_body(*csr.attestation));
    if (cert.subject.role == Role::kDevice && !cert.subject.serial_number.empty())
        cert.extensions.device_binding =
            device_binding_digest(cert.subject.serial_number);

    cert.signatures.push_back(sig::sign(ca_keys, certificate_canonical_body(cert)));
    journal.record(cert.serial, cert.subject, cert.not_after);
    return cert;
}

// Root certificates are self-signed, carry the full issuing depth, and are
// reserved for the maintainer role.
inline Certificate self_sign_root(sig::KeyPair& keys, const SubjectInfo& subject,
                                  std::uint64_t issued_at, std::uint64_t ttl_seconds,
                                  IssuanceJournal& journal) {
    if (subject.role != Role::kMaintainer)
        throw ParameterError("only the maintainer role may hold a root");
    validate_subject(subject);
    if (ttl_seconds == 0) throw ParameterError("root lifetime must be positive");
    Certificate cert;
    cert.version = 1;
    cert.serial = journal.next_serial();
    cert.issuer = subject;
    cert.subject = subject;
    cert.not_before = issued_at;
    cert.not_after = issued_at + ttl_seconds;
    cert.public_keys = key_entries_for(keys, KeyUsage::kSignCerts);
    cert.extensions.hybrid_required =
        keys.descriptor.scheme_id == sig::SchemeId::kHybrid;
    cert.extensions.path_len = 2;
    cert.signatures.push_back(sig::sign(keys, certificate_canonical_body(cert)));
    journal.record(cert.serial, cert.subject, cert.not_after);
    return cert;
}

// Armored text forms.
inline std::string armor_certificate(const Certificate& c) {
    return armor("CERTIFICATE", encode_certificate(c));
}
inline Certificate dearmor_certificate(std::string_view text) {
    return decode_certificate(dearmor("CERTIFICATE", text));
}
inline std::string armor_csr(const Csr& c) { return armor("CSR", encode_csr(c)); }
inline Csr dearmor_csr(std::string_view text) {
    return decode_csr(dearmor("CSR", text));
}
inline std::string armor_revocation_list(const RevocationList& rl) {
    return armor("REVOCATION LIST", encode_revocation_list(rl));
}
inline RevocationList dearmor_revocation_list(std::string_view text) {
    return decode_revocation_list(dearmor("REVOCATION LIST", text));
}

}  // namespace pqpki::cert

#endif
