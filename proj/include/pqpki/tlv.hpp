#ifndef PQPKI_TLV_HPP
#define PQPKI_TLV_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pqpki/bytes.hpp"
#include "pqpki/errors.hpp"

namespace pqpki::tlv {

// Wire format: tag (1 byte) || length (4 bytes big-endian) || value.
//
// Canonical encoding rules, shared by every serialized structure:
//   - within a structure, fields are written in ascending tag order;
//   - repeated fields share one tag and keep list order;
//   - optional fields are omitted entirely when absent;
//   - integers are fixed-width big-endian (u32 or u64), booleans one byte.
// A strict reader enforces the ordering, so decode(encode(x)) re-encodes
// byte-identically.
//
// Tag registry
// ============
// Top-level containers
//   0x01 KEYPAIR            0x02 PUBLIC_KEY_BUNDLE   0x03 SIGNATURE
//   0x04 CERTIFICATE        0x05 CSR                 0x06 REVOCATION_LIST
//   0x07 FIRMWARE_BUNDLE    0x08 CHANNEL_MESSAGE     0x09 ATTACK_REPORT
//   0x0A CREDENTIAL_RECORD  0x0B INJECTION_REPORT    0x0C JOURNAL_ENTRY
//   0x0D ATTESTATION        0x0E TOKEN_APPROVAL      0x0F WRAPPED_KEY
//   0x1E SESSION_TOKEN
// SchemeDescriptor fields
//   0x10 SCHEME_ID(u8)      0x11 DISPLAY_NAME(text)  0x12 PARAMS(struct)
//   0x13 INNER_DESCRIPTOR(struct, x2 for hybrid)
// SchemeParams fields
//   0x20 N(u32)  0x21 W(u32)  0x22 H(u32)  0x23 PRIME_P(u64)
//   0x24 ORDER_Q(u64)  0x25 GEN_G(u64)
// KeyPair fields
//   0x30 DESCRIPTOR  0x31 PUBLIC(bytes)  0x32 PRIVATE(bytes)
//   0x33 SIGNER_STATE(u64)  0x34 INNER_KEYPAIR(struct, x2 for hybrid)
// SignatureValue fields
//   0x40 SCHEME_ID(u8)  0x41 PAYLOAD(bytes)  0x42 LEAF_INDEX(u64)
//   0x43 COMPONENT(struct, x2: legacy first, post-quantum second)
// SubjectInfo fields
//   0x50 COMMON_NAME  0x51 ROLE(u8)  0x52 DEVICE_MODEL  0x53 SERIAL_NUMBER
// PublicKeyEntry fields
//   0x58 ENTRY_DESCRIPTOR  0x59 KEY_BYTES  0x5A USAGE(u8)
// Certificate fields
//   0x60 VERSION(u32)  0x61 CERT_SERIAL(16B)  0x62 ISSUER  0x63 SUBJECT
//   0x64 NOT_BEFORE(u64)  0x65 NOT_AFTER(u64)  0x66 PUBLIC_KEY_ENTRY(rep)
//   0x67 EXTENSIONS  0x68 CERT_SIGNATURE(rep; excluded from the canonical
//        to-be-signed body, included in the pin digest)
// Extension fields
//   0x70 HYBRID_REQUIRED(bool)  0x71 ATTESTATION_DIGEST(32B)
//   0x72 SERVICE_ZONE_STATE(text)  0x73 DEVICE_BINDING(bytes)
//   0x74 PATH_LEN(u32)
// CSR fields
//   0x80 CSR_SUBJECT  0x81 CSR_KEY_ENTRY(rep)  0x82 CSR_ATTESTATION
//   0x83 PROOF_OF_POSSESSION(rep; excluded from the canonical body)
// AttestationEvidence fields
//   0x90 HARDWARE_ID(rep text)  0x91 PERIPHERAL_ID(rep text)
//   0x92 NONCE(32B)  0x93 TEE_SIGNATURE(struct; excluded from canonical body)
// RevocationEntry fields (exactly one of A0/A1/A2)
//   0xA0 SCOPE_SERIAL(16B)  0xA1 SCOPE_DEVICE_MODEL(text)
//   0xA2 SCOPE_CA(SubjectInfo)  0xA3 REASON(u8)  0xA4 REVOKED_AT(u64)
// RevocationList fields
//   0xA8 RL_VERSION(u64)  0xA9 RL_ISSUED_AT(u64)  0xAA RL_ENTRY(rep)
//   0xAB RL_ISSUER  0xAC RL_SIGNATURE(excluded from canonical body)
// ChannelMessage fields
//   0xB0 MSG_KIND(u8)  0xB1 SENDER(u8)  0xB2 RECEIVER(u8)
//   0xB3 SEQUENCE(u64)  0xB4 MSG_PAYLOAD  0xB5 INTEGRITY_TAG(32B)
// FirmwareBundle fields
//   0xB8 FIRMWARE_BLOB  0xB9 BUNDLE_RL(struct)  0xBA BUNDLE_SIGNATURE
// Credential / report / journal / token / wrap fields
//   0xC0 PARTY_ID  0xC1 SALT(16B)  0xC2 PASSWORD_HASH(32B)  0xC3 PARTY_ROLE(u8)
//   0xC8 REPORTER  0xC9 DEVICE_SERIAL  0xCA REPORT_CERT_SERIAL(16B)
//   0xCB REPORTED_AT(u64)
//   0xD0 JOURNAL_SERIAL(16B)  0xD1 JOURNAL_SUBJECT  0xD2 JOURNAL_NOT_AFTER(u64)
//   0xD8 REQUEST_DIGEST(32B)  0xD9 APPROVAL_SIGNATURE  0xDA TOKEN_PUBLIC
//   0xE0 WRAP_NONCE  0xE1 WRAP_EPHEMERAL(u64)  0xE2 WRAP_CIPHERTEXT
//   0xE3 WRAP_TAG(32B)
//   0xE8 TOKEN_PARTY  0xE9 TOKEN_ISSUED_AT(u64)  0xEA TOKEN_EXPIRES_AT(u64)
//   0xEB TOKEN_BYTES(32B)
// Enrollment payload bodies (inside sealed channel payloads)
//   0xF0 ENROLL_SUBJECT(struct)  0xF1 ENROLL_HARDWARE_ID(rep text)
//   0xF2 ENROLL_CHALLENGE(32B)  0xF3 ENROLL_CERTIFICATE(struct)
//   0xF4 ENROLL_CSR(struct)  0xF5 ENROLL_STATUS(u8)
// Channel handshake body (cleartext by design; the recorded exchange is
// what the store-now-decrypt-later attack consumes)
//   0xF8 HS_PRIME(u64)  0xF9 HS_GENERATOR(u64)  0xFA HS_ORDER(u64)
//   0xFB HS_PUBLIC(u64)

enum Tag : std::uint8_t {
    kKeyPair = 0x01,
    kPublicKeyBundle = 0x02,
    kSignature = 0x03,
    kCertificate = 0x04,
    kCsr = 0x05,
    kRevocationList = 0x06,
    kFirmwareBundle = 0x07,
    kChannelMessage = 0x08,
    kAttackReport = 0x09,
    kCredentialRecord = 0x0A,
    kInjectionReport = 0x0B,
    kJournalEntry = 0x0C,
    kAttestation = 0x0D,
    kTokenApproval = 0x0E,
    kWrappedKey = 0x0F,
    kSessionToken = 0x1E,

    kSchemeId = 0x10,
    kDisplayName = 0x11,
    kParams = 0x12,
    kInnerDescriptor = 0x13,

    kParamN = 0x20,
    kParamW = 0x21,
    kParamH = 0x22,
    kParamPrimeP = 0x23,
    kParamOrderQ = 0x24,
    kParamGenG = 0x25,

    kKpDescriptor = 0x30,
    kKpPublic = 0x31,
    kKpPrivate = 0x32,
    kKpSignerState = 0x33,
    kKpInner = 0x34,

    kSigSchemeId = 0x40,
    kSigPayload = 0x41,
    kSigLeafIndex = 0x42,
    kSigComponent = 0x43,

    kSubjCommonName = 0x50,
    kSubjRole = 0x51,
    kSubjDeviceModel = 0x52,
    kSubjSerialNumber = 0x53,

    kEntryDescriptor = 0x58,
    kEntryKeyBytes = 0x59,
    kEntryUsage = 0x5A,

    kCertVersion = 0x60,
    kCertSerial = 0x61,
    kCertIssuer = 0x62,
    kCertSubject = 0x63,
    kCertNotBefore = 0x64,
    kCertNotAfter = 0x65,
    kCertKeyEntry = 0x66,
    kCertExtensions = 0x67,
    kCertSignature = 0x68,

    kExtHybridRequired = 0x70,
    kExtAttestationDigest = 0x71,
    kExtServiceZoneState = 0x72,
    kExtDeviceBinding = 0x73,
    kExtPathLen = 0x74,

    kCsrSubject = 0x80,
    kCsrKeyEntry = 0x81,
    kCsrAttestation = 0x82,
    kCsrProof = 0x83,

    kAttHardwareId = 0x90,
    kAttPeripheralId = 0x91,
    kAttNonce = 0x92,
    kAttTeeSignature = 0x93,

    kRevScopeSerial = 0xA0,
    kRevScopeDeviceModel = 0xA1,
    kRevScopeCa = 0xA2,
    kRevReason = 0xA3,
    kRevRevokedAt = 0xA4,

    kRlVersion = 0xA8,
    kRlIssuedAt = 0xA9,
    kRlEntry = 0xAA,
    kRlIssuer = 0xAB,
    kRlSignature = 0xAC,

    kMsgKind = 0xB0,
    kMsgSender = 0xB1,
    kMsgReceiver = 0xB2,
    kMsgSequence = 0xB3,
    kMsgPayload = 0xB4,
    kMsgIntegrityTag = 0xB5,

    kBundleBlob = 0xB8,
    kBundleRl = 0xB9,
    kBundleSignature = 0xBA,

    kCredPartyId = 0xC0,
    kCredSalt = 0xC1,
    kCredPasswordHash = 0xC2,
    kCredRole = 0xC3,

    kReportReporter = 0xC8,
    kReportDeviceSerial = 0xC9,
    kReportCertSerial = 0xCA,
    kReportReportedAt = 0xCB,

    kJournalSerial = 0xD0,
    kJournalSubject = 0xD1,
    kJournalNotAfter = 0xD2,

    kApprovalRequestDigest = 0xD8,
    kApprovalSignature = 0xD9,
    kApprovalTokenPublic = 0xDA,

    kWrapNonce = 0xE0,
    kWrapEphemeral = 0xE1,
    kWrapCiphertext = 0xE2,
    kWrapTag = 0xE3,

    kTokenParty = 0xE8,
    kTokenIssuedAt = 0xE9,
    kTokenExpiresAt = 0xEA,
    kTokenBytes = 0xEB,

    kEnrollSubject = 0xF0,
    kEnrollHardwareId = 0xF1,
    kEnrollChallenge = 0xF2,
    kEnrollCertificate = 0xF3,
    kEnrollCsr = 0xF4,
    kEnrollStatus = 0xF5,

    kHsPrime = 0xF8,
    kHsGenerator = 0xF9,
    kHsOrder = 0xFA,
    kHsPublic = 0xFB,
};

class Writer {
public:
    void raw(std::uint8_t tag, ByteView value) {
        if (value.size() > 0xFFFFFFFFull) throw EncodeError("tlv: value too large");
        out_.push_back(tag);
        append_u32be(out_, static_cast<std::uint32_t>(value.size()));
        append(out_, value);
    }

    void bytes(std::uint8_t tag, const Bytes& value) { raw(tag, value); }
    void text(std::uint8_t tag, std::string_view value) {
        raw(tag, ByteView(reinterpret_cast<const std::uint8_t*>(value.data()), value.size()));
    }
    void u8(std::uint8_t tag, std::uint8_t value) { raw(tag, ByteView(&value, 1)); }
    void boolean(std::uint8_t tag, bool value) { u8(tag, value ? 1 : 0); }
    void u32(std::uint8_t tag, std::uint32_t value) { raw(tag, u32be_bytes(value)); }
    void u64(std::uint8_t tag, std::uint64_t value) { raw(tag, u64be_bytes(value)); }
    void nested(std::uint8_t tag, const Bytes& encoded) { raw(tag, encoded); }

    const Bytes& take() const { return out_; }
    Bytes move() { return std::move(out_); }

private:
    Bytes out_;
};

// Strict sequential reader. Tags must arrive in non-decreasing order and the
// caller must consume the record exactly; both guards make re-encoding a
// decoded value reproduce the input bytes.
class Reader {
public:
    explicit Reader(ByteView data) : data_(data) {}

    bool done() const { return pos_ == data_.size(); }

    std::uint8_t peek_tag() const {
        if (pos_ >= data_.size()) throw DecodeError("tlv: read past end");
        return data_[pos_];
    }

    bool next_is(std::uint8_t tag) const { return !done() && peek_tag() == tag; }

    ByteView value(std::uint8_t tag) {
        if (done()) throw DecodeError("tlv: missing field");
        std::uint8_t got = data_[pos_];
        if (got != tag) throw DecodeError("tlv: unexpected tag");
        if (got < last_tag_) throw DecodeError("tlv: non-canonical tag order");
        last_tag_ = got;
        if (pos_ + 5 > data_.size()) throw DecodeError("tlv: truncated header");
        std::uint32_t len = read_u32be(data_.subspan(pos_ + 1, 4));
        if (pos_ + 5 + len > data_.size()) throw DecodeError("tlv: truncated value");
        ByteView v = data_.subspan(pos_ + 5, len);
        pos_ += 5 + len;
        return v;
    }

    Bytes bytes(std::uint8_t tag) {
        auto v = value(tag);
        return Bytes(v.begin(), v.end());
    }

    std::string text(std::uint8_t tag) { return pqpki::to_string(value(tag)); }

    std::uint8_t u8(std::uint8_t tag) {
        auto v = value(tag);
        if (v.size() != 1) throw DecodeError("tlv: bad u8 length");
        return v[0];
    }

    bool boolean(std::uint8_t tag) {
        auto b = u8(tag);
        if (b > 1) throw DecodeError("tlv: bad boolean");
        return b == 1;
    }

    std::uint32_t u32(std::uint8_t tag) {
        auto v = value(tag);
        if (v.size() != 4) throw DecodeError("tlv: bad u32 length");
        return read_u32be(v);
    }

    std::uint64_t u64(std::uint8_t tag) {
        auto v = value(tag);
        if (v.size() != 8) throw DecodeError("tlv: bad u64 length");
        return read_u64be(v);
    }

    void expect_done() const {
        if (!done()) throw DecodeError("tlv: trailing bytes");
    }

private:
    ByteView data_;
    std::size_t pos_ = 0;
    std::uint8_t last_tag_ = 0;
};

// Unwraps one outer container record, checking the expected top-level tag.
inline ByteView unwrap(std::uint8_t tag, ByteView data) {
    Reader r(data);
    ByteView body = r.value(tag);
    r.expect_done();
    return body;
}

inline Bytes wrap(std::uint8_t tag, const Bytes& body) {
    Writer w;
    w.nested(tag, body);
    return w.move();
}

}  // namespace pqpki::tlv

#endif
