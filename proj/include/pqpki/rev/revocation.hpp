#ifndef PQPKI_REV_REVOCATION_HPP
#define PQPKI_REV_REVOCATION_HPP

// Revocation machinery on top of the certificate model: who may issue lists
// (access control), how consumers adopt them (monotone full replacement),
// how offline devices receive them (signed firmware bundles), and how a
// still-valid certificate can be traded for a fresh root-issued one
// (collapse).

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pqpki/cert/certmodel.hpp"
#include "pqpki/errors.hpp"
#include "pqpki/party.hpp"
#include "pqpki/tlv.hpp"

namespace pqpki::rev {

enum class Permission : std::uint8_t {
    kIssueRl = 1,
    kIssueCert = 2,
    kCollapseCert = 3,
    kReportInjection = 4,
};

inline const char* permission_name(Permission p) {
    switch (p) {
        case Permission::kIssueRl: return "ISSUE_RL";
        case Permission::kIssueCert: return "ISSUE_CERT";
        case Permission::kCollapseCert: return "COLLAPSE_CERT";
        case Permission::kReportInjection: return "REPORT_INJECTION";
    }
    return "UNKNOWN";
}

inline Permission permission_from_name(const std::string& name) {
    if (name == "ISSUE_RL") return Permission::kIssueRl;
    if (name == "ISSUE_CERT") return Permission::kIssueCert;
    if (name == "COLLAPSE_CERT") return Permission::kCollapseCert;
    if (name == "REPORT_INJECTION") return Permission::kReportInjection;
    throw ParameterError("unknown permission: " + name);
}

// Role-to-permission map. Revocation lists are a root power: granting
// ISSUE_RL to anyone but the maintainer is rejected at construction, so an
// ACL holding such a grant cannot exist.
class AccessControlList {
public:
    void grant(cert::Role role, Permission p) {
        if (p == Permission::kIssueRl && role != cert::Role::kMaintainer)
            throw ParameterError(
                "revocation lists may only be issued by the maintainer");
        perms_[role].insert(p);
    }

    bool allows(cert::Role role, Permission p) const {
        auto it = perms_.find(role);
        return it != perms_.end() && it->second.count(p) != 0;
    }

    // Default deployment policy.
    static AccessControlList standard() {
        AccessControlList acl;
        acl.grant(cert::Role::kMaintainer, Permission::kIssueRl);
        acl.grant(cert::Role::kMaintainer, Permission::kIssueCert);
        acl.grant(cert::Role::kMaintainer, Permission::kCollapseCert);
        acl.grant(cert::Role::kProductionLine, Permission::kIssueCert);
        acl.grant(cert::Role::kManufacturer, Permission::kReportInjection);
        acl.grant(cert::Role::kOperator, Permission::kReportInjection);
        return acl;
    }

    // Flat key=value text: one "role=PERM,PERM" line per role, sorted by
    // role, blank lines and #-comments ignored.
    std::string serialize() const {
        std::string out;
        for (const auto& [role, set] : perms_) {
            if (set.empty()) continue;
            out += cert::role_name(role);
            out += '=';
            bool first = true;
            for (Permission p : set) {
                if (!first) out += ',';
                out += permission_name(p);
                first = false;
            }
            out += '\n';
        }
        return out;
    }

    static AccessControlList parse(const std::string& text) {
        AccessControlList acl;
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string::npos) nl = text.size();
            std::string line = text.substr(pos, nl - pos);
            pos = nl + 1;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw DecodeError("access control line needs role=permissions");
            try {
                const cert::Role role = cert::role_from_name(line.substr(0, eq));
                std::size_t start = eq + 1;
                while (start <= line.size()) {
                    std::size_t comma = line.find(',', start);
                    if (comma == std::string::npos) comma = line.size();
                    const std::string item = line.substr(start, comma - start);
                    if (!item.empty())
                        acl.grant(role, permission_from_name(item));
                    start = comma + 1;
                }
            } catch (const ParameterError& e) {
                throw DecodeError(e.what());
            }
        }
        return acl;
    }

private:
    std::map<cert::Role, std::set<Permission>> perms_;
};

// --- issuing and verifying lists ---------------------------------------------------

inline bool verify_rl_signature(const cert::RevocationList& rl,
                                const cert::Certificate& root_cert) {
    if (!rl.signature) return false;
    const auto signing =
        cert::entries_with_usage(root_cert, cert::KeyUsage::kSignCerts);
    return cert::verify_against_entries(
               signing, cert::revocation_list_canonical_body(rl), *rl.signature)
        .valid;
}

inline cert::RevocationList issue_revocation_list(
    sig::KeyPair& root_keys, const cert::SubjectInfo& issuer,
    const AccessControlList& acl, std::uint64_t prior_version,
    std::vector<cert::RevocationEntry> entries, std::uint64_t issued_at) {
    if (!acl.allows(issuer.role, Permission::kIssueRl))
        throw AclDenied("role may not issue revocation lists");
    cert::RevocationList rl;
    rl.version = prior_version + 1;
    rl.issued_at = issued_at;
    rl.entries = std::move(entries);
    rl.issuer = issuer;
    rl.signature =
        sig::sign(root_keys, cert::revocation_list_canonical_body(rl));
    return rl;
}

// Full-replacement adoption: the incoming list supersedes the current one
// entirely, and only with a strictly larger version. The signature check
// runs first so a forged list can never even reach the version comparison.
inline cert::RevocationList merge_revocation_lists(
    const std::optional<cert::RevocationList>& current,
    const cert::RevocationList& incoming, const cert::Certificate& root_cert) {
    if (!verify_rl_signature(incoming, root_cert))
        throw SignatureInvalid("incoming revocation list is not root-signed");
    if (current && incoming.version <= current->version)
        throw RollbackRejected(
            "incoming revocation list does not advance the version");
    return incoming;
}

// --- firmware bundles ----------------------------------------------------------------

struct FirmwareBundle {
    Bytes firmware_blob;
    cert::RevocationList revocation_list;
    sig::SignatureValue bundle_signature;

    bool operator==(const FirmwareBundle&) const = default;
};

// The bundle signature covers the blob followed by the full list encoding,
// binding firmware and revocation state together.
inline Bytes bundle_signed_message(ByteView blob,
                                   const cert::RevocationList& rl) {
    Bytes msg(blob.begin(), blob.end());
    append(msg, cert::encode_revocation_list(rl));
    return msg;
}

inline FirmwareBundle pack_firmware_bundle(Bytes blob, cert::RevocationList rl,
                                           sig::KeyPair& signer_keys) {
    FirmwareBundle b;
    b.bundle_signature = sig::sign(signer_keys, bundle_signed_message(blob, rl));
    b.firmware_blob = std::move(blob);
    b.revocation_list = std::move(rl);
    return b;
}

inline Bytes encode_firmware_bundle(const FirmwareBundle& b) {
    tlv::Writer w;
    w.bytes(tlv::kBundleBlob, b.firmware_blob);
    w.nested(tlv::kBundleRl, cert::encode_revocation_list(b.revocation_list));
    w.nested(tlv::kBundleSignature, sig::encode_signature(b.bundle_signature));
    return tlv::wrap(tlv::kFirmwareBundle, w.take());
}

inline FirmwareBundle decode_firmware_bundle(ByteView data) {
    const ByteView body = tlv::unwrap(tlv::kFirmwareBundle, data);
    tlv::Reader r(body);
    FirmwareBundle b;
    b.firmware_blob = r.bytes(tlv::kBundleBlob);
    b.revocation_list = cert::decode_revocation_list(r.value(tlv::kBundleRl));
    b.bundle_signature = sig::decode_signature(r.value(tlv::kBundleSignature));
    r.expect_done();
    return b;
}

inline std::string armor_firmware_bundle(const FirmwareBundle& b) {
    return armor("FIRMWARE BUNDLE", encode_firmware_bundle(b));
}
inline FirmwareBundle dearmor_firmware_bundle(std::string_view text) {
    return decode_firmware_bundle(dearmor("FIRMWARE BUNDLE", text));
}

// Applies a bundle to an offline device: all-or-nothing. The bundle
// signature must verify under a certificate in the device's trust store,
// the carried list must merge cleanly, and only then do firmware and stored
// list change.
inline void apply_offline_update(Party& device, const FirmwareBundle& bundle) {
    const Bytes msg =
        bundle_signed_message(bundle.firmware_blob, bundle.revocation_list);
    const cert::Certificate* signer = nullptr;
    for (const auto& anchor : device.trust_store) {
        const auto signing =
            cert::entries_with_usage(anchor, cert::KeyUsage::kSignCerts);
        if (cert::verify_against_entries(signing, msg, bundle.bundle_signature)
                .valid) {
            signer = &anchor;
            break;
        }
    }
    if (signer == nullptr)
        throw BundleInvalid("bundle signature does not reach the trust store");

    cert::RevocationList merged =
        merge_revocation_lists(device.stored_rl, bundle.revocation_list, *signer);
    device.stored_rl = std::move(merged);
    device.firmware = bundle.firmware_blob;
}

// --- certificate collapse -----------------------------------------------------------

namespace detail {

// Assembles [leaf .. root] by following issuer names through a trust store.
inline std::vector<cert::Certificate> assemble_chain(
    const cert::Certificate& leaf, const std::vector<cert::Certificate>& store,
    std::size_t max_len = 4) {
    std::vector<cert::Certificate> chain = {leaf};
    while (!cert::is_self_signed(chain.back()) && chain.size() < max_len) {
        const cert::Certificate* next = nullptr;
        for (const auto& c : store)
            if (c.subject == chain.back().issuer) next = &c;
        if (next == nullptr) break;
        chain.push_back(*next);
    }
    return chain;
}

}  // namespace detail

// Trades a still-valid third-level certificate for a fresh, short-lived one
// issued directly by the root, shrinking the trust chain to length two. The
// evidence must validate to the root's anchor and survive the root's current
// revocation list; the new certificate binds the device's current keys.
inline cert::Certificate collapse_certificate(Party& root_party, Party& device,
                                              const cert::Certificate& evidence,
                                              const AccessControlList& acl,
                                              std::uint64_t now,
                                              std::uint64_t ttl_seconds = 86400) {
    if (!acl.allows(root_party.role, Permission::kCollapseCert))
        throw AclDenied("role may not collapse certificates");
    if (!root_party.certificate || !root_party.journal)
        throw ParameterError("root party needs a certificate and a journal");
    const cert::Certificate& root_cert = *root_party.certificate;

    std::vector<cert::Certificate> store = root_party.trust_store;
    store.push_back(root_cert);
    cert::ValidationPolicy policy;
    policy.evaluation_time = now;
    policy.anchors = {root_cert};
    policy.revocation = root_party.stored_rl;
    const cert::ValidationReport report =
        cert::validate_chain(detail::assemble_chain(evidence, store), policy);
    if (!report.ok) {
        std::string why = "evidence does not validate";
        for (const auto& c : report.checks)
            if (!c.passed) {
                why = "evidence rejected: " + c.name +
                      (c.detail.empty() ? "" : " (" + c.detail + ")");
                break;
            }
        throw EvidenceRejected(why);
    }
    if (!device.certificate || evidence.subject != device.certificate->subject)
        throw EvidenceRejected("evidence subject does not match the device");

    cert::Csr csr;
    csr.subject = evidence.subject;
    csr.public_keys = cert::key_entries_for(device.keys, cert::KeyUsage::kSignData);
    const Bytes body = cert::csr_canonical_body(csr);
    if (device.keys.descriptor.scheme_id == sig::SchemeId::kHybrid) {
        for (auto& inner : device.keys.inner)
            csr.proofs.push_back(sig::sign(inner, body));
    } else {
        csr.proofs.push_back(sig::sign(device.keys, body));
    }

    cert::IssueProfile profile;
    profile.issued_at = now;
    profile.ttl_seconds = ttl_seconds;
    profile.hybrid_required = evidence.extensions.hybrid_required;
    return cert::issue_certificate(root_party.keys, root_cert, csr, profile,
                                   *root_party.journal);
}

}  // namespace pqpki::rev

#endif
