#ifndef PQPKI_KEYSERVER_KEYSERVER_HPP
#define PQPKI_KEYSERVER_KEYSERVER_HPP

// Minimal symmetric key server: salted-password authentication of parties
// and an append-only registry of certificate-injection reports that the
// frontend consults before admitting an operator-path enrollment.
//
// Password storage is a single salted SHA-256, simulation-grade by intent;
// production password storage needs a memory-hard KDF and is out of scope
// here.  The server is safe for concurrent in-process use and bounds its
// request backlog so the scalability limit is observable instead of being
// modeled away.

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pqpki/base64.hpp"
#include "pqpki/bytes.hpp"
#include "pqpki/enroll/enrollment.hpp"
#include "pqpki/errors.hpp"
#include "pqpki/io.hpp"
#include "pqpki/rev/revocation.hpp"
#include "pqpki/rng.hpp"
#include "pqpki/sha256.hpp"
#include "pqpki/tlv.hpp"

namespace pqpki::ks {

inline constexpr std::size_t kSaltBytes = 16;
inline constexpr std::size_t kTokenBytesLen = 32;

struct CredentialRecord {
    std::string party_id;
    Bytes salt;           // 16 bytes, fresh per registration
    Bytes password_hash;  // SHA-256(salt || password)
    cert::Role role = cert::Role::kDevice;

    bool operator==(const CredentialRecord&) const = default;
};

struct SessionToken {
    std::string party_id;
    std::uint64_t issued_at = 0;
    std::uint64_t expires_at = 0;  // strictly greater than issued_at
    Bytes token_bytes;             // 32 random bytes, unique server-wide

    bool operator==(const SessionToken&) const = default;
};

struct InjectionReport {
    std::string reporter_party_id;
    std::string device_serial;
    Bytes cert_serial;  // 16 bytes
    std::uint64_t reported_at = 0;

    bool operator==(const InjectionReport&) const = default;
};

inline Bytes hash_password(ByteView salt, std::string_view password) {
    const auto digest = Sha256().update(salt).update(password).finish();
    return Bytes(digest.begin(), digest.end());
}

// --- codecs -------------------------------------------------------------------

inline Bytes encode_credential_record(const CredentialRecord& r) {
    tlv::Writer w;
    w.text(tlv::kCredPartyId, r.party_id);
    w.bytes(tlv::kCredSalt, r.salt);
    w.bytes(tlv::kCredPasswordHash, r.password_hash);
    w.u8(tlv::kCredRole, static_cast<std::uint8_t>(r.role));
    return tlv::wrap(tlv::kCredentialRecord, w.move());
}

inline CredentialRecord decode_credential_record(ByteView data) {
    tlv::Reader r(tlv::unwrap(tlv::kCredentialRecord, data));
    CredentialRecord out;
    out.party_id = r.text(tlv::kCredPartyId);
    if (out.party_id.empty()) throw DecodeError("credential party id is empty");
    out.salt = r.bytes(tlv::kCredSalt);
    if (out.salt.size() != kSaltBytes) throw DecodeError("bad salt size");
    out.password_hash = r.bytes(tlv::kCredPasswordHash);
    if (out.password_hash.size() != 32) throw DecodeError("bad password hash size");
    const std::uint8_t role = r.u8(tlv::kCredRole);
    if (role < 1 || role > 5) throw DecodeError("bad credential role");
    out.role = static_cast<cert::Role>(role);
    r.expect_done();
    return out;
}

inline Bytes encode_session_token(const SessionToken& t) {
    tlv::Writer w;
    w.text(tlv::kTokenParty, t.party_id);
    w.u64(tlv::kTokenIssuedAt, t.issued_at);
    w.u64(tlv::kTokenExpiresAt, t.expires_at);
    w.bytes(tlv::kTokenBytes, t.token_bytes);
    return tlv::wrap(tlv::kSessionToken, w.move());
}

inline SessionToken decode_session_token(ByteView data) {
    tlv::Reader r(tlv::unwrap(tlv::kSessionToken, data));
    SessionToken out;
    out.party_id = r.text(tlv::kTokenParty);
    out.issued_at = r.u64(tlv::kTokenIssuedAt);
    out.expires_at = r.u64(tlv::kTokenExpiresAt);
    if (out.expires_at <= out.issued_at)
        throw DecodeError("token expiry precedes issuance");
    out.token_bytes = r.bytes(tlv::kTokenBytes);
    if (out.token_bytes.size() != kTokenBytesLen)
        throw DecodeError("bad token size");
    r.expect_done();
    return out;
}

inline Bytes encode_injection_report(const InjectionReport& report) {
    tlv::Writer w;
    w.text(tlv::kReportReporter, report.reporter_party_id);
    w.text(tlv::kReportDeviceSerial, report.device_serial);
    w.bytes(tlv::kReportCertSerial, report.cert_serial);
    w.u64(tlv::kReportReportedAt, report.reported_at);
    return tlv::wrap(tlv::kInjectionReport, w.move());
}

inline InjectionReport decode_injection_report(ByteView data) {
    tlv::Reader r(tlv::unwrap(tlv::kInjectionReport, data));
    InjectionReport out;
    out.reporter_party_id = r.text(tlv::kReportReporter);
    out.device_serial = r.text(tlv::kReportDeviceSerial);
    if (out.device_serial.empty()) throw DecodeError("report device serial is empty");
    out.cert_serial = r.bytes(tlv::kReportCertSerial);
    if (out.cert_serial.size() != 16)
        throw DecodeError("report certificate serial must be 16 bytes");
    out.reported_at = r.u64(tlv::kReportReportedAt);
    r.expect_done();
    return out;
}

// --- the server ---------------------------------------------------------------

struct ServerConfig {
    std::size_t max_pending = 64;
    rev::AccessControlList acl = rev::AccessControlList::standard();
};

class KeyServer {
public:
    using Config = ServerConfig;

    explicit KeyServer(SeedRng rng, Config config = {})
        : config_(std::move(config)), rng_(std::move(rng)) {
        decoy_salt_ = rng_.bytes(kSaltBytes);
        decoy_hash_ = hash_password(decoy_salt_, "decoy-never-authenticates");
    }

    KeyServer() : KeyServer(SeedRng::from_system_entropy()) {}

    // One admission slot, held for the duration of a request.  Acquiring
    // beyond the configured backlog reports the bottleneck instead of
    // queueing unboundedly.
    class Slot {
    public:
        explicit Slot(KeyServer& server) : server_(&server) {
            std::lock_guard<std::mutex> lock(server.mu_);
            if (server.pending_ >= server.config_.max_pending)
                throw ServerBusy("request backlog is full");
            ++server.pending_;
        }
        ~Slot() { release(); }
        Slot(Slot&& other) noexcept : server_(other.server_) {
            other.server_ = nullptr;
        }
        Slot& operator=(Slot&& other) noexcept {
            if (this != &other) {
                release();
                server_ = other.server_;
                other.server_ = nullptr;
            }
            return *this;
        }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        void release() {
            if (!server_) return;
            std::lock_guard<std::mutex> lock(server_->mu_);
            --server_->pending_;
            server_ = nullptr;
        }
        KeyServer* server_;
    };

    Slot acquire_slot() { return Slot(*this); }

    void register_party(const std::string& party_id, std::string_view password,
                        cert::Role role) {
        Slot slot(*this);
        if (party_id.empty()) throw ParameterError("party id must not be empty");
        std::lock_guard<std::mutex> lock(mu_);
        if (credentials_.count(party_id))
            throw DuplicateParty("party is already registered: " + party_id);
        CredentialRecord record;
        record.party_id = party_id;
        record.salt = rng_.bytes(kSaltBytes);
        record.password_hash = hash_password(record.salt, password);
        record.role = role;
        credentials_.emplace(party_id, std::move(record));
    }

    SessionToken authenticate(const std::string& party_id,
                              std::string_view password,
                              std::uint64_t ttl_seconds, std::uint64_t now) {
        Slot slot(*this);
        if (ttl_seconds == 0)
            throw ParameterError("session ttl must be positive");
        std::lock_guard<std::mutex> lock(mu_);
        // Both outcomes run the same hash-and-compare path against either
        // the real record or a server-fixed decoy, and raise the same
        // error, so an unknown party is indistinguishable from a wrong
        // password.
        const auto it = credentials_.find(party_id);
        const bool known = it != credentials_.end();
        const Bytes& salt = known ? it->second.salt : decoy_salt_;
        const Bytes& expected = known ? it->second.password_hash : decoy_hash_;
        const Bytes presented = hash_password(salt, password);
        unsigned diff = known ? 0 : 1;
        for (std::size_t i = 0; i < presented.size(); ++i)
            diff |= static_cast<unsigned>(presented[i] ^ expected[i]);
        if (diff != 0) throw AuthFailed("unknown party or wrong password");

        SessionToken token;
        token.party_id = party_id;
        token.issued_at = now;
        token.expires_at = now + ttl_seconds;
        do {
            token.token_bytes = rng_.bytes(kTokenBytesLen);
        } while (tokens_.count(token.token_bytes));
        tokens_.emplace(token.token_bytes, token);
        return token;
    }

    void report_injection(const SessionToken& token,
                          const std::string& device_serial,
                          const Bytes& cert_serial, std::uint64_t now) {
        Slot slot(*this);
        if (device_serial.empty())
            throw ParameterError("device serial must not be empty");
        if (cert_serial.size() != 16)
            throw ParameterError("certificate serial must be 16 bytes");
        std::lock_guard<std::mutex> lock(mu_);
        const CredentialRecord& who = check_token(token, now);
        if (!config_.acl.allows(who.role, rev::Permission::kReportInjection))
            throw AclDenied("role may not report injections");
        InjectionReport report;
        report.reporter_party_id = who.party_id;
        report.device_serial = device_serial;
        report.cert_serial = cert_serial;
        report.reported_at = now;
        reports_.push_back(std::move(report));
    }

    std::vector<InjectionReport> query_injections(const SessionToken& token,
                                                  const std::string& device_serial,
                                                  std::uint64_t now) const {
        Slot slot(*const_cast<KeyServer*>(this));
        std::lock_guard<std::mutex> lock(mu_);
        const CredentialRecord& who = check_token(token, now);
        if (who.role != cert::Role::kMaintainer)
            throw AclDenied("only the maintainer may query injection reports");
        std::vector<InjectionReport> out;
        for (const auto& r : reports_)
            if (r.device_serial == device_serial) out.push_back(r);
        return out;
    }

    std::optional<CredentialRecord> credential(const std::string& party_id) const {
        std::lock_guard<std::mutex> lock(mu_);
        const auto it = credentials_.find(party_id);
        if (it == credentials_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t report_count() const {
        std::lock_guard<std::mutex> lock(mu_);
        return reports_.size();
    }

    // --- persistence: one base64 TLV record per line ---------------------------

    std::string serialize_credentials() const {
        std::lock_guard<std::mutex> lock(mu_);
        std::string out;
        for (const auto& [id, record] : credentials_)
            out += base64_encode(encode_credential_record(record)) + "\n";
        return out;
    }

    void load_credentials_text(const std::string& text) {
        std::map<std::string, CredentialRecord> fresh;
        for_each_line(text, [&](const std::string& line) {
            CredentialRecord record =
                decode_credential_record(base64_decode(line));
            if (!fresh.emplace(record.party_id, record).second)
                throw DecodeError("duplicate credential record: " +
                                  record.party_id);
        });
        std::lock_guard<std::mutex> lock(mu_);
        credentials_ = std::move(fresh);
    }

    std::string serialize_reports() const {
        std::lock_guard<std::mutex> lock(mu_);
        std::string out;
        for (const auto& report : reports_)
            out += base64_encode(encode_injection_report(report)) + "\n";
        return out;
    }

    void load_reports_text(const std::string& text) {
        std::vector<InjectionReport> fresh;
        for_each_line(text, [&](const std::string& line) {
            fresh.push_back(decode_injection_report(base64_decode(line)));
        });
        std::lock_guard<std::mutex> lock(mu_);
        reports_ = std::move(fresh);
    }

    // Sessions persist so separate processes can authenticate once and act
    // later.  Token bytes are bearer secrets; the store file deserves the
    // same protection as a password file.
    std::string serialize_sessions() const {
        std::lock_guard<std::mutex> lock(mu_);
        std::string out;
        for (const auto& [bytes, token] : tokens_)
            out += base64_encode(encode_session_token(token)) + "\n";
        return out;
    }

    void load_sessions_text(const std::string& text) {
        std::map<Bytes, SessionToken> fresh;
        for_each_line(text, [&](const std::string& line) {
            SessionToken token = decode_session_token(base64_decode(line));
            if (!fresh.emplace(token.token_bytes, token).second)
                throw DecodeError("duplicate session token");
        });
        std::lock_guard<std::mutex> lock(mu_);
        tokens_ = std::move(fresh);
    }

    void save_credentials(const std::string& path) const {
        write_text_file(path, serialize_credentials());
    }
    void load_credentials(const std::string& path) {
        load_credentials_text(read_text_file(path));
    }
    void save_reports(const std::string& path) const {
        write_text_file(path, serialize_reports());
    }
    void load_reports(const std::string& path) {
        load_reports_text(read_text_file(path));
    }
    void save_sessions(const std::string& path) const {
        write_text_file(path, serialize_sessions());
    }
    void load_sessions(const std::string& path) {
        load_sessions_text(read_text_file(path));
    }

private:
    template <typename Fn>
    static void for_each_line(const std::string& text, Fn&& fn) {
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string::npos) end = text.size();
            std::string line = text.substr(pos, end - pos);
            pos = end + 1;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) fn(line);
        }
    }

    // Requires mu_ held.  A token is good only if the server issued these
    // exact bytes for this party and the expiry has not been reached.
    const CredentialRecord& check_token(const SessionToken& token,
                                        std::uint64_t now) const {
        const auto it = tokens_.find(token.token_bytes);
        if (it == tokens_.end() || !(it->second == token) ||
            now >= token.expires_at)
            throw AuthFailed("invalid or expired session token");
        const auto cred = credentials_.find(token.party_id);
        if (cred == credentials_.end())
            throw AuthFailed("invalid or expired session token");
        return cred->second;
    }

    mutable std::mutex mu_;
    std::size_t pending_ = 0;
    Config config_;
    SeedRng rng_;
    Bytes decoy_salt_;
    Bytes decoy_hash_;
    std::map<std::string, CredentialRecord> credentials_;
    std::map<Bytes, SessionToken> tokens_;
    std::vector<InjectionReport> reports_;  // append-only, submission order
};

// --- frontend integration --------------------------------------------------------

// Operator-path (field) enrollment admits only devices whose production-time
// injection is on record: the frontend queries the registry under the
// maintainer's session and refuses serials that were never reported.  The
// refusal reuses the attestation outcome because the device cannot prove its
// production provenance.
inline enroll::EnrollmentTranscript run_operator_enrollment(
    enroll::PartySet& parties, Party& device, enroll::AdversaryConfig& adversary,
    KeyServer& server, const SessionToken& maintainer_session) {
    const auto prior = server.query_injections(
        maintainer_session, device.identity.serial_number, parties.clock);
    if (prior.empty()) {
        enroll::EnrollmentTranscript refused;
        refused.outcome = enroll::Outcome::kAttestationFailed;
        return refused;
    }
    return enroll::run_enrollment(parties, device, adversary,
                                  enroll::InjectionPath::kDeviceApi);
}

}  // namespace pqpki::ks

#endif
