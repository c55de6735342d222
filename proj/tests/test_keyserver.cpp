#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <set>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "pqpki/keyserver/keyserver.hpp"

using namespace pqpki;

namespace {

constexpr std::uint64_t kNow = 1700000000;

ks::KeyServer seeded_server(std::uint64_t seed, ks::KeyServer::Config cfg = {}) {
    return ks::KeyServer(SeedRng(seed), std::move(cfg));
}

bool text_contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path("/tmp/pqpki-test-" + name + "-" +
               std::to_string(::getpid())) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("registration and authentication") {
    ks::KeyServer server = seeded_server(1);
    server.register_party("alice", "correct horse battery", cert::Role::kMaintainer);

    const auto token = server.authenticate("alice", "correct horse battery",
                                           600, kNow);
    CHECK(token.party_id == "alice");
    CHECK(token.issued_at == kNow);
    CHECK(token.expires_at == kNow + 600);
    CHECK(token.token_bytes.size() == 32);

    CHECK_THROWS_AS(server.authenticate("alice", "wrong password", 600, kNow),
                    AuthFailed);
    CHECK_THROWS_AS(server.authenticate("mallory", "correct horse battery",
                                        600, kNow),
                    AuthFailed);
    CHECK_THROWS_AS(server.authenticate("alice", "correct horse battery", 0,
                                        kNow),
                    ParameterError);
    CHECK_THROWS_AS(
        server.register_party("alice", "another", cert::Role::kOperator),
        DuplicateParty);
    CHECK_THROWS_AS(server.register_party("", "pw", cert::Role::kOperator),
                    ParameterError);

    SECTION("failures are indistinguishable") {
        std::string wrong_password, unknown_party;
        try {
            server.authenticate("alice", "nope", 600, kNow);
        } catch (const AuthFailed& e) {
            wrong_password = e.what();
        }
        try {
            server.authenticate("nobody", "nope", 600, kNow);
        } catch (const AuthFailed& e) {
            unknown_party = e.what();
        }
        REQUIRE(!wrong_password.empty());
        CHECK(wrong_password == unknown_party);
    }

    SECTION("the stored record holds a salted hash, never the password") {
        const auto record = server.credential("alice");
        REQUIRE(record.has_value());
        CHECK(record->salt.size() == 16);
        CHECK(record->password_hash ==
              ks::hash_password(record->salt, "correct horse battery"));
        const Bytes encoded = ks::encode_credential_record(*record);
        const std::string flat(encoded.begin(), encoded.end());
        CHECK_FALSE(text_contains(flat, "correct horse battery"));
        CHECK_FALSE(text_contains(flat, "horse"));
    }

    SECTION("same password, different party, different salt and hash") {
        server.register_party("bob", "correct horse battery",
                              cert::Role::kOperator);
        const auto a = server.credential("alice");
        const auto b = server.credential("bob");
        CHECK(a->salt != b->salt);
        CHECK(a->password_hash != b->password_hash);
    }
}

TEST_CASE("tokens expire and bind to their party") {
    ks::KeyServer server = seeded_server(2);
    server.register_party("maint", "pw-m", cert::Role::kMaintainer);
    server.register_party("manu", "pw-f", cert::Role::kManufacturer);
    const Bytes serial(16, 0x42);

    auto manu_token = server.authenticate("manu", "pw-f", 100, kNow);
    server.report_injection(manu_token, "SN-1", serial, kNow + 50);
    CHECK_THROWS_AS(
        server.report_injection(manu_token, "SN-1", serial, kNow + 100),
        AuthFailed);
    CHECK_THROWS_AS(
        server.report_injection(manu_token, "SN-1", serial, kNow + 500),
        AuthFailed);

    SECTION("flipped token bytes are rejected") {
        ks::SessionToken bent = manu_token;
        bent.token_bytes[0] ^= 0x01;
        CHECK_THROWS_AS(server.report_injection(bent, "SN-1", serial, kNow),
                        AuthFailed);
    }

    SECTION("a token cannot be re-pointed at another party") {
        ks::SessionToken stolen = manu_token;
        stolen.party_id = "maint";
        CHECK_THROWS_AS(server.report_injection(stolen, "SN-1", serial, kNow),
                        AuthFailed);
    }

    SECTION("a stretched expiry no longer matches the issued token") {
        ks::SessionToken stretched = manu_token;
        stretched.expires_at += 1000000;
        CHECK_THROWS_AS(
            server.report_injection(stretched, "SN-1", serial, kNow + 500),
            AuthFailed);
    }

    SECTION("tokens from another server are foreign here") {
        ks::KeyServer other = seeded_server(3);
        other.register_party("manu", "pw-f", cert::Role::kManufacturer);
        auto foreign = other.authenticate("manu", "pw-f", 100, kNow);
        CHECK_THROWS_AS(server.report_injection(foreign, "SN-1", serial, kNow),
                        AuthFailed);
    }
}

TEST_CASE("injection reports are append-only and ordered") {
    ks::KeyServer server = seeded_server(4);
    server.register_party("maint", "pw-m", cert::Role::kMaintainer);
    server.register_party("manu", "pw-f", cert::Role::kManufacturer);
    server.register_party("oper", "pw-o", cert::Role::kOperator);
    server.register_party("line", "pw-l", cert::Role::kProductionLine);

    auto maint = server.authenticate("maint", "pw-m", 3600, kNow);
    auto manu = server.authenticate("manu", "pw-f", 3600, kNow);
    auto oper = server.authenticate("oper", "pw-o", 3600, kNow);
    auto line = server.authenticate("line", "pw-l", 3600, kNow);

    const Bytes first_serial(16, 0x01);
    const Bytes second_serial(16, 0x02);
    const Bytes third_serial(16, 0x03);
    server.report_injection(manu, "SN-1", first_serial, kNow + 1);
    server.report_injection(manu, "SN-2", second_serial, kNow + 2);
    server.report_injection(oper, "SN-1", third_serial, kNow + 3);

    const auto sn1 = server.query_injections(maint, "SN-1", kNow + 10);
    REQUIRE(sn1.size() == 2);
    CHECK(sn1[0].reporter_party_id == "manu");
    CHECK(sn1[0].cert_serial == first_serial);
    CHECK(sn1[0].reported_at == kNow + 1);
    CHECK(sn1[1].reporter_party_id == "oper");
    CHECK(sn1[1].cert_serial == third_serial);
    CHECK(server.query_injections(maint, "SN-2", kNow + 10).size() == 1);
    CHECK(server.query_injections(maint, "SN-3", kNow + 10).empty());

    SECTION("only the maintainer may query") {
        CHECK_THROWS_AS(server.query_injections(manu, "SN-1", kNow + 10),
                        AclDenied);
        CHECK_THROWS_AS(server.query_injections(oper, "SN-1", kNow + 10),
                        AclDenied);
    }

    SECTION("reporting follows the access policy") {
        CHECK_THROWS_AS(
            server.report_injection(line, "SN-9", first_serial, kNow + 4),
            AclDenied);
        CHECK(server.report_count() == 3);
    }

    SECTION("reports only append") {
        const std::size_t before = server.report_count();
        server.report_injection(manu, "SN-1", second_serial, kNow + 5);
        CHECK(server.report_count() == before + 1);
        CHECK(server.query_injections(maint, "SN-1", kNow + 10).size() == 3);
    }

    SECTION("report parameters are validated") {
        CHECK_THROWS_AS(server.report_injection(manu, "", first_serial, kNow),
                        ParameterError);
        CHECK_THROWS_AS(
            server.report_injection(manu, "SN-1", Bytes(8, 0x01), kNow),
            ParameterError);
    }
}

TEST_CASE("the server rejects when the backlog is full") {
    ks::KeyServer::Config cfg;
    cfg.max_pending = 4;
    ks::KeyServer server = seeded_server(5, cfg);
    server.register_party("alice", "pw", cert::Role::kMaintainer);

    std::vector<ks::KeyServer::Slot> held;
    for (int i = 0; i < 4; ++i) held.push_back(server.acquire_slot());
    CHECK_THROWS_AS(server.authenticate("alice", "pw", 600, kNow), ServerBusy);
    CHECK_THROWS_AS(server.acquire_slot(), ServerBusy);

    held.pop_back();
    CHECK_NOTHROW(server.authenticate("alice", "pw", 600, kNow));
}

TEST_CASE("concurrent requests stay consistent") {
    ks::KeyServer server = seeded_server(6);
    server.register_party("maint", "pw-m", cert::Role::kMaintainer);
    server.register_party("manu", "pw-f", cert::Role::kManufacturer);

    constexpr int kThreads = 8;
    constexpr int kPerThread = 25;
    std::vector<std::vector<Bytes>> seen(kThreads);
    std::vector<std::thread> workers;
    for (int t = 0; t < kThreads; ++t) {
        workers.emplace_back([&, t] {
            for (int i = 0; i < kPerThread; ++i) {
                auto token = server.authenticate("manu", "pw-f", 3600, kNow);
                seen[t].push_back(token.token_bytes);
                server.report_injection(token, "SN-" + std::to_string(t),
                                        Bytes(16, static_cast<std::uint8_t>(t)),
                                        kNow + 1);
            }
        });
    }
    for (auto& w : workers) w.join();

    std::set<Bytes> unique;
    for (const auto& batch : seen) unique.insert(batch.begin(), batch.end());
    CHECK(unique.size() == kThreads * kPerThread);
    CHECK(server.report_count() == kThreads * kPerThread);

    auto maint = server.authenticate("maint", "pw-m", 3600, kNow);
    std::size_t total = 0;
    for (int t = 0; t < kThreads; ++t)
        total += server
                     .query_injections(maint, "SN-" + std::to_string(t),
                                       kNow + 2)
                     .size();
    CHECK(total == kThreads * kPerThread);
}

TEST_CASE("persistence round trips without leaking secrets") {
    ks::KeyServer server = seeded_server(7);
    server.register_party("maint", "tops3cret-alpha", cert::Role::kMaintainer);
    server.register_party("manu", "tops3cret-beta", cert::Role::kManufacturer);
    auto manu = server.authenticate("manu", "tops3cret-beta", 3600, kNow);
    server.report_injection(manu, "SN-77", Bytes(16, 0x77), kNow + 1);
    server.report_injection(manu, "SN-78", Bytes(16, 0x78), kNow + 2);

    TempFile creds("creds");
    TempFile reports("reports");
    server.save_credentials(creds.path);
    server.save_reports(reports.path);

    const std::string creds_text = read_text_file(creds.path);
    const std::string reports_text = read_text_file(reports.path);
    for (const std::string& secret : {std::string("tops3cret-alpha"),
                                      std::string("tops3cret-beta")}) {
        CHECK_FALSE(text_contains(creds_text, secret));
        CHECK_FALSE(text_contains(reports_text, secret));
        // base64 of the raw password bytes must be absent as well
        CHECK_FALSE(text_contains(creds_text,
                                  base64_encode(to_bytes(secret))));
    }

    ks::KeyServer restored = seeded_server(8);
    restored.load_credentials(creds.path);
    restored.load_reports(reports.path);
    CHECK_NOTHROW(restored.authenticate("maint", "tops3cret-alpha", 600, kNow));
    CHECK_THROWS_AS(restored.authenticate("maint", "wrong", 600, kNow),
                    AuthFailed);
    CHECK(restored.report_count() == 2);
    auto maint = restored.authenticate("maint", "tops3cret-alpha", 600, kNow);
    const auto sn77 = restored.query_injections(maint, "SN-77", kNow + 3);
    REQUIRE(sn77.size() == 1);
    CHECK(sn77[0].reported_at == kNow + 1);

    CHECK(restored.serialize_credentials() == creds_text);
    CHECK(restored.serialize_reports() == reports_text);

    SECTION("malformed stores are rejected whole") {
        CHECK_THROWS_AS(restored.load_credentials_text("!!!not base64!!!\n"),
                        DecodeError);
        CHECK_THROWS_AS(
            restored.load_reports_text(base64_encode(Bytes{1, 2, 3}) + "\n"),
            DecodeError);
        const std::string dup = creds_text + creds_text;
        CHECK_THROWS_AS(restored.load_credentials_text(dup), DecodeError);
        // a failed load leaves the previous state in place
        CHECK_NOTHROW(
            restored.authenticate("maint", "tops3cret-alpha", 600, kNow));
    }
}

TEST_CASE("session stores round trip live tokens") {
    ks::KeyServer server = seeded_server(14);
    server.register_party("maint", "pw-maint", cert::Role::kMaintainer);
    server.register_party("manu", "pw-manu", cert::Role::kManufacturer);
    auto maint = server.authenticate("maint", "pw-maint", 3600, kNow);
    auto manu = server.authenticate("manu", "pw-manu", 3600, kNow);

    TempFile creds("sess-creds");
    TempFile sessions("sessions");
    server.save_credentials(creds.path);
    server.save_sessions(sessions.path);

    // a restored server honours tokens minted before the restart
    ks::KeyServer restored = seeded_server(15);
    restored.load_credentials(creds.path);
    restored.load_sessions(sessions.path);
    CHECK_NOTHROW(
        restored.report_injection(manu, "SN-90", Bytes(16, 0x90), kNow + 1));
    CHECK(restored.query_injections(maint, "SN-90", kNow + 2).size() == 1);
    CHECK(restored.serialize_sessions() == read_text_file(sessions.path));

    // tokens the restored server never saw stay invalid
    auto stranger = server.authenticate("manu", "pw-manu", 3600, kNow + 5);
    CHECK_THROWS_AS(
        restored.report_injection(stranger, "SN-91", Bytes(16, 0x91), kNow + 6),
        AuthFailed);

    SECTION("duplicate and malformed session lines are rejected whole") {
        const std::string line =
            base64_encode(ks::encode_session_token(maint)) + "\n";
        CHECK_THROWS_AS(restored.load_sessions_text(line + line), DecodeError);
        CHECK_THROWS_AS(restored.load_sessions_text("%%%\n"), DecodeError);
        // the failed loads left the token table untouched
        CHECK(restored.query_injections(maint, "SN-90", kNow + 3).size() == 1);
    }
}

TEST_CASE("record codecs validate their fields") {
    ks::CredentialRecord record;
    record.party_id = "alice";
    record.salt = Bytes(16, 0x0A);
    record.password_hash = Bytes(32, 0x0B);
    record.role = cert::Role::kOperator;
    CHECK(ks::decode_credential_record(ks::encode_credential_record(record)) ==
          record);

    ks::SessionToken token;
    token.party_id = "alice";
    token.issued_at = kNow;
    token.expires_at = kNow + 60;
    token.token_bytes = Bytes(32, 0x0C);
    CHECK(ks::decode_session_token(ks::encode_session_token(token)) == token);

    ks::InjectionReport report;
    report.reporter_party_id = "manu";
    report.device_serial = "SN-1";
    report.cert_serial = Bytes(16, 0x0D);
    report.reported_at = kNow;
    CHECK(ks::decode_injection_report(ks::encode_injection_report(report)) ==
          report);

    SECTION("size and range violations") {
        ks::CredentialRecord bad_salt = record;
        bad_salt.salt.pop_back();
        CHECK_THROWS_AS(ks::decode_credential_record(
                            ks::encode_credential_record(bad_salt)),
                        DecodeError);

        ks::SessionToken inverted = token;
        inverted.expires_at = inverted.issued_at;
        CHECK_THROWS_AS(
            ks::decode_session_token(ks::encode_session_token(inverted)),
            DecodeError);

        ks::InjectionReport bad_serial = report;
        bad_serial.cert_serial.pop_back();
        CHECK_THROWS_AS(ks::decode_injection_report(
                            ks::encode_injection_report(bad_serial)),
                        DecodeError);
    }
}

TEST_CASE("operator enrollment consults the registry") {
    enroll::PartySet parties = enroll::setup_hierarchy(301);
    SeedRng rng(3010);
    Party device =
        enroll::make_device(parties, "device-k", "gw-1000", "SN-0700", rng);

    ks::KeyServer server = seeded_server(9);
    server.register_party("maintainer-root", "pw-m", cert::Role::kMaintainer);
    server.register_party("manufacturer-1", "pw-f", cert::Role::kManufacturer);
    auto maintainer_session =
        server.authenticate("maintainer-root", "pw-m", 7200, parties.clock);
    auto manufacturer_session =
        server.authenticate("manufacturer-1", "pw-f", 7200, parties.clock);

    enroll::AdversaryConfig quiet;
    quiet.random_seed = 30;

    // Field enrollment before any production record exists is refused.
    const auto refused = ks::run_operator_enrollment(
        parties, device, quiet, server, maintainer_session);
    CHECK(refused.outcome == enroll::Outcome::kAttestationFailed);
    CHECK(refused.ordered_messages.empty());
    CHECK_FALSE(device.certificate.has_value());

    // Production-time injection, reported by the manufacturer.
    enroll::AdversaryConfig produce;
    produce.random_seed = 31;
    const auto produced = enroll::run_enrollment(
        parties, device, produce, enroll::InjectionPath::kFrontend);
    REQUIRE(produced.outcome == enroll::Outcome::kSuccess);
    server.report_injection(manufacturer_session,
                            device.identity.serial_number,
                            produced.issued_certificate->serial,
                            parties.clock + 10);

    // The same device now passes the registry gate in the field.
    enroll::AdversaryConfig field;
    field.random_seed = 32;
    const auto admitted = ks::run_operator_enrollment(
        parties, device, field, server, maintainer_session);
    CHECK(admitted.outcome == enroll::Outcome::kSuccess);
    REQUIRE(admitted.issued_certificate.has_value());
    CHECK(admitted.issued_certificate->subject == device.identity);

    SECTION("an expired maintainer session cannot open the gate") {
        ks::SessionToken stale = maintainer_session;
        enroll::AdversaryConfig cfg;
        parties.clock += 10000;
        CHECK_THROWS_AS(ks::run_operator_enrollment(parties, device, cfg,
                                                    server, stale),
                        AuthFailed);
    }
}
