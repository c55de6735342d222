#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "pqpki/cli/cli.hpp"

using namespace pqpki;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    RunResult r;
    r.code = cli::dispatch(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

int temp_counter = 0;

struct TempDir {
    std::string path;
    TempDir()
        : path("/tmp/pqpki-cli-" + std::to_string(::getpid()) + "-" +
               std::to_string(temp_counter++)) {
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const {
        return path + "/" + name;
    }
};

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

bool starts_with(const std::string& text, const std::string& prefix) {
    return text.rfind(prefix, 0) == 0;
}

bool ends_with(const std::string& text, const std::string& suffix) {
    return text.size() >= suffix.size() &&
           text.compare(text.size() - suffix.size(), suffix.size(), suffix) ==
               0;
}

}  // namespace

TEST_CASE("usage errors exit 2, domain errors exit 1") {
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"keygen"}).code == 2);
    CHECK(run_cli({"keygen", "--scheme", "nope", "--out", "x"}).code == 2);
    CHECK(run_cli({"mosca", "--x", "1"}).code == 2);
    CHECK(run_cli({"grover"}).code == 2);
    CHECK(run_cli({"grover", "--bits", "8", "--target", "4"}).code == 2);

    const RunResult help = run_cli({"--help"});
    CHECK(help.code == 0);
    CHECK(contains(help.out, "keygen"));
    CHECK(contains(help.out, "mosca"));

    const RunResult missing =
        run_cli({"sign", "--key", "/nonexistent/k", "--in", "/nonexistent/m",
                 "--out", "/nonexistent/s"});
    CHECK(missing.code == 1);
    CHECK(starts_with(missing.err, "IO_ERROR"));
}

TEST_CASE("keygen, sign and verify round trip through files") {
    TempDir dir;
    const std::string key = dir.file("k.key");
    const std::string pub = dir.file("k.pub");
    const std::string msg = dir.file("m.bin");
    const std::string sig_file = dir.file("m.sig");

    const RunResult kg = run_cli({"--seed", "7", "keygen", "--scheme", "xmss",
                                  "--h", "2", "--out", key, "--pub-out", pub});
    REQUIRE(kg.code == 0);
    CHECK(contains(kg.out, "wrote"));
    CHECK(contains(kg.out, "xmss-h2-n32-w16"));

    // the written artifact re-encodes to the same bytes
    const std::string key_text = read_text_file(key);
    CHECK(sig::armor_keypair(sig::dearmor_keypair(key_text)) == key_text);
    const std::string pub_text = read_text_file(pub);
    const sig::PublicKeyBundle bundle = sig::dearmor_public_bundle(pub_text);
    CHECK(sig::armor_public_bundle(bundle.descriptor, bundle.public_key) ==
          pub_text);

    write_file(msg, Bytes{1, 2, 3, 4, 5, 6, 7, 8});
    REQUIRE(run_cli({"sign", "--key", key, "--in", msg, "--out", sig_file})
                .code == 0);
    const std::string sig_text = read_text_file(sig_file);
    CHECK(sig::armor_signature(sig::dearmor_signature(sig_text)) == sig_text);

    const RunResult ok = run_cli(
        {"verify", "--public", pub, "--in", msg, "--sig", sig_file});
    CHECK(ok.code == 0);
    CHECK(ok.out == "VALID\n");
    CHECK(ok.err.empty());

    // a key pair file works as the verification input too
    CHECK(run_cli({"verify", "--public", key, "--in", msg, "--sig", sig_file})
              .code == 0);
    CHECK(run_cli({"verify", "--public", pub, "--in", msg, "--sig", sig_file,
                   "--accept-any"})
              .code == 0);

    const std::string other = dir.file("other.bin");
    write_file(other, Bytes{9, 9, 9});
    const RunResult bad = run_cli(
        {"verify", "--public", pub, "--in", other, "--sig", sig_file});
    CHECK(bad.code == 1);
    CHECK(bad.out == "INVALID\n");
    CHECK(starts_with(bad.err, "SIGNATURE_INVALID"));

    SECTION("signing state advances across invocations") {
        const std::string sig2 = dir.file("m2.sig");
        REQUIRE(run_cli({"sign", "--key", key, "--in", msg, "--out", sig2})
                    .code == 0);
        const auto first = sig::dearmor_signature(read_text_file(sig_file));
        const auto second = sig::dearmor_signature(read_text_file(sig2));
        REQUIRE(first.leaf_index.has_value());
        REQUIRE(second.leaf_index.has_value());
        CHECK(*first.leaf_index == 0);
        CHECK(*second.leaf_index == 1);

        const RunResult third = run_cli(
            {"--json", "sign", "--key", key, "--in", msg, "--out", sig2});
        REQUIRE(third.code == 0);
        const auto j = nlohmann::json::parse(third.out);
        CHECK(j["leafIndex"] == 2);
        CHECK(j["remainingSignatures"] == 1);
    }

    SECTION("a one-time key refuses its second signature") {
        const std::string wkey = dir.file("w.key");
        const std::string wsig = dir.file("w.sig");
        REQUIRE(run_cli({"--seed", "8", "keygen", "--scheme", "wots", "--out",
                         wkey})
                    .code == 0);
        REQUIRE(run_cli({"sign", "--key", wkey, "--in", msg, "--out", wsig})
                    .code == 0);
        const RunResult reuse =
            run_cli({"sign", "--key", wkey, "--in", msg, "--out", wsig});
        CHECK(reuse.code == 1);
        CHECK(starts_with(reuse.err, "ONE_TIME_KEY_REUSE"));
    }
}

TEST_CASE("seeded key generation is deterministic") {
    TempDir dir;
    const std::string a = dir.file("a.key");
    const std::string b = dir.file("b.key");
    const std::string c = dir.file("c.key");
    REQUIRE(run_cli({"--seed", "42", "keygen", "--scheme", "toydl", "--out", a})
                .code == 0);
    REQUIRE(run_cli({"--seed", "42", "keygen", "--scheme", "toydl", "--out", b})
                .code == 0);
    // --seed reaches the verb through fallthrough as well
    REQUIRE(run_cli({"keygen", "--scheme", "toydl", "--out", c, "--seed", "43"})
                .code == 0);
    CHECK(read_text_file(a) == read_text_file(b));
    CHECK(read_text_file(a) != read_text_file(c));
}

TEST_CASE("certificates issue and validate end to end") {
    TempDir dir;
    const std::string root_key = dir.file("root.key");
    const std::string root_cert = dir.file("root.cert");
    const std::string dev_key = dir.file("dev.key");
    const std::string dev_csr = dir.file("dev.csr");
    const std::string dev_cert = dir.file("dev.cert");

    REQUIRE(run_cli({"--seed", "11", "keygen", "--scheme", "hybrid", "--h",
                     "3", "--out", root_key})
                .code == 0);
    const RunResult self_sign =
        run_cli({"cert", "self-sign", "--key", root_key, "--cn", "root-1",
                 "--out", root_cert});
    REQUIRE(self_sign.code == 0);
    CHECK(contains(self_sign.out, "serial="));

    REQUIRE(run_cli({"--seed", "12", "keygen", "--scheme", "hybrid", "--h",
                     "2", "--out", dev_key})
                .code == 0);
    const RunResult csr = run_cli({"csr", "create", "--key", dev_key, "--cn",
                                   "gw-7", "--model", "gw-1000", "--serial",
                                   "SN-0007", "--out", dev_csr});
    REQUIRE(csr.code == 0);
    CHECK(contains(csr.out, "2 proofs"));

    REQUIRE(run_cli({"cert", "issue", "--ca-key", root_key, "--ca-cert",
                     root_cert, "--csr", dev_csr, "--out", dev_cert,
                     "--hybrid-required"})
                .code == 0);

    const RunResult valid = run_cli(
        {"cert", "validate", "--cert", dev_cert, "--anchor", root_cert});
    CHECK(valid.code == 0);
    CHECK(contains(valid.out, "PASS"));
    CHECK(ends_with(valid.out, "VALID\n"));
    CHECK(run_cli({"cert", "validate", "--cert", dev_cert, "--anchor",
                   root_cert, "--require-hybrid"})
              .code == 0);

    const RunResult pin = run_cli({"cert", "pin", "--cert", root_cert});
    REQUIRE(pin.code == 0);
    const std::string pin_hex = pin.out.substr(0, pin.out.size() - 1);
    CHECK(pin_hex ==
          cli::detail::to_hex(
              cert::pin_digest(cert::dearmor_certificate(
                  read_text_file(root_cert)))));
    CHECK(run_cli({"cert", "validate", "--cert", dev_cert, "--anchor",
                   root_cert, "--pin", pin_hex})
              .code == 0);

    const RunResult wrong_pin =
        run_cli({"cert", "validate", "--cert", dev_cert, "--anchor", root_cert,
                 "--pin", std::string(64, '0')});
    CHECK(wrong_pin.code == 1);
    CHECK(contains(wrong_pin.out, "INVALID"));
    CHECK(starts_with(wrong_pin.err, "CHAIN_INVALID"));

    const RunResult expired =
        run_cli({"cert", "validate", "--cert", dev_cert, "--anchor", root_cert,
                 "--at", "1800000000"});
    CHECK(expired.code == 1);

    const RunResult show = run_cli({"cert", "show", "--cert", dev_cert});
    REQUIRE(show.code == 0);
    CHECK(contains(show.out, "subject-cn=gw-7"));
    CHECK(contains(show.out, "subject-model=gw-1000"));
    CHECK(contains(show.out, "hybrid-required=true"));
    CHECK(contains(show.out, "key[0]=toy-dl-64"));
    CHECK(contains(show.out, "key[1]=xmss-h2-n32-w16"));

    const RunResult show_json =
        run_cli({"--json", "cert", "show", "--cert", dev_cert});
    REQUIRE(show_json.code == 0);
    const auto j = nlohmann::json::parse(show_json.out);
    CHECK(j["subject"]["commonName"] == "gw-7");
    CHECK(j["keys"].size() == 2);
    CHECK(j["extensions"]["hybridRequired"] == true);

    SECTION("issuance journals grow with each certificate") {
        const std::string journal = dir.file("journal.bin");
        const std::string extra = dir.file("extra.cert");
        REQUIRE(run_cli({"cert", "issue", "--ca-key", root_key, "--ca-cert",
                         root_cert, "--csr", dev_csr, "--out", extra,
                         "--journal", journal})
                    .code == 0);
        const auto first_size = std::filesystem::file_size(journal);
        CHECK(first_size > 0);
        REQUIRE(run_cli({"cert", "issue", "--ca-key", root_key, "--ca-cert",
                         root_cert, "--csr", dev_csr, "--out", extra,
                         "--journal", journal})
                    .code == 0);
        CHECK(std::filesystem::file_size(journal) > first_size);
    }
}

TEST_CASE("revocation lists drive check, merge and firmware bundles") {
    TempDir dir;
    const std::string root_key = dir.file("root.key");
    const std::string root_cert = dir.file("root.cert");
    const std::string dev_key = dir.file("dev.key");
    const std::string dev_csr = dir.file("dev.csr");
    const std::string dev_cert = dir.file("dev.cert");
    const std::string rl1 = dir.file("rl1.txt");
    const std::string rl2 = dir.file("rl2.txt");

    REQUIRE(run_cli({"--seed", "21", "keygen", "--scheme", "xmss", "--h", "3",
                     "--out", root_key})
                .code == 0);
    REQUIRE(run_cli({"cert", "self-sign", "--key", root_key, "--cn", "root-2",
                     "--out", root_cert})
                .code == 0);
    REQUIRE(run_cli({"--seed", "22", "keygen", "--scheme", "toydl", "--out",
                     dev_key})
                .code == 0);
    REQUIRE(run_cli({"csr", "create", "--key", dev_key, "--cn", "gw-9",
                     "--model", "gw-2000", "--serial", "SN-0009", "--out",
                     dev_csr})
                .code == 0);
    REQUIRE(run_cli({"cert", "issue", "--ca-key", root_key, "--ca-cert",
                     root_cert, "--csr", dev_csr, "--out", dev_cert})
                .code == 0);
    const auto dev_json = nlohmann::json::parse(
        run_cli({"--json", "cert", "show", "--cert", dev_cert}).out);
    const std::string dev_serial = dev_json["serial"].get<std::string>();

    const RunResult issue1 =
        run_cli({"revoke", "issue", "--key", root_key, "--cn", "root-2",
                 "--scope", "model:gw-2000", "--issued-at", "1700000100",
                 "--out", rl1});
    REQUIRE(issue1.code == 0);
    CHECK(contains(issue1.out, "version=1"));

    const RunResult hit = run_cli({"revoke", "check", "--rl", rl1, "--cert",
                                   dev_cert, "--root", root_cert});
    CHECK(hit.code == 0);
    CHECK(hit.out == "REVOKED\n");
    const RunResult miss = run_cli(
        {"revoke", "check", "--rl", rl1, "--cert", root_cert});
    CHECK(miss.code == 0);
    CHECK(miss.out == "NOT_REVOKED\n");
    const RunResult bad_root = run_cli({"revoke", "check", "--rl", rl1,
                                        "--cert", dev_cert, "--root",
                                        dev_cert});
    CHECK(bad_root.code == 1);
    CHECK(starts_with(bad_root.err, "SIGNATURE_INVALID"));

    REQUIRE(run_cli({"revoke", "issue", "--key", root_key, "--cn", "root-2",
                     "--scope", "serial:" + dev_serial, "--reason",
                     "superseded", "--prior-version", "1", "--issued-at",
                     "1700000200", "--out", rl2})
                .code == 0);

    const std::string merged = dir.file("merged.txt");
    const RunResult merge = run_cli({"revoke", "merge", "--current", rl1,
                                     "--incoming", rl2, "--root", root_cert,
                                     "--out", merged});
    REQUIRE(merge.code == 0);
    CHECK(contains(merge.out, "version=2"));

    const RunResult rollback = run_cli({"revoke", "merge", "--current", merged,
                                        "--incoming", rl1, "--root", root_cert,
                                        "--out", dir.file("x.txt")});
    CHECK(rollback.code == 1);
    CHECK(starts_with(rollback.err, "ROLLBACK_REJECTED"));

    SECTION("ca scopes revoke everything the named issuer signed") {
        const std::string rl3 = dir.file("rl3.txt");
        REQUIRE(run_cli({"revoke", "issue", "--key", root_key, "--cn",
                         "root-2", "--scope", "ca:maintainer:root-2",
                         "--prior-version", "2", "--issued-at", "1700000300",
                         "--out", rl3})
                    .code == 0);
        CHECK(run_cli({"revoke", "check", "--rl", rl3, "--cert", root_cert})
                  .out == "REVOKED\n");
        CHECK(run_cli({"revoke", "check", "--rl", rl3, "--cert", dev_cert})
                  .out == "REVOKED\n");
    }

    SECTION("malformed scopes are domain errors") {
        CHECK(run_cli({"revoke", "issue", "--key", root_key, "--cn", "root-2",
                       "--scope", "bogus", "--out", dir.file("y.txt")})
                  .code == 1);
        const RunResult odd =
            run_cli({"revoke", "issue", "--key", root_key, "--cn", "root-2",
                     "--scope", "serial:zz", "--out", dir.file("y.txt")});
        CHECK(odd.code == 1);
        CHECK(starts_with(odd.err, "PARAMETER_ERROR"));
    }

    SECTION("firmware bundles install once and refuse rollback") {
        const std::string firmware = dir.file("fw.bin");
        const std::string bundle1 = dir.file("b1.txt");
        const std::string bundle2 = dir.file("b2.txt");
        const std::string state = dir.file("device-state");
        write_file(firmware, Bytes{0xFE, 0xED, 0xC0, 0xDE});

        REQUIRE(run_cli({"bundle", "pack", "--firmware", firmware, "--rl", rl1,
                         "--key", root_key, "--out", bundle1})
                    .code == 0);
        const RunResult apply1 =
            run_cli({"bundle", "apply", "--bundle", bundle1, "--anchor",
                     root_cert, "--state-dir", state});
        REQUIRE(apply1.code == 0);
        CHECK(contains(apply1.out, "rl-version=1"));
        CHECK(read_file(state + "/firmware.bin") ==
              Bytes{0xFE, 0xED, 0xC0, 0xDE});

        // the same version again is a rollback, not an update
        const RunResult again =
            run_cli({"bundle", "apply", "--bundle", bundle1, "--anchor",
                     root_cert, "--state-dir", state});
        CHECK(again.code == 1);
        CHECK(starts_with(again.err, "ROLLBACK_REJECTED"));

        REQUIRE(run_cli({"bundle", "pack", "--firmware", firmware, "--rl", rl2,
                         "--key", root_key, "--out", bundle2})
                    .code == 0);
        const RunResult apply2 =
            run_cli({"bundle", "apply", "--bundle", bundle2, "--anchor",
                     root_cert, "--state-dir", state});
        CHECK(apply2.code == 0);
        CHECK(contains(apply2.out, "rl-version=2"));
        CHECK(cert::dearmor_revocation_list(read_text_file(state + "/rl.txt"))
                  .version == 2);
    }

    SECTION("the root key file carries its consumed leaves forward") {
        // every signing invocation above rewrote root.key with advanced state
        const sig::KeyPair kp =
            sig::dearmor_keypair(read_text_file(root_key));
        REQUIRE(kp.signer_state.has_value());
        CHECK(*kp.signer_state >= 4);  // self-sign, issue, two lists
        CHECK(sig::signatures_remaining(kp) <= 4);
    }
}

TEST_CASE("enrollment scenarios run from files and replay transcripts") {
    TempDir dir;
    const std::string classical = dir.file("classical.scenario");
    const std::string hybrid = dir.file("hybrid.scenario");
    const std::string tr_classical = dir.file("classical.transcript");
    const std::string tr_hybrid = dir.file("hybrid.transcript");

    enroll::Scenario scenario;
    scenario.seed = 5;
    scenario.classical_only = true;
    scenario.adversary.record_for_later = true;
    write_text_file(classical, enroll::serialize_scenario(scenario));
    scenario.seed = 6;
    scenario.classical_only = false;
    write_text_file(hybrid, enroll::serialize_scenario(scenario));

    const RunResult run1 = run_cli({"enroll", "run", "--scenario", classical,
                                    "--transcript-out", tr_classical});
    REQUIRE(run1.code == 0);
    CHECK(contains(run1.out, "outcome=SUCCESS"));
    CHECK(contains(run1.out, "certificate-serial="));

    const RunResult run2 = run_cli({"enroll", "run", "--scenario", hybrid,
                                    "--transcript-out", tr_hybrid});
    REQUIRE(run2.code == 0);
    CHECK(contains(run2.out, "outcome=SUCCESS"));

    // the recorded classical handshake falls to a bounded solver
    const RunResult sndl1 =
        run_cli({"sndl", "replay", "--transcript", tr_classical});
    REQUIRE(sndl1.code == 0);
    CHECK(contains(sndl1.out, "status=RECOVERED"));
    CHECK_FALSE(contains(sndl1.out, "recovered-payloads=0\n"));

    // the hybrid handshake does not
    const RunResult sndl2 =
        run_cli({"sndl", "replay", "--transcript", tr_hybrid});
    REQUIRE(sndl2.code == 0);
    CHECK(contains(sndl2.out, "status=INFEASIBLE"));

    // starving the attacker of budget protects even the weak group
    const RunResult starved = run_cli(
        {"sndl", "replay", "--transcript", tr_classical, "--budget", "100"});
    REQUIRE(starved.code == 0);
    CHECK(contains(starved.out, "status=INFEASIBLE"));

    SECTION("the seed flag overrides the scenario seed deterministically") {
        const std::string a = dir.file("a.transcript");
        const std::string b = dir.file("b.transcript");
        const std::string c = dir.file("c.transcript");
        REQUIRE(run_cli({"--seed", "99", "enroll", "run", "--scenario", hybrid,
                         "--transcript-out", a})
                    .code == 0);
        REQUIRE(run_cli({"--seed", "99", "enroll", "run", "--scenario", hybrid,
                         "--transcript-out", b})
                    .code == 0);
        REQUIRE(run_cli({"--seed", "100", "enroll", "run", "--scenario",
                         hybrid, "--transcript-out", c})
                    .code == 0);
        CHECK(read_text_file(a) == read_text_file(b));
        CHECK(read_text_file(a) != read_text_file(c));
        CHECK(contains(read_text_file(a), "seed=99"));
    }

    SECTION("targeted attacks surface in the outcome") {
        const std::string attacked = dir.file("attacked.scenario");
        enroll::Scenario bad;
        bad.seed = 7;
        bad.attack = "substitute-frontend";
        write_text_file(attacked, enroll::serialize_scenario(bad));
        const RunResult r =
            run_cli({"enroll", "run", "--scenario", attacked});
        REQUIRE(r.code == 0);
        CHECK(contains(r.out, "outcome=PINNING_MISMATCH"));
    }

    SECTION("mirror sync without the hardware token is refused") {
        const std::string mirror = dir.file("mirror.scenario");
        enroll::Scenario m;
        m.operation = "mirror-sync";
        m.seed = 8;
        m.token_present = false;
        write_text_file(mirror, enroll::serialize_scenario(m));
        const RunResult r = run_cli({"enroll", "run", "--scenario", mirror});
        REQUIRE(r.code == 0);
        CHECK(contains(r.out, "outcome=TOKEN_REQUIRED"));
    }

    SECTION("json documents carry the same outcome") {
        const RunResult r = run_cli(
            {"--json", "enroll", "run", "--scenario", hybrid});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j["outcome"] == "SUCCESS");
        CHECK(j["messages"].get<std::size_t>() > 0);
        CHECK(j["certificateSerial"].is_string());
    }
}

TEST_CASE("bench verbs emit pinned tables") {
    TempDir dir;
    const std::string csv_file = dir.file("t.csv");
    const std::string kHeader =
        "Algorithm,Variant,Key generation µs,Signing µs,"
        "Signature verification µs,Public key size byte,"
        "Signature size byte,Secret key size byte";

    const RunResult run_csv =
        run_cli({"bench", "run", "--scheme", "wots", "--iterations", "3",
                 "--out", csv_file});
    REQUIRE(run_csv.code == 0);
    const std::string table = read_text_file(csv_file);
    CHECK(starts_with(table, kHeader + "\n"));
    CHECK(contains(table, "WOTS+,wots+-n32-w16,"));
    CHECK(contains(table, ",64,2144,64\n"));

    const RunResult run_md = run_cli({"bench", "run", "--scheme", "toydl",
                                      "--iterations", "3", "--format",
                                      "markdown"});
    REQUIRE(run_md.code == 0);
    CHECK(starts_with(run_md.out, "| Algorithm | Variant |"));
    CHECK(contains(run_md.out, "| 8 | 16 | 8 |"));

    const RunResult reference = run_cli({"bench", "reference"});
    REQUIRE(reference.code == 0);
    CHECK(reference.out == bench::reference_csv());
    CHECK(reference.out ==
          read_text_file(PQPKI_SOURCE_DIR "/data/reference_table.csv"));

    const std::string ref_file = dir.file("ref.csv");
    REQUIRE(run_cli({"bench", "reference", "--out", ref_file}).code == 0);
    CHECK(read_text_file(ref_file) == bench::reference_csv());

    const RunResult ref_json = run_cli({"--json", "bench", "reference"});
    REQUIRE(ref_json.code == 0);
    const auto j = nlohmann::json::parse(ref_json.out);
    REQUIRE(j["rows"].size() == 13);
    CHECK(j["rows"][0]["algorithm"] == "Falcon");
    CHECK(j["rows"][1]["classicalBits"] == "176/174");
    CHECK(j["rows"][1]["securityBasis"] == "SIS/LWE");

    const RunResult bad_iters =
        run_cli({"bench", "run", "--scheme", "toydl", "--iterations", "2"});
    CHECK(bad_iters.code == 1);
    CHECK(starts_with(bad_iters.err, "PARAMETER_ERROR"));
}

TEST_CASE("planning verbs print the pinned numbers") {
    CHECK(run_cli({"mosca", "--x", "5", "--y", "3", "--z", "7"}).out ==
          "AT_RISK\n");
    CHECK(run_cli({"mosca", "--x", "4", "--y", "3", "--z", "7"}).out ==
          "SAFE_MARGIN(0)\n");
    CHECK(run_cli({"mosca", "--x", "1", "--y", "1", "--z", "10"}).out ==
          "SAFE_MARGIN(8)\n");
    const RunResult negative =
        run_cli({"mosca", "--x", "-1", "--y", "1", "--z", "1"});
    CHECK(negative.code == 1);
    CHECK(starts_with(negative.err, "PARAMETER_ERROR"));

    CHECK(run_cli({"grover", "--bits", "256"}).out == "128\n");
    CHECK(run_cli({"grover", "--bits", "255"}).out == "127\n");
    CHECK(run_cli({"grover", "--target", "128"}).out == "256\n");
    CHECK(run_cli({"grover", "--bits", "0"}).code == 1);

    const RunResult shor = run_cli({"shor-estimate", "--n", "2048"});
    REQUIRE(shor.code == 0);
    CHECK(contains(shor.out, "logical-qubits=6189.056"));
    CHECK(contains(shor.out, "toffoli-count=48502931.456"));
    CHECK(contains(shor.out, "measurement-depth=2143289344"));
    CHECK(contains(shor.out, "8 hours"));

    const RunResult shor_json =
        run_cli({"--json", "shor-estimate", "--n", "2048"});
    REQUIRE(shor_json.code == 0);
    const auto j = nlohmann::json::parse(shor_json.out);
    CHECK_THAT(j["logicalQubits"].get<double>(),
               Catch::Matchers::WithinAbs(6189.056, 0.01));
    CHECK(contains(j["note"].get<std::string>(), "20 million"));

    CHECK(run_cli({"shor-estimate", "--n", "1"}).code == 1);
}

TEST_CASE("keyserver verbs persist state across invocations") {
    TempDir dir;
    const std::string store = dir.file("store");
    const std::string manu_token = dir.file("manu.tok");
    const std::string maint_token = dir.file("maint.tok");
    const std::string serial_hex = "00112233445566778899aabbccddeeff";

    REQUIRE(run_cli({"--seed", "31", "keyserver", "register", "--store", store,
                     "--party", "maint", "--password", "pw-a", "--role",
                     "maintainer"})
                .code == 0);
    REQUIRE(run_cli({"--seed", "32", "keyserver", "register", "--store", store,
                     "--party", "manu", "--password", "pw-b", "--role",
                     "manufacturer"})
                .code == 0);

    const RunResult duplicate =
        run_cli({"--seed", "33", "keyserver", "register", "--store", store,
                 "--party", "manu", "--password", "pw-c", "--role",
                 "manufacturer"});
    CHECK(duplicate.code == 1);
    CHECK(starts_with(duplicate.err, "DUPLICATE_PARTY"));

    const RunResult auth =
        run_cli({"--seed", "34", "keyserver", "auth", "--store", store,
                 "--party", "manu", "--password", "pw-b", "--ttl", "600",
                 "--now", "1000", "--token-out", manu_token});
    REQUIRE(auth.code == 0);
    CHECK(auth.out == read_text_file(manu_token));

    REQUIRE(run_cli({"keyserver", "report", "--store", store, "--token-file",
                     manu_token, "--device-serial", "SN-1", "--cert-serial",
                     serial_hex, "--now", "1100"})
                .code == 0);

    REQUIRE(run_cli({"--seed", "35", "keyserver", "auth", "--store", store,
                     "--party", "maint", "--password", "pw-a", "--ttl", "600",
                     "--now", "1200", "--token-out", maint_token})
                .code == 0);

    const RunResult query =
        run_cli({"keyserver", "query", "--store", store, "--token-file",
                 maint_token, "--device-serial", "SN-1", "--now", "1300"});
    REQUIRE(query.code == 0);
    CHECK(contains(query.out, "reporter=manu"));
    CHECK(contains(query.out, "cert-serial=" + serial_hex));
    CHECK(contains(query.out, "reports=1"));

    const RunResult forbidden =
        run_cli({"keyserver", "query", "--store", store, "--token-file",
                 manu_token, "--device-serial", "SN-1", "--now", "1300"});
    CHECK(forbidden.code == 1);
    CHECK(starts_with(forbidden.err, "ACL_DENIED"));

    const RunResult expired =
        run_cli({"keyserver", "report", "--store", store, "--token-file",
                 manu_token, "--device-serial", "SN-2", "--cert-serial",
                 serial_hex, "--now", "999999"});
    CHECK(expired.code == 1);
    CHECK(starts_with(expired.err, "AUTH_FAILED"));

    const RunResult wrong_pw =
        run_cli({"--seed", "36", "keyserver", "auth", "--store", store,
                 "--party", "manu", "--password", "nope", "--now", "1400"});
    CHECK(wrong_pw.code == 1);
    CHECK(starts_with(wrong_pw.err, "AUTH_FAILED"));

    const RunResult query_json =
        run_cli({"--json", "keyserver", "query", "--store", store,
                 "--token-file", maint_token, "--device-serial", "SN-1",
                 "--now", "1350"});
    REQUIRE(query_json.code == 0);
    const auto j = nlohmann::json::parse(query_json.out);
    REQUIRE(j["reports"].size() == 1);
    CHECK(j["reports"][0]["reporter"] == "manu");
    CHECK(j["reports"][0]["certSerial"] == serial_hex);

    const RunResult odd_serial =
        run_cli({"keyserver", "report", "--store", store, "--token-file",
                 manu_token, "--device-serial", "SN-3", "--cert-serial",
                 "abc", "--now", "1500"});
    CHECK(odd_serial.code == 1);
    CHECK(starts_with(odd_serial.err, "PARAMETER_ERROR"));
}

TEST_CASE("json mode emits one parseable document per invocation") {
    TempDir dir;

    const RunResult ok =
        run_cli({"--json", "mosca", "--x", "5", "--y", "3", "--z", "7"});
    REQUIRE(ok.code == 0);
    const auto j = nlohmann::json::parse(ok.out);
    CHECK(j["atRisk"] == true);
    CHECK(j["verdict"] == "AT_RISK");

    const RunResult failed =
        run_cli({"--json", "mosca", "--x", "-1", "--y", "0", "--z", "1"});
    CHECK(failed.code == 1);
    const auto e = nlohmann::json::parse(failed.out);
    CHECK(e["error"] == "PARAMETER_ERROR");
    CHECK(e.contains("message"));

    const std::string key = dir.file("k.key");
    const RunResult keygen =
        run_cli({"--json", "--seed", "3", "keygen", "--scheme", "xmss", "--h",
                 "2", "--out", key});
    REQUIRE(keygen.code == 0);
    const auto kg = nlohmann::json::parse(keygen.out);
    CHECK(kg["scheme"] == "xmss-h2-n32-w16");
    CHECK(kg["signatureCapacity"] == 4);
    CHECK(kg["out"] == key);

    const std::string msg = dir.file("m.bin");
    const std::string sig_file = dir.file("m.sig");
    write_file(msg, Bytes{1, 2, 3});
    const RunResult sign = run_cli(
        {"--json", "sign", "--key", key, "--in", msg, "--out", sig_file});
    REQUIRE(sign.code == 0);
    const auto sg = nlohmann::json::parse(sign.out);
    CHECK(sg["leafIndex"] == 0);
    CHECK(sg["remainingSignatures"] == 3);

    const std::string other = dir.file("o.bin");
    write_file(other, Bytes{4, 5, 6});
    const RunResult invalid = run_cli({"--json", "verify", "--public", key,
                                       "--in", other, "--sig", sig_file});
    CHECK(invalid.code == 1);
    CHECK(nlohmann::json::parse(invalid.out)["valid"] == false);

    // toydl carries no one-time state; those fields are null
    const std::string tkey = dir.file("t.key");
    REQUIRE(run_cli({"--json", "--seed", "4", "keygen", "--scheme", "toydl",
                     "--out", tkey})
                .code == 0);
    const RunResult tsign = run_cli(
        {"--json", "sign", "--key", tkey, "--in", msg, "--out", sig_file});
    REQUIRE(tsign.code == 0);
    const auto ts = nlohmann::json::parse(tsign.out);
    CHECK(ts["leafIndex"].is_null());
    CHECK(ts["remainingSignatures"].is_null());
}

TEST_CASE("config files supply defaults and flags override them") {
    TempDir dir;
    const std::string cfg = dir.file("defaults.ini");
    write_text_file(cfg, "[mosca]\nx=1\ny=1\nz=10\n");

    const RunResult from_config = run_cli({"--config", cfg, "mosca"});
    CHECK(from_config.code == 0);
    CHECK(from_config.out == "SAFE_MARGIN(8)\n");

    const RunResult flag_wins =
        run_cli({"--config", cfg, "mosca", "--z", "3"});
    CHECK(flag_wins.code == 0);
    CHECK(flag_wins.out == "AT_RISK\n");

    // top-level options load from the config root section
    const std::string cfg2 = dir.file("json.ini");
    write_text_file(cfg2, "json=true\n[mosca]\nx=5\ny=3\nz=7\n");
    const RunResult as_json = run_cli({"--config", cfg2, "mosca"});
    REQUIRE(as_json.code == 0);
    CHECK(nlohmann::json::parse(as_json.out)["verdict"] == "AT_RISK");
}
