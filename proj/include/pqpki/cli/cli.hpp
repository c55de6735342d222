#ifndef PQPKI_CLI_CLI_HPP
#define PQPKI_CLI_CLI_HPP

// Command-line front end.  Every verb runs in a single process invocation,
// reads and writes armored file artifacts, and prints either human-readable
// lines or, with --json, exactly one JSON document on stdout.
//
// Exit codes: 0 success, 1 domain failure (stable error code on stderr),
// 2 usage error.  Schemes that consume signing state (WOTS+, XMSS, hybrids
// over XMSS) have their key file rewritten after every signing operation so
// the next invocation sees the advanced state.

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pqpki/base64.hpp"
#include "pqpki/bench/bench.hpp"
#include "pqpki/bytes.hpp"
#include "pqpki/cert/certmodel.hpp"
#include "pqpki/enroll/enrollment.hpp"
#include "pqpki/errors.hpp"
#include "pqpki/io.hpp"
#include "pqpki/keyserver/keyserver.hpp"
#include "pqpki/party.hpp"
#include "pqpki/rev/revocation.hpp"
#include "pqpki/rng.hpp"
#include "pqpki/sig/sigcore.hpp"

namespace pqpki::cli {

// Shared state for one invocation.  Subcommand callbacks fire while CLI11
// parses; they only stash the work as `action`, which dispatch() runs after
// parsing succeeded so usage errors and domain errors stay on separate exit
// codes.
struct Context {
    Context(std::ostream& out_stream, std::ostream& err_stream)
        : out(out_stream), err(err_stream) {}
    std::ostream& out;
    std::ostream& err;
    bool json = false;
    std::optional<std::uint64_t> seed;
    std::function<int()> action;
};

namespace detail {

inline std::string to_hex(ByteView bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out += digits[b >> 4];
        out += digits[b & 0x0F];
    }
    return out;
}

inline Bytes from_hex(const std::string& text) {
    if (text.size() % 2 != 0)
        throw ParameterError("hex value needs an even number of digits");
    const auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ParameterError("invalid hex digit");
    };
    Bytes out(text.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>((nibble(text[2 * i]) << 4) |
                                           nibble(text[2 * i + 1]));
    return out;
}

inline SeedRng rng_for(const Context& ctx) {
    return ctx.seed ? SeedRng(*ctx.seed) : SeedRng::from_system_entropy();
}

inline const std::vector<std::string>& scheme_names() {
    static const std::vector<std::string> names = {
        "toydl", "toydl-breakable", "wots", "xmss", "hybrid"};
    return names;
}

struct SchemeShape {
    std::uint32_t h = 10;
    std::uint32_t n = 32;
    std::uint32_t w = 16;
};

inline void add_shape_options(CLI::App* cmd, SchemeShape& shape) {
    // the default help flag claims -h, which CLI11 treats as a clash with
    // the one-letter long option --h
    cmd->set_help_flag("--help", "print this help message and exit");
    cmd->add_option("--h", shape.h, "tree height (xmss, hybrid)");
    cmd->add_option("--n", shape.n, "hash output bytes (wots, xmss, hybrid)");
    cmd->add_option("--w", shape.w, "Winternitz parameter (wots, xmss, hybrid)");
}

inline sig::SchemeDescriptor scheme_from(const std::string& name,
                                         const SchemeShape& shape) {
    if (name == "toydl") return sig::toy_dl_default();
    if (name == "toydl-breakable") return sig::toy_dl_breakable();
    if (name == "wots") return sig::wots_plus(shape.n, shape.w);
    if (name == "xmss") return sig::xmss_mt(shape.h, shape.n, shape.w);
    if (name == "hybrid")
        return sig::hybrid(sig::toy_dl_default(),
                           sig::xmss_mt(shape.h, shape.n, shape.w));
    throw ParameterError("unknown scheme: " + name);
}

inline sig::KeyPair load_keypair(const std::string& path) {
    return sig::dearmor_keypair(read_text_file(path));
}

// Signing advances one-time state; the caller's file must reflect that or
// the next invocation would reuse a spent leaf.
inline void store_keypair(const std::string& path, const sig::KeyPair& kp) {
    write_text_file(path, sig::armor_keypair(kp));
}

inline cert::Certificate load_certificate(const std::string& path) {
    return cert::dearmor_certificate(read_text_file(path));
}

inline cert::RevocationReason reason_from(const std::string& name) {
    if (name == "compromise") return cert::RevocationReason::kCompromise;
    if (name == "expiry-policy") return cert::RevocationReason::kExpiryPolicy;
    if (name == "superseded") return cert::RevocationReason::kSuperseded;
    throw ParameterError("unknown revocation reason: " + name);
}

// serial:<32 hex digits> | model:<device model> | ca:<role>:<common name>
inline cert::RevocationScope scope_from(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ParameterError("scope must look like kind:value");
    const std::string kind = text.substr(0, colon);
    const std::string value = text.substr(colon + 1);
    if (kind == "serial") {
        cert::SerialScope scope{from_hex(value)};
        if (scope.serial.size() != 16)
            throw ParameterError("serial scope needs exactly 16 bytes of hex");
        return scope;
    }
    if (kind == "model") {
        if (value.empty()) throw ParameterError("model scope needs a name");
        return cert::DeviceModelScope{value};
    }
    if (kind == "ca") {
        const auto split = value.find(':');
        if (split == std::string::npos)
            throw ParameterError("ca scope looks like ca:<role>:<common name>");
        cert::SubjectInfo ca;
        ca.role = cert::role_from_name(value.substr(0, split));
        ca.common_name = value.substr(split + 1);
        if (ca.common_name.empty())
            throw ParameterError("ca scope needs a common name");
        return cert::CaScope{ca};
    }
    throw ParameterError("unknown scope kind: " + kind);
}

inline std::uint64_t now_or(std::uint64_t given) {
    if (given != 0) return given;
    return static_cast<std::uint64_t>(std::time(nullptr));
}

inline void load_server_state(ks::KeyServer& server, const std::string& dir) {
    const auto maybe = [](const std::function<void()>& fn) {
        try {
            fn();
        } catch (const IoError&) {
            // first run: nothing stored yet
        }
    };
    maybe([&] { server.load_credentials(dir + "/credentials.txt"); });
    maybe([&] { server.load_sessions(dir + "/sessions.txt"); });
    maybe([&] { server.load_reports(dir + "/reports.txt"); });
}

inline void save_server_state(const ks::KeyServer& server,
                              const std::string& dir) {
    std::filesystem::create_directories(dir);
    server.save_credentials(dir + "/credentials.txt");
    server.save_sessions(dir + "/sessions.txt");
    server.save_reports(dir + "/reports.txt");
}

inline ks::SessionToken token_from_file(const std::string& path) {
    std::string text = read_text_file(path);
    while (!text.empty() &&
           (text.back() == '\n' || text.back() == '\r' || text.back() == ' '))
        text.pop_back();
    return ks::decode_session_token(base64_decode(text));
}

inline void emit(Context& ctx, const nlohmann::json& doc,
                 const std::function<void()>& text) {
    if (ctx.json)
        ctx.out << doc.dump(2) << "\n";
    else
        text();
}

inline nlohmann::json subject_json(const cert::SubjectInfo& s) {
    nlohmann::json j;
    j["commonName"] = s.common_name;
    j["role"] = cert::role_name(s.role);
    if (!s.device_model.empty()) j["deviceModel"] = s.device_model;
    if (!s.serial_number.empty()) j["serialNumber"] = s.serial_number;
    return j;
}

}  // namespace detail

// --- key and signature verbs -----------------------------------------------------

inline void add_keygen(CLI::App& app, Context& ctx) {
    struct Opts {
        std::string scheme;
        detail::SchemeShape shape;
        std::string out_path;
        std::string pub_out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("keygen", "generate a signing key pair");
    cmd->fallthrough();
    cmd->add_option("--scheme", o->scheme, "signature scheme")
        ->required()
        ->check(CLI::IsMember(detail::scheme_names()));
    detail::add_shape_options(cmd, o->shape);
    cmd->add_option("--out", o->out_path, "armored key pair file")->required();
    cmd->add_option("--pub-out", o->pub_out, "armored public bundle file");
    cmd->callback([&ctx, o] {
        ctx.action = [&ctx, o]() -> int {
            const sig::SchemeDescriptor d =
                detail::scheme_from(o->scheme, o->shape);
            SeedRng rng = detail::rng_for(ctx);
            sig::KeyPair kp = sig::keygen(d, rng);
            write_text_file(o->out_path, sig::armor_keypair(kp));
            if (!o->pub_out.empty())
                write_text_file(o->pub_out,
                                sig::armor_public_bundle(d, kp.public_key));
            const auto capacity = sig::signature_capacity(d);
            nlohmann::json j;
            j["out"] = o->out_path;
            j["publicKeyBytes"] = sig::public_key_bytes(kp);
            j["scheme"] = d.display_name;
            j["signatureCapacity"] =
                capacity ? nlohmann::json(*capacity) : nlohmann::json(nullptr);
            detail::emit(ctx, j, [&] {
                ctx.out << "wrote " << o->out_path << " (" << d.display_name
                        << ")\n";
            });
            return 0;
        };
    });
}

inline void add_sign(CLI::App& app, Context& ctx) {
    struct Opts {
        std::string key_path;
        std::string in_path;
        std::string sig_out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("sign", "sign a file");
    cmd->fallthrough();
    cmd->add_option("--key", o->key_path, "armored key pair file")->required();
    cmd->add_option("--in", o->in_path, "message file")->required();
    cmd->add_option("--out", o->sig_out, "armored signature file")->required();
    cmd->callback([&ctx, o] {
        ctx.action = [&ctx, o]() -> int {
            sig::KeyPair kp = detail::load_keypair(o->key_path);
            const Bytes message = read_file(o->in_path);
            const sig::SignatureValue sv = sig::sign(kp, message);
            write_text_file(o->sig_out, sig::armor_signature(sv));
            detail::store_keypair(o->key_path, kp);
            const auto remaining = sig::signatures_remaining(kp);
            nlohmann::json j;
            j["leafIndex"] = sv.leaf_index
                                 ? nlohmann::json(*sv.leaf_index)
                                 : nlohmann::json(nullptr);
            j["out"] = o->sig_out;
            j["remainingSignatures"] = sig::signature_capacity(kp.descriptor)
                                           ? nlohmann::json(remaining)
                                           : nlohmann::json(nullptr);
            j["signatureBytes"] = sig::signature_payload_bytes(sv);
            detail::emit(ctx, j, [&] {
                ctx.out << "signed " << o->in_path << " -> " << o->sig_out
                        << "\n";
            });
            return 0;
        };
    });
}

inline void add_verify(CLI::App& app, Context& ctx) {
    struct Opts {
        std::string public_path;
        std::string in_path;
        std::string sig_path;
        bool accept_any = false;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("verify", "verify a detached signature");
    cmd->fallthrough();
    cmd->add_option("--public", o->public_path,
                    "armored public bundle or key pair file")
        ->required();
    cmd->add_option("--in", o->in_path, "message file")->required();
    cmd->add_option("--sig", o->sig_path, "armored signature file")->required();
    cmd->add_flag("--accept-any", o->accept_any,
                  "accept a hybrid when one component verifies");
    cmd->callback([&ctx, o] {
        ctx.action = [&ctx, o]() -> int {
            const std::string text = read_text_file(o->public_path);
            sig::SchemeDescriptor descriptor;
            Bytes public_key;
            try {
                const sig::PublicKeyBundle bundle =
                    sig::dearmor_public_bundle(text);
                descriptor = bundle.descriptor;
                public_key = bundle.public_key;
            } catch (const Error&) {
                const sig::KeyPair kp = sig::dearmor_keypair(text);
                descriptor = kp.descriptor;
                public_key = kp.public_key;
            }
            const Bytes message = read_file(o->in_path);
            const sig::SignatureValue sv =
                sig::dearmor_signature(read_text_file(o->sig_path));
            const auto mode = o->accept_any ? sig::VerifyMode::kAcceptAny
                                            : sig::VerifyMode::kRequireBoth;
            const bool valid =
                sig::verify(public_key, descriptor, message, sv, mode);
            nlohmann::json j;
            j["valid"] = valid;
            detail::emit(ctx, j, [&] {
                ctx.out << (valid ? "VALID" : "INVALID") << "\n";
            });
            if (!valid) {
                ctx.err << "SIGNATURE_INVALID: signature does not verify\n";
                return 1;
            }
            return 0;
        };
    });
}

// --- certificate verbs -----------------------------------------------------------

inline void add_cert(CLI::App& app, Context& ctx) {
    auto* cert_cmd =
        app.add_subcommand("cert", "issue, inspect and validate certificates");
    cert_cmd->fallthrough();
    cert_cmd->require_subcommand(1);

    {
        struct Opts {
            std::string key_path;
            std::string cn;
            std::uint64_t issued_at = 1700000000;
            std::uint64_t days = 3650;
            std::string journal_path;
            std::string out_path;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = cert_cmd->add_subcommand("self-sign",
                                             "create a maintainer trust root");
        cmd->fallthrough();
        cmd->add_option("--key", o->key_path, "armored key pair file")
            ->required();
        cmd->add_option("--cn", o->cn, "root common name")->required();
        cmd->add_option("--issued-at", o->issued_at, "issuance time");
        cmd->add_option("--days", o->days, "validity in days");
        cmd->add_option("--journal", o->journal_path,
                        "append issued serials to this file");
        cmd->add_option("--out", o->out_path, "armored certificate file")
            ->required();
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                sig::KeyPair kp = detail::load_keypair(o->key_path);
                SeedRng rng = detail::rng_for(ctx);
                cert::IssuanceJournal journal(rng);
                if (!o->journal_path.empty())
                    journal.attach_file(o->journal_path);
                cert::SubjectInfo subject;
                subject.common_name = o->cn;
                subject.role = cert::Role::kMaintainer;
                const cert::Certificate root = cert::self_sign_root(
                    kp, subject, o->issued_at, o->days * 86400, journal);
                write_text_file(o->out_path, cert::armor_certificate(root));
                detail::store_keypair(o->key_path, kp);
                nlohmann::json j;
                j["notAfter"] = root.not_after;
                j["notBefore"] = root.not_before;
                j["out"] = o->out_path;
                j["serial"] = detail::to_hex(root.serial);
                detail::emit(ctx, j, [&] {
                    ctx.out << "wrote " << o->out_path
                            << " serial=" << detail::to_hex(root.serial)
                            << "\n";
                });
                return 0;
            };
        });
    }

    {
        struct Opts {
            std::string ca_key;
            std::string ca_cert;
            std::string csr_path;
            std::string out_path;
            std::uint64_t issued_at = 0;  // 0: one hour into CA validity
            std::uint64_t days = 30;
            std::uint32_t path_len = 0;
            bool hybrid_required = false;
            std::string journal_path;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = cert_cmd->add_subcommand(
            "issue", "issue a certificate from a signing request");
        cmd->fallthrough();
        cmd->add_option("--ca-key", o->ca_key, "CA armored key pair file")
            ->required();
        cmd->add_option("--ca-cert", o->ca_cert, "CA certificate file")
            ->required();
        cmd->add_option("--csr", o->csr_path, "armored request file")
            ->required();
        cmd->add_option("--out", o->out_path, "armored certificate file")
            ->required();
        cmd->add_option("--issued-at", o->issued_at, "issuance time");
        cmd->add_option("--days", o->days, "validity in days");
        cmd->add_option("--path-len", o->path_len,
                        "CA depth granted to the subject");
        cmd->add_flag("--hybrid-required", o->hybrid_required,
                      "mark the certificate hybrid-mandatory");
        cmd->add_option("--journal", o->journal_path,
                        "append issued serials to this file");
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                sig::KeyPair ca_keys = detail::load_keypair(o->ca_key);
                const cert::Certificate ca =
                    detail::load_certificate(o->ca_cert);
                const cert::Csr csr =
                    cert::dearmor_csr(read_text_file(o->csr_path));
                SeedRng rng = detail::rng_for(ctx);
                cert::IssuanceJournal journal(rng);
                if (!o->journal_path.empty())
                    journal.attach_file(o->journal_path);
                cert::IssueProfile profile;
                profile.issued_at =
                    o->issued_at != 0 ? o->issued_at : ca.not_before + 3600;
                profile.ttl_seconds = o->days * 86400;
                profile.hybrid_required = o->hybrid_required;
                profile.path_len = o->path_len;
                const cert::Certificate issued = cert::issue_certificate(
                    ca_keys, ca, csr, profile, journal);
                write_text_file(o->out_path, cert::armor_certificate(issued));
                detail::store_keypair(o->ca_key, ca_keys);
                nlohmann::json j;
                j["notAfter"] = issued.not_after;
                j["notBefore"] = issued.not_before;
                j["out"] = o->out_path;
                j["serial"] = detail::to_hex(issued.serial);
                detail::emit(ctx, j, [&] {
                    ctx.out << "wrote " << o->out_path
                            << " serial=" << detail::to_hex(issued.serial)
                            << "\n";
                });
                return 0;
            };
        });
    }

    {
        struct Opts {
            std::string cert_path;
            std::vector<std::string> chain;
            std::vector<std::string> anchors;
            std::uint64_t at = 0;  // 0: just after the leaf becomes valid
            std::size_t max_length = 4;
            bool require_hybrid = false;
            std::string rl_path;
            std::vector<std::string> pins;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = cert_cmd->add_subcommand(
            "validate", "validate a certificate chain against anchors");
        cmd->fallthrough();
        cmd->add_option("--cert", o->cert_path, "leaf certificate file")
            ->required();
        cmd->add_option("--chain", o->chain,
                        "intermediate certificates, leaf side first");
        cmd->add_option("--anchor", o->anchors, "trust anchor file")
            ->required();
        cmd->add_option("--at", o->at, "evaluation time");
        cmd->add_option("--max-length", o->max_length, "maximum chain length");
        cmd->add_flag("--require-hybrid", o->require_hybrid,
                      "demand quantum-resistant backing everywhere");
        cmd->add_option("--rl", o->rl_path, "armored revocation list file");
        cmd->add_option("--pin", o->pins, "required root pin digest (hex)");
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                std::vector<cert::Certificate> chain;
                chain.push_back(detail::load_certificate(o->cert_path));
                for (const auto& path : o->chain)
                    chain.push_back(detail::load_certificate(path));
                cert::ValidationPolicy policy;
                policy.evaluation_time =
                    o->at != 0 ? o->at : chain.front().not_before + 1;
                policy.max_chain_length = o->max_length;
                policy.require_hybrid = o->require_hybrid;
                for (const auto& path : o->anchors)
                    policy.anchors.push_back(detail::load_certificate(path));
                if (!o->rl_path.empty())
                    policy.revocation = cert::dearmor_revocation_list(
                        read_text_file(o->rl_path));
                for (const auto& pin : o->pins)
                    policy.pinned_digests.insert(detail::from_hex(pin));
                const cert::ValidationReport report =
                    cert::validate_chain(chain, policy);
                nlohmann::json j;
                j["checks"] = nlohmann::json::array();
                for (const auto& check : report.checks) {
                    nlohmann::json c;
                    c["detail"] = check.detail;
                    c["name"] = check.name;
                    c["passed"] = check.passed;
                    j["checks"].push_back(c);
                }
                j["valid"] = report.ok;
                detail::emit(ctx, j, [&] {
                    for (const auto& check : report.checks) {
                        ctx.out << (check.passed ? "PASS " : "FAIL ")
                                << check.name;
                        if (!check.detail.empty()) ctx.out << " " << check.detail;
                        ctx.out << "\n";
                    }
                    ctx.out << (report.ok ? "VALID" : "INVALID") << "\n";
                });
                if (!report.ok) {
                    std::string first = "chain rejected";
                    for (const auto& check : report.checks)
                        if (!check.passed) {
                            first = check.name;
                            break;
                        }
                    ctx.err << "CHAIN_INVALID: " << first << "\n";
                    return 1;
                }
                return 0;
            };
        });
    }

    {
        struct Opts {
            std::string cert_path;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd =
            cert_cmd->add_subcommand("show", "print certificate fields");
        cmd->fallthrough();
        cmd->add_option("--cert", o->cert_path, "certificate file")->required();
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                const cert::Certificate c =
                    detail::load_certificate(o->cert_path);
                nlohmann::json j;
                nlohmann::json ext;
                ext["hybridRequired"] = c.extensions.hybrid_required;
                ext["pathLen"] = c.extensions.path_len;
                if (c.extensions.attestation_digest)
                    ext["attestationDigest"] =
                        detail::to_hex(*c.extensions.attestation_digest);
                if (c.extensions.device_binding)
                    ext["deviceBinding"] =
                        detail::to_hex(*c.extensions.device_binding);
                if (c.extensions.service_zone_state)
                    ext["serviceZoneState"] = *c.extensions.service_zone_state;
                j["extensions"] = ext;
                j["issuer"] = detail::subject_json(c.issuer);
                j["keys"] = nlohmann::json::array();
                for (const auto& entry : c.public_keys) {
                    nlohmann::json k;
                    k["bytes"] = entry.key_bytes.size();
                    k["scheme"] = entry.descriptor.display_name;
                    k["usage"] = cert::usage_name(entry.usage);
                    j["keys"].push_back(k);
                }
                j["notAfter"] = c.not_after;
                j["notBefore"] = c.not_before;
                j["serial"] = detail::to_hex(c.serial);
                j["signatures"] = c.signatures.size();
                j["subject"] = detail::subject_json(c.subject);
                j["version"] = c.version;
                detail::emit(ctx, j, [&] {
                    ctx.out << "serial=" << detail::to_hex(c.serial) << "\n"
                            << "version=" << c.version << "\n"
                            << "subject-cn=" << c.subject.common_name << "\n"
                            << "subject-role=" << cert::role_name(c.subject.role)
                            << "\n";
                    if (!c.subject.device_model.empty())
                        ctx.out << "subject-model=" << c.subject.device_model
                                << "\n";
                    if (!c.subject.serial_number.empty())
                        ctx.out << "subject-serial=" << c.subject.serial_number
                                << "\n";
                    ctx.out << "issuer-cn=" << c.issuer.common_name << "\n"
                            << "issuer-role=" << cert::role_name(c.issuer.role)
                            << "\n"
                            << "not-before=" << c.not_before << "\n"
                            << "not-after=" << c.not_after << "\n";
                    for (std::size_t i = 0; i < c.public_keys.size(); ++i) {
                        const auto& entry = c.public_keys[i];
                        ctx.out << "key[" << i << "]="
                                << entry.descriptor.display_name
                                << " usage=" << cert::usage_name(entry.usage)
                                << " bytes=" << entry.key_bytes.size() << "\n";
                    }
                    ctx.out << "hybrid-required="
                            << (c.extensions.hybrid_required ? "true" : "false")
                            << "\n"
                            << "path-len=" << c.extensions.path_len << "\n";
                    if (c.extensions.attestation_digest)
                        ctx.out << "attestation-digest="
                                << detail::to_hex(
                                       *c.extensions.attestation_digest)
                                << "\n";
                    if (c.extensions.device_binding)
                        ctx.out << "device-binding="
                                << detail::to_hex(*c.extensions.device_binding)
                                << "\n";
                    if (c.extensions.service_zone_state)
                        ctx.out << "service-zone-state="
                                << *c.extensions.service_zone_state << "\n";
                    ctx.out << "signatures=" << c.signatures.size() << "\n";
                });
                return 0;
            };
        });
    }

    {
        struct Opts {
            std::string cert_path;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = cert_cmd->add_subcommand(
            "pin", "print the pin digest of a certificate");
        cmd->fallthrough();
        cmd->add_option("--cert", o->cert_path, "certificate file")->required();
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                const cert::Certificate c =
                    detail::load_certificate(o->cert_path);
                const std::string pin = detail::to_hex(cert::pin_digest(c));
                nlohmann::json j;
                j["pin"] = pin;
                detail::emit(ctx, j, [&] { ctx.out << pin << "\n"; });
                return 0;
            };
        });
    }
}

inline void add_csr(CLI::App& app, Context& ctx) {
    auto* csr_cmd =
        app.add_subcommand("csr", "create certificate signing requests");
    csr_cmd->fallthrough();
    csr_cmd->require_subcommand(1);

    struct Opts {
        std::string key_path;
        std::string cn;
        std::string role = "device";
        std::string model;
        std::string serial;
        std::string usage = "sign-data";
        std::string out_path;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = csr_cmd->add_subcommand(
        "create", "request a certificate for an existing key pair");
    cmd->fallthrough();
    cmd->add_option("--key", o->key_path, "armored key pair file")->required();
    cmd->add_option("--cn", o->cn, "subject common name")->required();
    cmd->add_option("--role", o->role, "subject role")
        ->check(CLI::IsMember({"maintainer", "production-line", "manufacturer",
                               "operator", "device"}));
    cmd->add_option("--model", o->model, "device model (device role)");
    cmd->add_option("--serial", o->serial, "device serial (device role)");
    cmd->add_option("--usage", o->usage, "key usage for every listed key")
        ->check(CLI::IsMember({"sign-certs", "sign-data", "attest"}));
    cmd->add_option("--out", o->out_path, "armored request file")->required();
    cmd->callback([&ctx, o] {
        ctx.action = [&ctx, o]() -> int {
            sig::KeyPair kp = detail::load_keypair(o->key_path);
            cert::Csr csr;
            csr.subject.common_name = o->cn;
            csr.subject.role = cert::role_from_name(o->role);
            csr.subject.device_model = o->model;
            csr.subject.serial_number = o->serial;
            cert::validate_subject(csr.subject);
            csr.public_keys =
                cert::key_entries_for(kp, cert::usage_from_name(o->usage));
            const Bytes body = cert::csr_canonical_body(csr);
            if (kp.descriptor.scheme_id == sig::SchemeId::kHybrid) {
                for (auto& inner : kp.inner)
                    csr.proofs.push_back(sig::sign(inner, body));
            } else {
                csr.proofs.push_back(sig::sign(kp, body));
            }
            write_text_file(o->out_path, cert::armor_csr(csr));
            detail::store_keypair(o->key_path, kp);
            nlohmann::json j;
            j["out"] = o->out_path;
            j["proofs"] = csr.proofs.size();
            j["subject"] = o->cn;
            detail::emit(ctx, j, [&] {
                ctx.out << "wrote " << o->out_path << " (" << csr.proofs.size()
                        << (csr.proofs.size() == 1 ? " proof)" : " proofs)")
                        << "\n";
            });
            return 0;
        };
    });
}

// --- enrollment verbs ------------------------------------------------------------

inline void add_enroll(CLI::App& app, Context& ctx) {
    auto* enroll_cmd =
        app.add_subcommand("enroll", "run scripted enrollment scenarios");
    enroll_cmd->fallthrough();
    enroll_cmd->require_subcommand(1);

    struct Opts {
        std::string scenario_path;
        std::string transcript_out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = enroll_cmd->add_subcommand(
        "run", "execute a scenario file and report the outcome");
    cmd->fallthrough();
    cmd->add_option("--scenario", o->scenario_path, "scenario file")
        ->required();
    cmd->add_option("--transcript-out", o->transcript_out,
                    "write the message transcript here");
    cmd->callback([&ctx, o] {
        ctx.action = [&ctx, o]() -> int {
            enroll::Scenario scenario =
                enroll::parse_scenario(read_text_file(o->scenario_path));
            if (ctx.seed) scenario.seed = *ctx.seed;
            const enroll::ScenarioResult result =
                enroll::run_scenario(scenario);
            if (!o->transcript_out.empty())
                write_text_file(
                    o->transcript_out,
                    enroll::export_transcript(result.transcript, result.seed,
                                              result.adversary));
            const auto& t = result.transcript;
            nlohmann::json j;
            j["certificateSerial"] =
                t.issued_certificate
                    ? nlohmann::json(
                          detail::to_hex(t.issued_certificate->serial))
                    : nlohmann::json(nullptr);
            j["messages"] = t.ordered_messages.size();
            j["outcome"] = enroll::outcome_name(t.outcome);
            detail::emit(ctx, j, [&] {
                ctx.out << "outcome=" << enroll::outcome_name(t.outcome) << "\n"
                        << "messages=" << t.ordered_messages.size() << "\n";
                if (t.issued_certificate)
                    ctx.out << "certificate-serial="
                            << detail::to_hex(t.issued_certificate->serial)
                            << "\n";
                if (!o->transcript_out.empty())
                    ctx.out << "transcript=" << o->transcript_out << "\n";
            });
            return 0;
        };
    });
}

inline void add_sndl(CLI::App& app, Context& ctx) {
    auto* sndl_cmd = app.add_subcommand(
        "sndl", "store-now-decrypt-later analysis of recorded traffic");
    sndl_cmd->fallthrough();
    sndl_cmd->require_subcommand(1);

    struct Opts {
        std::string transcript_path;
        std::uint64_t budget = 10000000;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = sndl_cmd->add_subcommand(
        "replay", "attack a recorded transcript with a bounded solver");
    cmd->fallthrough();
    cmd->add_option("--transcript", o->transcript_path, "transcript file")
        ->required();
    cmd->add_option("--budget", o->budget, "group operations the attacker may spend");
    cmd->callback([&ctx, o] {
        ctx.action = [&ctx, o]() -> int {
            const enroll::ParsedTranscript parsed =
                enroll::parse_transcript(read_text_file(o->transcript_path));
            enroll::AdversaryConfig adversary;
            adversary.record_for_later = true;
            adversary.random_seed = parsed.seed;
            for (const auto& m : parsed.messages)
                adversary.recorded_log.push_back(
                    enroll::encode_channel_message(m));
            enroll::EnrollmentTranscript transcript;
            transcript.outcome = parsed.outcome;
            transcript.ordered_messages = parsed.messages;
            const enroll::AttackReport report =
                enroll::simulate_store_now_decrypt_later(transcript, adversary,
                                                         o->budget);
            nlohmann::json j;
            j["note"] = report.note;
            j["operations"] = report.operations_used;
            j["recoveredPayloads"] = report.recovered_payloads.size();
            j["status"] = enroll::attack_status_name(report.status);
            detail::emit(ctx, j, [&] {
                ctx.out << "status=" << enroll::attack_status_name(report.status)
                        << "\n"
                        << "operations=" << report.operations_used << "\n"
                        << "recovered-payloads="
                        << report.recovered_payloads.size() << "\n";
                if (!report.note.empty())
                    ctx.out << "note=" << report.note << "\n";
            });
            return 0;
        };
    });
}

// --- revocation verbs ------------------------------------------------------------

inline void add_revoke(CLI::App& app, Context& ctx) {
    auto* revoke_cmd =
        app.add_subcommand("revoke", "issue and evaluate revocation lists");
    revoke_cmd->fallthrough();
    revoke_cmd->require_subcommand(1);

    {
        struct Opts {
            std::string key_path;
            std::string cn;
            std::vector<std::string> scopes;
            std::string reason = "compromise";
            std::uint64_t prior_version = 0;
            std::uint64_t issued_at = 1700000000;
            std::string out_path;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = revoke_cmd->add_subcommand(
            "issue", "sign a revocation list as the maintainer root");
        cmd->fallthrough();
        cmd->add_option("--key", o->key_path, "root armored key pair file")
            ->required();
        cmd->add_option("--cn", o->cn, "root common name")->required();
        cmd->add_option("--scope", o->scopes,
                        "serial:<hex> | model:<name> | ca:<role>:<cn>")
            ->required();
        cmd->add_option("--reason", o->reason, "revocation reason")
            ->check(CLI::IsMember(
                {"compromise", "expiry-policy", "superseded"}));
        cmd->add_option("--prior-version", o->prior_version,
                        "version of the list being replaced");
        cmd->add_option("--issued-at", o->issued_at, "issuance time");
        cmd->add_option("--out", o->out_path, "armored revocation list file")
            ->required();
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                sig::KeyPair kp = detail::load_keypair(o->key_path);
                cert::SubjectInfo issuer;
                issuer.common_name = o->cn;
                issuer.role = cert::Role::kMaintainer;
                std::vector<cert::RevocationEntry> entries;
                for (const auto& scope : o->scopes) {
                    cert::RevocationEntry entry;
                    entry.scope = detail::scope_from(scope);
                    entry.reason = detail::reason_from(o->reason);
                    entry.revoked_at = o->issued_at;
                    entries.push_back(std::move(entry));
                }
                const cert::RevocationList rl = rev::issue_revocation_list(
                    kp, issuer, rev::AccessControlList::standard(),
                    o->prior_version, std::move(entries), o->issued_at);
                write_text_file(o->out_path, cert::armor_revocation_list(rl));
                detail::store_keypair(o->key_path, kp);
                nlohmann::json j;
                j["entries"] = rl.entries.size();
                j["out"] = o->out_path;
                j["version"] = rl.version;
                detail::emit(ctx, j, [&] {
                    ctx.out << "wrote " << o->out_path
                            << " version=" << rl.version
                            << " entries=" << rl.entries.size() << "\n";
                });
                return 0;
            };
        });
    }

    {
        struct Opts {
            std::string rl_path;
            std::string cert_path;
            std::string root_path;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = revoke_cmd->add_subcommand(
            "check", "test whether a certificate is revoked by a list");
        cmd->fallthrough();
        cmd->add_option("--rl", o->rl_path, "armored revocation list file")
            ->required();
        cmd->add_option("--cert", o->cert_path, "certificate file")
            ->required();
        cmd->add_option("--root", o->root_path,
                        "verify the list signature against this root first");
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                const cert::RevocationList rl =
                    cert::dearmor_revocation_list(read_text_file(o->rl_path));
                if (!o->root_path.empty()) {
                    const cert::Certificate root =
                        detail::load_certificate(o->root_path);
                    if (!rev::verify_rl_signature(rl, root))
                        throw SignatureInvalid(
                            "revocation list is not signed by the given root");
                }
                const cert::Certificate target =
                    detail::load_certificate(o->cert_path);
                const bool revoked = cert::is_revoked(target, rl);
                nlohmann::json j;
                j["revoked"] = revoked;
                detail::emit(ctx, j, [&] {
                    ctx.out << (revoked ? "REVOKED" : "NOT_REVOKED") << "\n";
                });
                return 0;
            };
        });
    }

    {
        struct Opts {
            std::string current_path;
            std::string incoming_path;
            std::string root_path;
            std::string out_path;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = revoke_cmd->add_subcommand(
            "merge", "accept a newer list after signature and version checks");
        cmd->fallthrough();
        cmd->add_option("--current", o->current_path,
                        "list currently installed, if any");
        cmd->add_option("--incoming", o->incoming_path, "candidate list")
            ->required();
        cmd->add_option("--root", o->root_path, "trust root certificate")
            ->required();
        cmd->add_option("--out", o->out_path, "file for the accepted list")
            ->required();
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                std::optional<cert::RevocationList> current;
                if (!o->current_path.empty())
                    current = cert::dearmor_revocation_list(
                        read_text_file(o->current_path));
                const cert::RevocationList incoming =
                    cert::dearmor_revocation_list(
                        read_text_file(o->incoming_path));
                const cert::Certificate root =
                    detail::load_certificate(o->root_path);
                const cert::RevocationList merged =
                    rev::merge_revocation_lists(current, incoming, root);
                write_text_file(o->out_path,
                                cert::armor_revocation_list(merged));
                nlohmann::json j;
                j["entries"] = merged.entries.size();
                j["out"] = o->out_path;
                j["version"] = merged.version;
                detail::emit(ctx, j, [&] {
                    ctx.out << "accepted version=" << merged.version
                            << " entries=" << merged.entries.size() << "\n";
                });
                return 0;
            };
        });
    }
}

inline void add_bundle(CLI::App& app, Context& ctx) {
    auto* bundle_cmd = app.add_subcommand(
        "bundle", "pack and apply signed firmware updates");
    bundle_cmd->fallthrough();
    bundle_cmd->require_subcommand(1);

    {
        struct Opts {
            std::string firmware_path;
            std::string rl_path;
            std::string key_path;
            std::string out_path;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = bundle_cmd->add_subcommand(
            "pack", "sign firmware together with a revocation list");
        cmd->fallthrough();
        cmd->add_option("--firmware", o->firmware_path, "raw firmware image")
            ->required();
        cmd->add_option("--rl", o->rl_path, "armored revocation list file")
            ->required();
        cmd->add_option("--key", o->key_path, "signer armored key pair file")
            ->required();
        cmd->add_option("--out", o->out_path, "armored bundle file")
            ->required();
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                const Bytes blob = read_file(o->firmware_path);
                const cert::RevocationList rl =
                    cert::dearmor_revocation_list(read_text_file(o->rl_path));
                sig::KeyPair kp = detail::load_keypair(o->key_path);
                const rev::FirmwareBundle bundle =
                    rev::pack_firmware_bundle(blob, rl, kp);
                write_text_file(o->out_path,
                                rev::armor_firmware_bundle(bundle));
                detail::store_keypair(o->key_path, kp);
                nlohmann::json j;
                j["firmwareBytes"] = blob.size();
                j["out"] = o->out_path;
                j["rlVersion"] = rl.version;
                detail::emit(ctx, j, [&] {
                    ctx.out << "wrote " << o->out_path << " firmware-bytes="
                            << blob.size() << " rl-version=" << rl.version
                            << "\n";
                });
                return 0;
            };
        });
    }

    {
        struct Opts {
            std::string bundle_path;
            std::vector<std::string> anchors;
            std::string state_dir;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = bundle_cmd->add_subcommand(
            "apply", "install a bundle into an offline device state directory");
        cmd->fallthrough();
        cmd->add_option("--bundle", o->bundle_path, "armored bundle file")
            ->required();
        cmd->add_option("--anchor", o->anchors, "device trust anchor file")
            ->required();
        cmd->add_option("--state-dir", o->state_dir,
                        "directory holding rl.txt and firmware.bin")
            ->required();
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                Party device;
                device.role = cert::Role::kDevice;
                for (const auto& path : o->anchors)
                    device.trust_store.push_back(
                        detail::load_certificate(path));
                std::filesystem::create_directories(o->state_dir);
                const std::string rl_file = o->state_dir + "/rl.txt";
                const std::string fw_file = o->state_dir + "/firmware.bin";
                try {
                    device.stored_rl = cert::dearmor_revocation_list(
                        read_text_file(rl_file));
                } catch (const IoError&) {
                }
                try {
                    device.firmware = read_file(fw_file);
                } catch (const IoError&) {
                }
                const rev::FirmwareBundle bundle = rev::dearmor_firmware_bundle(
                    read_text_file(o->bundle_path));
                rev::apply_offline_update(device, bundle);
                write_text_file(rl_file, cert::armor_revocation_list(
                                              *device.stored_rl));
                write_file(fw_file, device.firmware);
                nlohmann::json j;
                j["firmwareBytes"] = device.firmware.size();
                j["rlVersion"] = device.stored_rl->version;
                j["stateDir"] = o->state_dir;
                detail::emit(ctx, j, [&] {
                    ctx.out << "applied rl-version="
                            << device.stored_rl->version
                            << " firmware-bytes=" << device.firmware.size()
                            << "\n";
                });
                return 0;
            };
        });
    }
}

// --- measurement and planning verbs ----------------------------------------------

inline void add_bench(CLI::App& app, Context& ctx) {
    auto* bench_cmd = app.add_subcommand(
        "bench", "measure schemes and print reference tables");
    bench_cmd->fallthrough();
    bench_cmd->require_subcommand(1);

    {
        struct Opts {
            std::string scheme;
            detail::SchemeShape shape;
            std::size_t iterations = 5;
            std::size_t message_bytes = 32;
            std::string format = "csv";
            std::string out_path;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = bench_cmd->add_subcommand(
            "run", "benchmark one scheme and emit a table");
        cmd->fallthrough();
        cmd->add_option("--scheme", o->scheme, "signature scheme")
            ->required()
            ->check(CLI::IsMember(detail::scheme_names()));
        detail::add_shape_options(cmd, o->shape);
        cmd->add_option("--iterations", o->iterations,
                        "timed iterations (at least 3)");
        cmd->add_option("--message-bytes", o->message_bytes,
                        "message size to sign");
        cmd->add_option("--format", o->format, "table format")
            ->check(CLI::IsMember({"csv", "markdown"}));
        cmd->add_option("--out", o->out_path, "write the table here");
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                const sig::SchemeDescriptor d =
                    detail::scheme_from(o->scheme, o->shape);
                const bench::BenchmarkRecord rec =
                    bench::run_benchmark(d, o->iterations, o->message_bytes);
                const auto format = o->format == "markdown"
                                        ? bench::TableFormat::kMarkdown
                                        : bench::TableFormat::kCsv;
                const std::string table = bench::emit_table({rec}, format);
                if (!o->out_path.empty()) write_text_file(o->out_path, table);
                nlohmann::json j;
                j["algorithm"] = rec.algorithm;
                j["iterations"] = o->iterations;
                j["keygenMicros"] = rec.keygen_micros;
                j["publicKeyBytes"] = rec.public_key_bytes;
                j["secretKeyBytes"] = rec.secret_key_bytes;
                j["signMicros"] = rec.sign_micros;
                j["signatureBytes"] = rec.signature_bytes;
                j["variant"] = rec.variant;
                j["verifyMicros"] = rec.verify_micros;
                detail::emit(ctx, j, [&] {
                    if (o->out_path.empty())
                        ctx.out << table;
                    else
                        ctx.out << "wrote " << o->out_path << "\n";
                });
                return 0;
            };
        });
    }

    {
        struct Opts {
            std::string out_path;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = bench_cmd->add_subcommand(
            "reference", "print the published reference measurements");
        cmd->fallthrough();
        cmd->add_option("--out", o->out_path, "write the CSV here");
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                const std::string csv = bench::reference_csv();
                if (!o->out_path.empty()) write_text_file(o->out_path, csv);
                nlohmann::json j;
                j["rows"] = nlohmann::json::array();
                for (const auto& row : bench::reference_table()) {
                    nlohmann::json r;
                    r["algorithm"] = row.algorithm;
                    r["classicalBits"] = row.classical_bits;
                    r["keygenMicros"] = row.keygen_micros;
                    r["publicKeyBytes"] = row.public_key_bytes;
                    r["quantumBits"] = row.quantum_bits;
                    r["secretKeyBytes"] = row.secret_key_bytes;
                    r["securityBasis"] = row.security_basis;
                    r["signMicros"] = row.sign_micros;
                    r["signatureBytes"] = row.signature_bytes;
                    r["variant"] = row.variant;
                    r["verifyMicros"] = row.verify_micros;
                    j["rows"].push_back(r);
                }
                detail::emit(ctx, j, [&] {
                    if (o->out_path.empty())
                        ctx.out << csv;
                    else
                        ctx.out << "wrote " << o->out_path << "\n";
                });
                return 0;
            };
        });
    }
}

inline void add_mosca(CLI::App& app, Context& ctx) {
    struct Opts {
        double x = 0;
        double y = 0;
        double z = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand(
        "mosca", "secrecy-horizon check: data lifetime X, migration Y, break Z");
    cmd->fallthrough();
    cmd->add_option("--x", o->x, "years the data must stay secret")->required();
    cmd->add_option("--y", o->y, "years the migration will take")->required();
    cmd->add_option("--z", o->z, "years until the attacker can break the scheme")
        ->required();
    cmd->callback([&ctx, o] {
        ctx.action = [&ctx, o]() -> int {
            const bench::MoscaVerdict verdict =
                bench::mosca_check({o->x, o->y, o->z});
            nlohmann::json j;
            j["atRisk"] = verdict.at_risk;
            j["verdict"] = bench::to_string(verdict);
            j["yearsToSpare"] = verdict.years_to_spare;
            detail::emit(ctx, j, [&] {
                ctx.out << bench::to_string(verdict) << "\n";
            });
            return 0;
        };
    });
}

inline void add_grover(CLI::App& app, Context& ctx) {
    struct Opts {
        std::optional<std::int64_t> bits;
        std::optional<std::int64_t> target;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand(
        "grover", "halve symmetric bits under search speedup, or double back");
    cmd->fallthrough();
    cmd->add_option("--bits", o->bits,
                    "classical key bits; prints the surviving quantum bits");
    cmd->add_option("--target", o->target,
                    "quantum bits to keep; prints the classical bits needed");
    cmd->callback([&ctx, o] {
        if (o->bits.has_value() == o->target.has_value())
            throw CLI::RequiredError("exactly one of --bits or --target");
        ctx.action = [&ctx, o]() -> int {
            const std::int64_t result =
                o->bits ? bench::grover_adjust(*o->bits)
                        : bench::recommended_symmetric_bits(*o->target);
            nlohmann::json j;
            j["inputBits"] = o->bits ? *o->bits : *o->target;
            j["outputBits"] = result;
            detail::emit(ctx, j, [&] { ctx.out << result << "\n"; });
            return 0;
        };
    });
}

inline void add_shor(CLI::App& app, Context& ctx) {
    struct Opts {
        std::int64_t n = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand(
        "shor-estimate", "resource estimate for factoring an n-bit modulus");
    cmd->fallthrough();
    cmd->add_option("--n", o->n, "modulus size in bits")->required();
    cmd->callback([&ctx, o] {
        ctx.action = [&ctx, o]() -> int {
            const bench::QuantumResourceEstimate est =
                bench::shor_resource_estimate(o->n);
            nlohmann::json j;
            j["inputBits"] = est.input_bits;
            j["logicalQubits"] = est.logical_qubits;
            j["measurementDepth"] = est.measurement_depth;
            j["note"] = bench::physical_scale_note();
            j["toffoliCount"] = est.toffoli_count;
            detail::emit(ctx, j, [&] {
                ctx.out << "logical-qubits="
                        << bench::detail::format_number(est.logical_qubits)
                        << "\n"
                        << "toffoli-count="
                        << bench::detail::format_number(est.toffoli_count)
                        << "\n"
                        << "measurement-depth="
                        << bench::detail::format_number(est.measurement_depth)
                        << "\n"
                        << "note=" << bench::physical_scale_note() << "\n";
            });
            return 0;
        };
    });
}

// --- key server verbs ------------------------------------------------------------

inline void add_keyserver(CLI::App& app, Context& ctx) {
    auto* ks_cmd = app.add_subcommand(
        "keyserver", "credentialed registry of injected device keys");
    ks_cmd->fallthrough();
    ks_cmd->require_subcommand(1);

    {
        struct Opts {
            std::string store = ".pqpki-keyserver";
            std::string party;
            std::string password;
            std::string role;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd =
            ks_cmd->add_subcommand("register", "enroll a party credential");
        cmd->fallthrough();
        cmd->add_option("--store", o->store, "server state directory");
        cmd->add_option("--party", o->party, "party identifier")->required();
        cmd->add_option("--password", o->password, "party password")
            ->required();
        cmd->add_option("--role", o->role, "party role")
            ->required()
            ->check(CLI::IsMember({"maintainer", "production-line",
                                   "manufacturer", "operator", "device"}));
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                ks::KeyServer server(detail::rng_for(ctx));
                detail::load_server_state(server, o->store);
                server.register_party(o->party, o->password,
                                      cert::role_from_name(o->role));
                detail::save_server_state(server, o->store);
                nlohmann::json j;
                j["party"] = o->party;
                j["role"] = o->role;
                detail::emit(ctx, j, [&] {
                    ctx.out << "registered " << o->party << " (" << o->role
                            << ")\n";
                });
                return 0;
            };
        });
    }

    {
        struct Opts {
            std::string store = ".pqpki-keyserver";
            std::string party;
            std::string password;
            std::uint64_t ttl = 3600;
            std::uint64_t now = 0;
            std::string token_out;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = ks_cmd->add_subcommand(
            "auth", "authenticate and mint a session token");
        cmd->fallthrough();
        cmd->add_option("--store", o->store, "server state directory");
        cmd->add_option("--party", o->party, "party identifier")->required();
        cmd->add_option("--password", o->password, "party password")
            ->required();
        cmd->add_option("--ttl", o->ttl, "token lifetime in seconds");
        cmd->add_option("--now", o->now, "clock override");
        cmd->add_option("--token-out", o->token_out,
                        "also write the token here");
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                ks::KeyServer server(detail::rng_for(ctx));
                detail::load_server_state(server, o->store);
                const std::uint64_t now = detail::now_or(o->now);
                const ks::SessionToken token =
                    server.authenticate(o->party, o->password, o->ttl, now);
                detail::save_server_state(server, o->store);
                const std::string encoded =
                    base64_encode(ks::encode_session_token(token));
                if (!o->token_out.empty())
                    write_text_file(o->token_out, encoded + "\n");
                nlohmann::json j;
                j["expiresAt"] = token.expires_at;
                j["issuedAt"] = token.issued_at;
                j["party"] = token.party_id;
                j["token"] = encoded;
                detail::emit(ctx, j, [&] { ctx.out << encoded << "\n"; });
                return 0;
            };
        });
    }

    {
        struct Opts {
            std::string store = ".pqpki-keyserver";
            std::string token_file;
            std::string device_serial;
            std::string cert_serial;
            std::uint64_t now = 0;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = ks_cmd->add_subcommand(
            "report", "record that a key was injected into a device");
        cmd->fallthrough();
        cmd->add_option("--store", o->store, "server state directory");
        cmd->add_option("--token-file", o->token_file, "session token file")
            ->required();
        cmd->add_option("--device-serial", o->device_serial, "device serial")
            ->required();
        cmd->add_option("--cert-serial", o->cert_serial,
                        "certificate serial (32 hex digits)")
            ->required();
        cmd->add_option("--now", o->now, "clock override");
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                ks::KeyServer server(detail::rng_for(ctx));
                detail::load_server_state(server, o->store);
                const ks::SessionToken token =
                    detail::token_from_file(o->token_file);
                server.report_injection(token, o->device_serial,
                                        detail::from_hex(o->cert_serial),
                                        detail::now_or(o->now));
                detail::save_server_state(server, o->store);
                nlohmann::json j;
                j["certSerial"] = o->cert_serial;
                j["deviceSerial"] = o->device_serial;
                j["reporter"] = token.party_id;
                detail::emit(ctx, j, [&] {
                    ctx.out << "reported " << o->device_serial << "\n";
                });
                return 0;
            };
        });
    }

    {
        struct Opts {
            std::string store = ".pqpki-keyserver";
            std::string token_file;
            std::string device_serial;
            std::uint64_t now = 0;
        };
        auto o = std::make_shared<Opts>();
        auto* cmd = ks_cmd->add_subcommand(
            "query", "list injection reports for a device (maintainer only)");
        cmd->fallthrough();
        cmd->add_option("--store", o->store, "server state directory");
        cmd->add_option("--token-file", o->token_file, "session token file")
            ->required();
        cmd->add_option("--device-serial", o->device_serial, "device serial")
            ->required();
        cmd->add_option("--now", o->now, "clock override");
        cmd->callback([&ctx, o] {
            ctx.action = [&ctx, o]() -> int {
                ks::KeyServer server(detail::rng_for(ctx));
                detail::load_server_state(server, o->store);
                const ks::SessionToken token =
                    detail::token_from_file(o->token_file);
                const auto reports = server.query_injections(
                    token, o->device_serial, detail::now_or(o->now));
                nlohmann::json j;
                j["deviceSerial"] = o->device_serial;
                j["reports"] = nlohmann::json::array();
                for (const auto& report : reports) {
                    nlohmann::json r;
                    r["certSerial"] = detail::to_hex(report.cert_serial);
                    r["reportedAt"] = report.reported_at;
                    r["reporter"] = report.reporter_party_id;
                    j["reports"].push_back(r);
                }
                detail::emit(ctx, j, [&] {
                    for (const auto& report : reports)
                        ctx.out << "reporter=" << report.reporter_party_id
                                << " cert-serial="
                                << detail::to_hex(report.cert_serial)
                                << " at=" << report.reported_at << "\n";
                    ctx.out << "reports=" << reports.size() << "\n";
                });
                return 0;
            };
        });
    }
}

// --- dispatch --------------------------------------------------------------------

// `args` excludes the program name.  Returns the process exit code.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out,
                    std::ostream& err) {
    CLI::App app{"post-quantum PKI toolkit"};
    app.name("pqpki");
    app.require_subcommand(1);
    app.fallthrough();

    Context ctx{out, err};
    app.add_flag("--json", ctx.json,
                 "print exactly one JSON document on stdout");
    app.add_option("--seed", ctx.seed,
                   "deterministic seed for every random choice");
    app.set_config("--config", "",
                   "read option defaults from an INI file (flags win)");

    add_keygen(app, ctx);
    add_sign(app, ctx);
    add_verify(app, ctx);
    add_cert(app, ctx);
    add_csr(app, ctx);
    add_enroll(app, ctx);
    add_sndl(app, ctx);
    add_revoke(app, ctx);
    add_bundle(app, ctx);
    add_bench(app, ctx);
    add_mosca(app, ctx);
    add_grover(app, ctx);
    add_shor(app, ctx);
    add_keyserver(app, ctx);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        return ctx.action ? ctx.action() : 2;
    } catch (const Error& e) {
        if (ctx.json) {
            nlohmann::json j;
            j["error"] = e.code();
            j["message"] = e.what();
            out << j.dump(2) << "\n";
        }
        err << e.code() << ": " << e.what() << "\n";
        return 1;
    }
}

}  // namespace pqpki::cli

#endif  // PQPKI_CLI_CLI_HPP
