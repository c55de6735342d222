#ifndef PQPKI_BENCH_BENCH_HPP
#define PQPKI_BENCH_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pqpki/errors.hpp"
#include "pqpki/rng.hpp"
#include "pqpki/sig/sigcore.hpp"

// Measurement harness for the native schemes plus embedded reference
// measurements for the standardization-track signature families, the
// secrecy-horizon check, and quantum-attack resource estimates.
namespace pqpki::bench {

// One measured scheme.  Times are medians in microseconds; sizes are the
// raw artifact sizes (framing excluded), so they line up with the
// closed-form formulas in sigcore.
struct BenchmarkRecord {
    std::string algorithm;
    std::string variant;
    double keygen_micros = 0;
    double sign_micros = 0;
    double verify_micros = 0;
    std::uint64_t public_key_bytes = 0;
    std::uint64_t signature_bytes = 0;
    std::uint64_t secret_key_bytes = 0;

    bool operator==(const BenchmarkRecord&) const = default;
};

// One published row for an external scheme, kept verbatim.  Security-bit
// columns are text: one scheme reports a pair of estimates under two
// hardness assumptions ("176/174", basis "SIS/LWE") and another a
// fractional bit count, and choosing a single number would editorialize.
// Fractional byte sizes are averages: those signature encodings vary per
// message.
struct ReferenceRow {
    std::string algorithm;
    std::string variant;
    std::string classical_bits;
    std::string quantum_bits;
    std::string security_basis;  // non-empty when the bit columns hold pairs
    double keygen_micros = 0;
    double sign_micros = 0;
    double verify_micros = 0;
    double public_key_bytes = 0;
    double signature_bytes = 0;
    double secret_key_bytes = 0;

    bool operator==(const ReferenceRow&) const = default;
};

// X: how long the data must stay secret.  Y: how long migration takes.
// Z: years until a cryptographically relevant quantum computer.
struct MoscaParams {
    double secrecy_lifetime_years = 0;
    double migration_years = 0;
    double quantum_break_years = 0;
};

struct MoscaVerdict {
    bool at_risk = false;
    double years_to_spare = 0;  // meaningful only when not at risk

    bool operator==(const MoscaVerdict&) const = default;
};

struct QuantumResourceEstimate {
    std::int64_t input_bits = 0;
    double logical_qubits = 0;
    double toffoli_count = 0;
    double measurement_depth = 0;
};

namespace detail {

inline double micros_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::micro>(
               std::chrono::steady_clock::now() - t0)
        .count();
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    if (v.size() % 2 == 1) return v[mid];
    return (v[mid - 1] + v[mid]) / 2.0;
}

// Shortest decimal form: integers print bare, fractions keep their digits
// ("1036.02" stays "1036.02", never "1036.020000").
inline std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", value);
    return buf;
}

inline const char* family_name(sig::SchemeId id) {
    switch (id) {
        case sig::SchemeId::kToyDl: return "TOY_DL";
        case sig::SchemeId::kWotsPlus: return "WOTS+";
        case sig::SchemeId::kXmssMt: return "XMSS_MT";
        case sig::SchemeId::kHybrid: return "HYBRID";
    }
    throw ParameterError("unknown scheme id");
}

}  // namespace detail

// --- measuring the native schemes ---------------------------------------------

// Medians over `iterations` timed runs, one untimed warm-up cycle first.
// Every iteration signs with a fresh key pair so one-time and stateful
// schemes never exhaust mid-run, and signing time never includes key
// generation.  The RNG seed is fixed: sizes are deterministic, timings
// are whatever the machine gives (repeat runs land within normal
// scheduler jitter, typically a few percent; nothing asserts on them).
inline BenchmarkRecord run_benchmark(const sig::SchemeDescriptor& d,
                                     std::uint32_t iterations,
                                     std::size_t message_bytes) {
    if (iterations < 3)
        throw ParameterError("benchmark needs at least 3 iterations");
    sig::validate(d);
    SeedRng rng(0x62656e6368ull);
    const Bytes message = rng.bytes(message_bytes);

    {
        sig::KeyPair warm = sig::keygen(d, rng);
        const sig::SignatureValue sv = sig::sign(warm, message);
        if (!sig::verify(warm.public_key, d, message, sv))
            throw SignatureInvalid("warm-up signature did not verify");
    }

    std::vector<sig::KeyPair> keys;
    keys.reserve(iterations);
    std::vector<double> keygen_times, sign_times, verify_times;
    for (std::uint32_t i = 0; i < iterations; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        keys.push_back(sig::keygen(d, rng));
        keygen_times.push_back(detail::micros_since(t0));
    }

    std::vector<sig::SignatureValue> sigs;
    sigs.reserve(iterations);
    for (std::uint32_t i = 0; i < iterations; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        sigs.push_back(sig::sign(keys[i], message));
        sign_times.push_back(detail::micros_since(t0));
    }

    for (std::uint32_t i = 0; i < iterations; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const bool ok = sig::verify(keys[i].public_key, d, message, sigs[i]);
        verify_times.push_back(detail::micros_since(t0));
        if (!ok) throw SignatureInvalid("benchmark signature did not verify");
    }

    BenchmarkRecord rec;
    rec.algorithm = detail::family_name(d.scheme_id);
    rec.variant = d.display_name;
    rec.keygen_micros = detail::median(std::move(keygen_times));
    rec.sign_micros = detail::median(std::move(sign_times));
    rec.verify_micros = detail::median(std::move(verify_times));
    rec.public_key_bytes = sig::public_key_bytes(keys[0]);
    rec.signature_bytes = sig::signature_payload_bytes(sigs[0]);
    rec.secret_key_bytes = sig::private_key_bytes(keys[0]);
    return rec;
}

// External implementations plug in by name; none ship.  Running a name
// with no adapter reports the scheme as unavailable rather than
// silently substituting a native stand-in.
class AdapterRegistry {
public:
    using AdapterFn = std::function<BenchmarkRecord(std::uint32_t iterations,
                                                    std::size_t message_bytes)>;

    void add(const std::string& name, AdapterFn fn) {
        adapters_[name] = std::move(fn);
    }
    bool contains(const std::string& name) const {
        return adapters_.count(name) != 0;
    }
    std::size_t size() const { return adapters_.size(); }

    BenchmarkRecord run(const std::string& name, std::uint32_t iterations,
                        std::size_t message_bytes) const {
        const auto it = adapters_.find(name);
        if (it == adapters_.end())
            throw SchemeUnavailable("no benchmark adapter registered for \"" +
                                    name + "\"");
        return it->second(iterations, message_bytes);
    }

private:
    std::map<std::string, AdapterFn> adapters_;
};

inline AdapterRegistry& external_adapters() {
    static AdapterRegistry registry;
    return registry;
}

// --- table output ---------------------------------------------------------------

enum class TableFormat : std::uint8_t { kCsv = 0, kMarkdown = 1 };

inline constexpr const char* kBenchColumns[8] = {
    "Algorithm",
    "Variant",
    "Key generation µs",
    "Signing µs",
    "Signature verification µs",
    "Public key size byte",
    "Signature size byte",
    "Secret key size byte",
};

namespace detail {

inline std::vector<std::string> row_cells(const BenchmarkRecord& r) {
    return {r.algorithm,
            r.variant,
            format_number(r.keygen_micros),
            format_number(r.sign_micros),
            format_number(r.verify_micros),
            std::to_string(r.public_key_bytes),
            std::to_string(r.signature_bytes),
            std::to_string(r.secret_key_bytes)};
}

inline std::string join_csv(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i != 0) out += ',';
        out += cells[i];
    }
    return out;
}

inline std::string join_markdown(const std::vector<std::string>& cells) {
    std::string out = "|";
    for (const auto& c : cells) {
        out += ' ';
        out += c;
        out += " |";
    }
    return out;
}

}  // namespace detail

// Fields never contain commas or pipes, so no quoting layer is needed.
inline std::string emit_table(const std::vector<BenchmarkRecord>& records,
                              TableFormat format) {
    if (records.empty()) throw ParameterError("no records to tabulate");
    std::vector<std::string> header(std::begin(kBenchColumns),
                                    std::end(kBenchColumns));
    std::string out;
    if (format == TableFormat::kCsv) {
        out += detail::join_csv(header) + "\n";
        for (const auto& r : records)
            out += detail::join_csv(detail::row_cells(r)) + "\n";
        return out;
    }
    out += detail::join_markdown(header) + "\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& r : records)
        out += detail::join_markdown(detail::row_cells(r)) + "\n";
    return out;
}

// --- published reference measurements ---------------------------------------------
//
// Third-round standardization-track signature schemes near the 190-bit
// classical level, as measured on an Intel Core i5-6267U @ 2.90GHz.
// These are reference data for comparison tables; nothing asserts local
// timings against them.

inline const std::vector<ReferenceRow>& reference_table() {
    static const std::vector<ReferenceRow> rows = {
        {"Falcon", "n=768", "195", "172", "", 13882, 562, 87, 1441, 1036.02,
         6145},
        {"CRYSTALS-DILITHIUM", "Very high", "176/174", "160/158", "SIS/LWE",
         88, 203, 89, 1760, 3366, 3856},
        {"Rainbow", "Classic", "207", "169", "", 34980, 277, 317, 710640, 156,
         511448},
        {"Rainbow", "Compressed", "207", "169", "", 41371, 24707, 7094,
         206744, 156, 64},
        {"GeMSS", "GeMSS192", "192", "112.2", "", 79817, 900851, 478, 1304192,
         52, 40280},
        {"GeMSS", "BlueGeMSS192", "192", "112.2", "", 81263, 132560, 557,
         1331744, 53, 41720},
        {"GeMSS", "RedGeMSS192", "192", "112.2", "", 83529, 3672, 447,
         1359584, 55, 40760},
        {"Picnic", "picnic-L3-FS", "192", "96", "", 18, 10064, 8608, 49,
         74191.2, 73},
        {"Picnic", "picnic-L3-UR", "192", "96", "", 24, 13224, 11088, 49,
         121849, 73},
        {"Picnic", "picnic2-L3-FS", "192", "96", "", 20, 443936, 157228, 49,
         27062.15, 73},
        {"SPHINCS+", "sphincs-haraka-192f", "194", "97", "", 14844, 439211,
         21963, 48, 35664, 96},
        {"SPHINCS+", "sphincs-sha256-192s", "196", "98", "", 195818, 4390120,
         3486, 48, 17064, 96},
        {"SPHINCS+", "sphincs-shake256-192f", "194", "97", "", 8767, 240173,
         12405, 48, 35664, 96},
    };
    return rows;
}

inline constexpr const char* kReferenceHeader =
    "Algorithm,Variant,Classical security bit,Quantum security bit,"
    "Security basis,Key generation µs,Signing µs,"
    "Signature verification µs,Public key size byte,Signature size byte,"
    "Secret key size byte";

inline std::string reference_csv() {
    std::string out = kReferenceHeader;
    out += "\n";
    for (const auto& r : reference_table()) {
        out += detail::join_csv({r.algorithm, r.variant, r.classical_bits,
                                 r.quantum_bits, r.security_basis,
                                 detail::format_number(r.keygen_micros),
                                 detail::format_number(r.sign_micros),
                                 detail::format_number(r.verify_micros),
                                 detail::format_number(r.public_key_bytes),
                                 detail::format_number(r.signature_bytes),
                                 detail::format_number(r.secret_key_bytes)});
        out += "\n";
    }
    return out;
}

// --- secrecy horizon --------------------------------------------------------------

// Data recorded today must stay secret for X years, and moving to new
// cryptography takes Y years; if X + Y exceeds the Z years until a
// sufficiently large quantum computer exists, that data is already at
// risk of retroactive decryption.  The comparison is strict: landing
// exactly on the horizon leaves zero years to spare but is not flagged.
inline MoscaVerdict mosca_check(const MoscaParams& p) {
    for (const double v : {p.secrecy_lifetime_years, p.migration_years,
                           p.quantum_break_years}) {
        if (!std::isfinite(v))
            throw ParameterError("horizon parameters must be finite");
        if (v < 0) throw ParameterError("horizon parameters must be >= 0");
    }
    const double needed = p.secrecy_lifetime_years + p.migration_years;
    MoscaVerdict verdict;
    if (needed > p.quantum_break_years) {
        verdict.at_risk = true;
    } else {
        verdict.at_risk = false;
        verdict.years_to_spare = p.quantum_break_years - needed;
    }
    return verdict;
}

inline std::string to_string(const MoscaVerdict& v) {
    if (v.at_risk) return "AT_RISK";
    return "SAFE_MARGIN(" + detail::format_number(v.years_to_spare) + ")";
}

// --- key-size adjustments under quadratic search speedup ------------------------

inline std::int64_t grover_adjust(std::int64_t classical_bits) {
    if (classical_bits <= 0)
        throw ParameterError("security bits must be positive");
    return classical_bits / 2;
}

inline std::int64_t recommended_symmetric_bits(std::int64_t target_quantum_bits) {
    if (target_quantum_bits <= 0)
        throw ParameterError("security bits must be positive");
    return 2 * target_quantum_bits;
}

// --- factoring resource estimate ---------------------------------------------------

// Cost model for factoring an n-bit RSA modulus on a fault-tolerant
// quantum computer: 3n + 0.002 n lg n logical qubits, 0.3 n^2 +
// 0.0005 n^3 lg n Toffoli gates, 500 n^2 + n^2 lg n measurement depth
// (lg = log2; these are bit counts).
inline QuantumResourceEstimate shor_resource_estimate(std::int64_t n) {
    if (n < 2) throw ParameterError("modulus must be at least 2 bits");
    const double nn = static_cast<double>(n);
    const double lg = std::log2(nn);
    QuantumResourceEstimate est;
    est.input_bits = n;
    est.logical_qubits = 3 * nn + 0.002 * nn * lg;
    est.toffoli_count = 0.3 * nn * nn + 0.0005 * nn * nn * nn * lg;
    est.measurement_depth = 500 * nn * nn + nn * nn * lg;
    return est;
}

// Physical-scale context for the estimate above.
inline std::string physical_scale_note() {
    return "At physical scale, factoring a 2048 bit RSA modulus is "
           "projected to take about 8 hours on roughly 20 million noisy "
           "qubits once error correction is accounted for.";
}

}  // namespace pqpki::bench

#endif
