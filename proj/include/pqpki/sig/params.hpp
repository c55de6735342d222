#ifndef PQPKI_SIG_PARAMS_HPP
#define PQPKI_SIG_PARAMS_HPP

// Scheme identification, parameter sets, and the security bookkeeping that
// drives both certificate policy and the benchmark reports.
//
// Parameter invariants enforced by validate():
//   WOTS_PLUS   n in {16,24,32}, w in {4,16,256}
//   XMSS_MT     WOTS_PLUS rules plus 1 <= h <= 20
//   TOY_DL      q | p-1 and g generates the order-q subgroup
//   HYBRID      exactly two inner descriptors, one quantum-vulnerable
//               (the legacy half) and one quantum-resistant, listed in
//               that order; hybrids never nest

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "pqpki/errors.hpp"

namespace pqpki::sig {

enum class SchemeId : std::uint8_t {
    kToyDl = 1,
    kWotsPlus = 2,
    kXmssMt = 3,
    kHybrid = 4,
};

inline const char* scheme_name(SchemeId id) {
    switch (id) {
        case SchemeId::kToyDl: return "TOY_DL";
        case SchemeId::kWotsPlus: return "WOTS_PLUS";
        case SchemeId::kXmssMt: return "XMSS_MT";
        case SchemeId::kHybrid: return "HYBRID";
    }
    return "UNKNOWN";
}

inline SchemeId scheme_from_name(const std::string& name) {
    if (name == "TOY_DL") return SchemeId::kToyDl;
    if (name == "WOTS_PLUS") return SchemeId::kWotsPlus;
    if (name == "XMSS_MT") return SchemeId::kXmssMt;
    if (name == "HYBRID") return SchemeId::kHybrid;
    throw ParameterError("unknown scheme name: " + name);
}

// Unused fields stay zero; validate() checks only the fields the scheme
// actually reads.
struct SchemeParams {
    std::uint32_t n = 0;  // hash output bytes (WOTS_PLUS, XMSS_MT)
    std::uint32_t w = 0;  // Winternitz parameter (WOTS_PLUS, XMSS_MT)
    std::uint32_t h = 0;  // tree height (XMSS_MT)
    std::uint64_t prime_p = 0;           // TOY_DL modulus
    std::uint64_t subgroup_order_q = 0;  // TOY_DL subgroup order
    std::uint64_t generator_g = 0;       // TOY_DL subgroup generator

    bool operator==(const SchemeParams&) const = default;
};

struct WotsChainLengths {
    std::uint32_t len1 = 0;
    std::uint32_t len2 = 0;
    std::uint32_t len = 0;
};

// Number of hash chains for message digits (len1), checksum digits (len2)
// and their total.  lg(w) divides 8 for every supported w, so len1 is
// exact; len2 = floor(log2(len1*(w-1)) / lg(w)) + 1.
inline WotsChainLengths wots_chain_lengths(std::uint32_t n, std::uint32_t w) {
    if (n != 16 && n != 24 && n != 32)
        throw ParameterError("wots n must be 16, 24 or 32");
    if (w != 4 && w != 16 && w != 256)
        throw ParameterError("wots w must be 4, 16 or 256");
    const std::uint32_t lgw = static_cast<std::uint32_t>(std::bit_width(w) - 1);
    WotsChainLengths out;
    out.len1 = (8u * n + lgw - 1u) / lgw;
    const std::uint64_t top = static_cast<std::uint64_t>(out.len1) * (w - 1u);
    const std::uint32_t log2top = static_cast<std::uint32_t>(std::bit_width(top) - 1);
    out.len2 = log2top / lgw + 1u;
    out.len = out.len1 + out.len2;
    return out;
}

namespace detail {

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t acc = 1 % m;
    base %= m;
    while (exp != 0) {
        if (exp & 1u) acc = mulmod_u64(acc, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1u;
    }
    return acc;
}

// Deterministic Miller-Rabin, exact for all 64-bit inputs with this base set.
inline bool is_prime_u64(std::uint64_t v) {
    if (v < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull,
                            19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (v == p) return true;
        if (v % p == 0) return false;
    }
    std::uint64_t d = v - 1;
    int r = 0;
    while ((d & 1u) == 0) { d >>= 1u; ++r; }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull,
                            19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod_u64(a, d, v);
        if (x == 1 || x == v - 1) continue;
        bool witness = true;
        for (int i = 0; i < r - 1; ++i) {
            x = mulmod_u64(x, x, v);
            if (x == v - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

}  // namespace detail

struct SchemeDescriptor {
    SchemeId scheme_id = SchemeId::kToyDl;
    SchemeParams params;
    std::string display_name;
    // HYBRID only: legacy component first, quantum-resistant component second.
    std::vector<SchemeDescriptor> inner;

    bool operator==(const SchemeDescriptor&) const = default;
};

inline bool quantum_vulnerable(const SchemeDescriptor& d) {
    switch (d.scheme_id) {
        case SchemeId::kToyDl: return true;
        case SchemeId::kWotsPlus:
        case SchemeId::kXmssMt: return false;
        case SchemeId::kHybrid:
            for (const auto& c : d.inner)
                if (!quantum_vulnerable(c)) return false;
            return true;
    }
    return true;
}

inline void validate(const SchemeDescriptor& d) {
    switch (d.scheme_id) {
        case SchemeId::kToyDl: {
            const auto& p = d.params;
            if (p.prime_p == 0 || p.subgroup_order_q == 0 || p.generator_g == 0)
                throw ParameterError("toy-dl parameters must be strictly positive");
            if (!detail::is_prime_u64(p.prime_p))
                throw ParameterError("toy-dl modulus is not prime");
            if (!detail::is_prime_u64(p.subgroup_order_q))
                throw ParameterError("toy-dl subgroup order is not prime");
            if ((p.prime_p - 1) % p.subgroup_order_q != 0)
                throw ParameterError("toy-dl subgroup order does not divide p-1");
            if (p.generator_g <= 1 || p.generator_g >= p.prime_p)
                throw ParameterError("toy-dl generator out of range");
            if (detail::powmod_u64(p.generator_g, p.subgroup_order_q, p.prime_p) != 1)
                throw ParameterError("toy-dl generator does not have order q");
            break;
        }
        case SchemeId::kWotsPlus:
            wots_chain_lengths(d.params.n, d.params.w);
            break;
        case SchemeId::kXmssMt:
            wots_chain_lengths(d.params.n, d.params.w);
            if (d.params.h < 1 || d.params.h > 20)
                throw ParameterError("xmss height must be between 1 and 20");
            break;
        case SchemeId::kHybrid: {
            if (d.inner.size() != 2)
                throw ParameterError("hybrid requires exactly two inner schemes");
            for (const auto& c : d.inner) {
                if (c.scheme_id == SchemeId::kHybrid)
                    throw ParameterError("hybrid schemes do not nest");
                validate(c);
            }
            if (!quantum_vulnerable(d.inner[0]) || quantum_vulnerable(d.inner[1]))
                throw ParameterError(
                    "hybrid must pair a legacy scheme (first) with a "
                    "quantum-resistant scheme (second)");
            break;
        }
        default:
            throw ParameterError("unknown scheme id");
    }
}

// --- security accounting ---------------------------------------------------
//
// Classical bits:
//   TOY_DL     floor(log2 q) / 2   (meet-in-the-middle over the exponent)
//   WOTS_PLUS  8n                  (second-preimage bound on the chains)
//   XMSS_MT    8n - 4              (constant multi-target margin)
// Quantum bits: 0 for vulnerable schemes, floor(classical/2) otherwise
// (Grover-style square root).  A hybrid inherits the best classical level
// and the weakest quantum level among its quantum-resistant parts.

inline constexpr std::uint32_t kWotsMarginBits = 0;
inline constexpr std::uint32_t kXmssMultiTargetMarginBits = 4;

struct SecurityProfile {
    std::uint32_t classical_bits = 0;
    std::uint32_t quantum_bits = 0;
    bool vulnerable_to_shor = false;
};

inline SecurityProfile security_profile(const SchemeDescriptor& d) {
    SecurityProfile out;
    switch (d.scheme_id) {
        case SchemeId::kToyDl: {
            const std::uint64_t q = d.params.subgroup_order_q;
            if (q == 0) throw ParameterError("toy-dl subgroup order missing");
            out.classical_bits =
                static_cast<std::uint32_t>(std::bit_width(q) - 1) / 2u;
            out.quantum_bits = 0;
            out.vulnerable_to_shor = true;
            return out;
        }
        case SchemeId::kWotsPlus:
            out.classical_bits = 8u * d.params.n - kWotsMarginBits;
            out.quantum_bits = out.classical_bits / 2u;
            out.vulnerable_to_shor = false;
            return out;
        case SchemeId::kXmssMt:
            out.classical_bits = 8u * d.params.n - kXmssMultiTargetMarginBits;
            out.quantum_bits = out.classical_bits / 2u;
            out.vulnerable_to_shor = false;
            return out;
        case SchemeId::kHybrid: {
            validate(d);
            out.vulnerable_to_shor = quantum_vulnerable(d);
            bool any_resistant = false;
            for (const auto& c : d.inner) {
                const SecurityProfile cp = security_profile(c);
                out.classical_bits = std::max(out.classical_bits, cp.classical_bits);
                if (!cp.vulnerable_to_shor) {
                    out.quantum_bits = any_resistant
                        ? std::min(out.quantum_bits, cp.quantum_bits)
                        : cp.quantum_bits;
                    any_resistant = true;
                }
            }
            if (!any_resistant) out.quantum_bits = 0;
            return out;
        }
    }
    throw ParameterError("unknown scheme id");
}

// --- presets -----------------------------------------------------------------
//
// The default toy-dl group is a 64-bit safe prime (q = (p-1)/2, 63 bits).
// The breakable group keeps a 63-bit modulus but a 21-bit subgroup, small
// enough for the exhaustive-search attack demo to finish in milliseconds.

inline SchemeDescriptor toy_dl_default() {
    SchemeDescriptor d;
    d.scheme_id = SchemeId::kToyDl;
    d.params.prime_p = 18202734029764158467ull;
    d.params.subgroup_order_q = 9101367014882079233ull;
    d.params.generator_g = 5018378299691410974ull;
    d.display_name = "toy-dl-64";
    return d;
}

inline SchemeDescriptor toy_dl_breakable() {
    SchemeDescriptor d;
    d.scheme_id = SchemeId::kToyDl;
    d.params.prime_p = 9223372036908742103ull;
    d.params.subgroup_order_q = 1439717ull;
    d.params.generator_g = 992727091739928025ull;
    d.display_name = "toy-dl-breakable";
    return d;
}

inline SchemeDescriptor wots_plus(std::uint32_t n = 32, std::uint32_t w = 16) {
    SchemeDescriptor d;
    d.scheme_id = SchemeId::kWotsPlus;
    d.params.n = n;
    d.params.w = w;
    d.display_name = "wots+-n" + std::to_string(n) + "-w" + std::to_string(w);
    return d;
}

inline SchemeDescriptor xmss_mt(std::uint32_t h = 10, std::uint32_t n = 32,
                             std::uint32_t w = 16) {
    SchemeDescriptor d;
    d.scheme_id = SchemeId::kXmssMt;
    d.params.n = n;
    d.params.w = w;
    d.params.h = h;
    d.display_name = "xmss-h" + std::to_string(h) + "-n" + std::to_string(n) +
                     "-w" + std::to_string(w);
    return d;
}

inline SchemeDescriptor hybrid(SchemeDescriptor legacy, SchemeDescriptor pq) {
    SchemeDescriptor d;
    d.scheme_id = SchemeId::kHybrid;
    d.display_name = "hybrid(" + legacy.display_name + "+" + pq.display_name + ")";
    d.inner.push_back(std::move(legacy));
    d.inner.push_back(std::move(pq));
    validate(d);
    return d;
}

inline SchemeDescriptor hybrid_default(std::uint32_t h = 10) {
    return hybrid(toy_dl_default(), xmss_mt(h));
}

}  // namespace pqpki::sig

#endif
