#include <catch2/catch_amalgamated.hpp>

#include <limits>
#include <string>
#include <vector>

#include "pqpki/bench/bench.hpp"
#include "pqpki/io.hpp"

using namespace pqpki;
using Catch::Matchers::WithinAbs;

namespace {

std::uint64_t wots_signature_bytes(std::uint32_t n, std::uint32_t w) {
    return static_cast<std::uint64_t>(sig::wots_chain_lengths(n, w).len) * n;
}

std::uint64_t xmss_signature_bytes(std::uint32_t h, std::uint32_t n,
                                   std::uint32_t w) {
    return 4 + n + wots_signature_bytes(n, w) +
           static_cast<std::uint64_t>(h) * n;
}

const bench::ReferenceRow& reference_row(const std::string& variant) {
    for (const auto& row : bench::reference_table())
        if (row.variant == variant) return row;
    FAIL("no reference row for variant " + variant);
    throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("native benchmarks match the closed-form sizes") {
    for (std::uint32_t n : {16u, 24u, 32u}) {
        for (std::uint32_t w : {4u, 16u, 256u}) {
            const auto wots = bench::run_benchmark(sig::wots_plus(n, w), 3, 32);
            CHECK(wots.public_key_bytes == 2 * n);
            CHECK(wots.secret_key_bytes == 2 * n);
            CHECK(wots.signature_bytes == wots_signature_bytes(n, w));
            CHECK(wots.public_key_bytes ==
                  sig::public_key_size(sig::wots_plus(n, w)));

            const auto xmss =
                bench::run_benchmark(sig::xmss_mt(2, n, w), 3, 32);
            CHECK(xmss.public_key_bytes == 2 * n);
            CHECK(xmss.secret_key_bytes == 3 * n);
            CHECK(xmss.signature_bytes == xmss_signature_bytes(2, n, w));
        }
    }

    const auto wots_default = bench::run_benchmark(sig::wots_plus(), 3, 32);
    CHECK(wots_default.signature_bytes == 2144);
    CHECK(wots_default.algorithm == "WOTS+");

    const auto xmss_tall = bench::run_benchmark(sig::xmss_mt(10), 3, 32);
    CHECK(xmss_tall.signature_bytes == 2500);
    CHECK(xmss_tall.algorithm == "XMSS_MT");

    const auto dl = bench::run_benchmark(sig::toy_dl_default(), 5, 32);
    CHECK(dl.public_key_bytes == 8);
    CHECK(dl.signature_bytes == 16);
    CHECK(dl.secret_key_bytes == 8);

    const auto hyb = bench::run_benchmark(sig::hybrid_default(2), 3, 32);
    CHECK(hyb.algorithm == "HYBRID");
    CHECK(hyb.public_key_bytes == 8 + 64);
    CHECK(hyb.secret_key_bytes == 8 + 96);
    CHECK(hyb.signature_bytes == 16 + xmss_signature_bytes(2, 32, 16));

    SECTION("medians are non-negative and sizes repeat exactly") {
        const auto again = bench::run_benchmark(sig::wots_plus(), 3, 32);
        CHECK(again.public_key_bytes == wots_default.public_key_bytes);
        CHECK(again.signature_bytes == wots_default.signature_bytes);
        CHECK(again.secret_key_bytes == wots_default.secret_key_bytes);
        CHECK(again.keygen_micros >= 0.0);
        CHECK(again.sign_micros >= 0.0);
        CHECK(again.verify_micros >= 0.0);
    }

    SECTION("iteration floor") {
        CHECK_THROWS_AS(bench::run_benchmark(sig::wots_plus(), 1, 32),
                        ParameterError);
        CHECK_THROWS_AS(bench::run_benchmark(sig::wots_plus(), 2, 32),
                        ParameterError);
        CHECK_THROWS_AS(bench::run_benchmark(sig::wots_plus(), 0, 32),
                        ParameterError);
    }
}

TEST_CASE("tables emit the pinned header in both formats") {
    const auto record = bench::run_benchmark(sig::toy_dl_default(), 3, 16);

    const std::string csv =
        bench::emit_table({record}, bench::TableFormat::kCsv);
    const std::string expected_header =
        "Algorithm,Variant,Key generation µs,Signing µs,"
        "Signature verification µs,Public key size byte,Signature size byte,"
        "Secret key size byte";
    REQUIRE(csv.substr(0, csv.find('\n')) == expected_header);

    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 2);
    CHECK(csv.find("TOY_DL,toy-dl-64,") != std::string::npos);
    CHECK(csv.find(",8,16,8\n") != std::string::npos);

    const std::string md =
        bench::emit_table({record}, bench::TableFormat::kMarkdown);
    CHECK(md.rfind("| Algorithm | Variant |", 0) == 0);
    CHECK(md.find("\n| --- | --- | --- | --- | --- | --- | --- | --- |\n") !=
          std::string::npos);
    CHECK(md.find("| TOY_DL | toy-dl-64 |") != std::string::npos);

    CHECK_THROWS_AS(bench::emit_table({}, bench::TableFormat::kCsv),
                    ParameterError);
}

TEST_CASE("reference rows keep the published values verbatim") {
    const auto& rows = bench::reference_table();
    REQUIRE(rows.size() == 13);

    const auto& falcon = reference_row("n=768");
    CHECK(falcon.algorithm == "Falcon");
    CHECK(falcon.classical_bits == "195");
    CHECK(falcon.quantum_bits == "172");
    CHECK(falcon.public_key_bytes == 1441);
    CHECK(falcon.secret_key_bytes == 6145);
    CHECK_THAT(falcon.signature_bytes, WithinAbs(1036.02, 1e-9));

    const auto& dilithium = reference_row("Very high");
    CHECK(dilithium.algorithm == "CRYSTALS-DILITHIUM");
    CHECK(dilithium.keygen_micros == 88);
    CHECK(dilithium.sign_micros == 203);
    CHECK(dilithium.verify_micros == 89);
    CHECK(dilithium.classical_bits == "176/174");
    CHECK(dilithium.quantum_bits == "160/158");
    CHECK(dilithium.security_basis == "SIS/LWE");

    const auto& sphincs = reference_row("sphincs-sha256-192s");
    CHECK(sphincs.signature_bytes == 17064);
    CHECK(sphincs.classical_bits == "196");

    const auto& gemss = reference_row("GeMSS192");
    CHECK(gemss.quantum_bits == "112.2");

    SECTION("every row is fully populated") {
        for (const auto& row : rows) {
            CHECK_FALSE(row.algorithm.empty());
            CHECK_FALSE(row.variant.empty());
            CHECK_FALSE(row.classical_bits.empty());
            CHECK_FALSE(row.quantum_bits.empty());
            CHECK(row.keygen_micros > 0);
            CHECK(row.sign_micros > 0);
            CHECK(row.verify_micros > 0);
            CHECK(row.public_key_bytes > 0);
            CHECK(row.signature_bytes > 0);
            CHECK(row.secret_key_bytes > 0);
        }
    }
}

TEST_CASE("the shipped reference file matches the embedded table byte for byte") {
    const std::string shipped =
        read_text_file(std::string(PQPKI_SOURCE_DIR) + "/data/reference_table.csv");
    CHECK(shipped == bench::reference_csv());
    CHECK(shipped.find("Falcon,n=768,195,172,,13882,562,87,1441,1036.02,6145") !=
          std::string::npos);
    CHECK(shipped.find("CRYSTALS-DILITHIUM,Very high,176/174,160/158,SIS/LWE,"
                       "88,203,89,1760,3366,3856") != std::string::npos);
}

TEST_CASE("the secrecy horizon check is strict and monotone") {
    const auto risky = bench::mosca_check({5, 3, 7});
    CHECK(risky.at_risk);
    CHECK(bench::to_string(risky) == "AT_RISK");

    const auto safe = bench::mosca_check({1, 1, 10});
    CHECK_FALSE(safe.at_risk);
    CHECK_THAT(safe.years_to_spare, WithinAbs(8.0, 1e-12));
    CHECK(bench::to_string(safe) == "SAFE_MARGIN(8)");

    const auto boundary = bench::mosca_check({4, 3, 7});
    CHECK_FALSE(boundary.at_risk);
    CHECK_THAT(boundary.years_to_spare, WithinAbs(0.0, 1e-12));
    CHECK(bench::to_string(boundary) == "SAFE_MARGIN(0)");

    CHECK_THROWS_AS(bench::mosca_check({-1, 3, 7}), ParameterError);
    CHECK_THROWS_AS(bench::mosca_check({1, -3, 7}), ParameterError);
    CHECK_THROWS_AS(bench::mosca_check({1, 3, -7}), ParameterError);
    CHECK_THROWS_AS(
        bench::mosca_check({std::numeric_limits<double>::infinity(), 3, 7}),
        ParameterError);
    CHECK_THROWS_AS(
        bench::mosca_check({1, std::numeric_limits<double>::quiet_NaN(), 7}),
        ParameterError);

    SECTION("monotonicity over a parameter grid") {
        const double grid[] = {0, 1, 2.5, 5, 7, 10};
        const double bump[] = {0.5, 3};
        for (double x : grid)
            for (double y : grid)
                for (double z : grid) {
                    const bool base = bench::mosca_check({x, y, z}).at_risk;
                    for (double d : bump) {
                        if (base) {
                            CHECK(bench::mosca_check({x + d, y, z}).at_risk);
                            CHECK(bench::mosca_check({x, y + d, z}).at_risk);
                        } else {
                            CHECK_FALSE(
                                bench::mosca_check({x, y, z + d}).at_risk);
                        }
                    }
                }
    }
}

TEST_CASE("search speedup halves bits and the recommendation doubles them") {
    CHECK(bench::grover_adjust(256) == 128);
    CHECK(bench::grover_adjust(255) == 127);
    CHECK(bench::grover_adjust(1) == 0);
    CHECK(bench::recommended_symmetric_bits(128) == 256);
    CHECK(bench::recommended_symmetric_bits(1) == 2);

    CHECK_THROWS_AS(bench::grover_adjust(0), ParameterError);
    CHECK_THROWS_AS(bench::grover_adjust(-16), ParameterError);
    CHECK_THROWS_AS(bench::recommended_symmetric_bits(0), ParameterError);
    CHECK_THROWS_AS(bench::recommended_symmetric_bits(-1), ParameterError);

    for (std::int64_t bits : {2, 64, 100, 128, 192, 256})
        CHECK(bench::grover_adjust(bench::recommended_symmetric_bits(bits)) ==
              bits);
}

TEST_CASE("factoring estimates follow the cost model") {
    const auto est = bench::shor_resource_estimate(2048);
    CHECK(est.input_bits == 2048);
    CHECK_THAT(est.logical_qubits, WithinAbs(6189.056, 0.01));
    CHECK_THAT(est.toffoli_count, WithinAbs(48502931.456, 0.01));
    CHECK_THAT(est.measurement_depth, WithinAbs(2143289344.0, 1e-6));

    CHECK_THROWS_AS(bench::shor_resource_estimate(1), ParameterError);
    CHECK_THROWS_AS(bench::shor_resource_estimate(0), ParameterError);
    CHECK_THROWS_AS(bench::shor_resource_estimate(-2048), ParameterError);

    SECTION("each field grows strictly with the modulus size") {
        auto prev = bench::shor_resource_estimate(2);
        for (std::int64_t n = 3; n <= 64; ++n) {
            const auto next = bench::shor_resource_estimate(n);
            CHECK(next.logical_qubits > prev.logical_qubits);
            CHECK(next.toffoli_count > prev.toffoli_count);
            CHECK(next.measurement_depth > prev.measurement_depth);
            prev = next;
        }
    }

    SECTION("the scale note carries the physical context") {
        const std::string note = bench::physical_scale_note();
        CHECK(note.find("8 hours") != std::string::npos);
        CHECK(note.find("20 million") != std::string::npos);
    }
}

TEST_CASE("external schemes require a registered adapter") {
    bench::AdapterRegistry registry;
    CHECK(registry.size() == 0);
    CHECK_FALSE(registry.contains("falcon-n768"));
    CHECK_THROWS_AS(registry.run("falcon-n768", 3, 32), SchemeUnavailable);

    registry.add("echo", [](std::uint32_t, std::size_t) {
        bench::BenchmarkRecord r;
        r.algorithm = "echo";
        r.variant = "v1";
        return r;
    });
    CHECK(registry.contains("echo"));
    CHECK(registry.run("echo", 3, 32).algorithm == "echo");

    // the process-wide hook ships empty
    CHECK(bench::external_adapters().size() == 0);
    CHECK_THROWS_AS(bench::external_adapters().run("dilithium", 3, 32),
                    SchemeUnavailable);
}
