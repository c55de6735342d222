#ifndef PQPKI_RNG_HPP
#define PQPKI_RNG_HPP

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

#include "pqpki/bytes.hpp"
#include "pqpki/sha256.hpp"

namespace pqpki {

// Deterministic byte source: counter-based expansion of a 32-byte seed,
// block_i = SHA-256(seed || i). All key generation and simulation
// randomness flows through one of these so runs are reproducible.
class SeedRng {
public:
    explicit SeedRng(const Bytes& seed32) {
        auto d = Sha256().update("pqpki.rng.seed").update(seed32).finish();
        std::copy(d.begin(), d.end(), seed_.begin());
    }

    explicit SeedRng(std::uint64_t seed) : SeedRng(u64be_bytes(seed)) {}

    static SeedRng from_system_entropy() {
        std::random_device rd;
        Bytes seed;
        for (int i = 0; i < 8; ++i) append_u32be(seed, rd());
        return SeedRng(seed);
    }

    Bytes bytes(std::size_t n) {
        Bytes out;
        out.reserve(n);
        while (out.size() < n) {
            auto block = Sha256()
                             .update(ByteView(seed_.data(), seed_.size()))
                             .update_u64be(counter_++)
                             .finish();
            std::size_t take = std::min(n - out.size(), block.size());
            out.insert(out.end(), block.begin(), block.begin() + take);
        }
        return out;
    }

    std::uint64_t next_u64() { return read_u64be(bytes(8)); }

    // Uniform in [0, bound) by rejection sampling; bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) {
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        for (;;) {
            std::uint64_t v = next_u64();
            if (v < limit) return v % bound;
        }
    }

    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    bool chance(double probability) {
        if (probability <= 0.0) return false;
        if (probability >= 1.0) return true;
        return uniform01() < probability;
    }

    // Independent child stream; diverging labels give diverging streams.
    SeedRng fork(std::string_view label) {
        Bytes child = labeled_hash("pqpki.rng.fork", {ByteView(seed_.data(), seed_.size()),
                                                      to_bytes(label)});
        return SeedRng(child);
    }

private:
    std::array<std::uint8_t, 32> seed_{};
    std::uint64_t counter_ = 0;
};

}  // namespace pqpki

#endif
