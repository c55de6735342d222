#ifndef PQPKI_SIG_XMSS_HPP
#define PQPKI_SIG_XMSS_HPP

// Stateful Merkle-tree signatures: 2^h one-time leaves, each a Winternitz
// key, compressed to a single root.  The signer must never hand out two
// signatures for one leaf; leaf allocation is the caller's job (the
// dispatch layer advances the key state atomically before signing).
//
// Key layout:
//   public  = publicSeed(n) || root(n)
//   private = secretSeed(n) || publicSeed(n) || prfSeed(n)
// Signature payload:
//   leafIndex(4 BE) || randomizer(n) || len*n chain bytes || h*n auth path
//
// The node cache keeps every tree level in memory (2^(h+1) nodes); it is
// rebuilt from the private seeds when a key is loaded from disk.

#include <cstdint>
#include <memory>
#include <vector>

#include "pqpki/bytes.hpp"
#include "pqpki/errors.hpp"
#include "pqpki/rng.hpp"
#include "pqpki/sha256.hpp"
#include "pqpki/sig/params.hpp"
#include "pqpki/sig/wots.hpp"

namespace pqpki::sig::xmss {

struct NodeCache {
    // levels[0] = leaf hashes, levels[h] = {root}
    std::vector<std::vector<Bytes>> levels;

    const Bytes& root() const { return levels.back().front(); }
};

inline std::uint64_t leaf_capacity(std::uint32_t h) {
    return std::uint64_t{1} << h;
}

inline std::size_t payload_size(const SchemeParams& p) {
    const WotsChainLengths cl = wots_chain_lengths(p.n, p.w);
    return 4 + static_cast<std::size_t>(p.n) * (1 + cl.len + p.h);
}

inline Bytes hash_leaf(ByteView public_seed, std::uint32_t index,
                       ByteView compressed_ends, std::uint32_t n) {
    const Bytes pos = u32be_bytes(index);
    return labeled_hash("pqpki.xmss.leaf",
                        {public_seed, ByteView(pos), compressed_ends}, n);
}

inline Bytes hash_node(ByteView public_seed, std::uint32_t level,
                       std::uint32_t index, ByteView left, ByteView right,
                       std::uint32_t n) {
    const Bytes pos_level = u32be_bytes(level);
    const Bytes pos_index = u32be_bytes(index);
    return labeled_hash(
        "pqpki.xmss.node",
        {public_seed, ByteView(pos_level), ByteView(pos_index), left, right}, n);
}

inline Bytes leaf_hash_from_seeds(ByteView secret_seed, ByteView public_seed,
                                  std::uint32_t index, std::uint32_t n,
                                  std::uint32_t w) {
    const auto ends =
        wots::public_chain_ends(secret_seed, public_seed, index, n, w);
    const Bytes compressed =
        wots::compress_chain_ends(public_seed, index, ends, n);
    return hash_leaf(public_seed, index, compressed, n);
}

inline std::shared_ptr<const NodeCache> build_node_cache(ByteView secret_seed,
                                                         ByteView public_seed,
                                                         const SchemeParams& p) {
    auto cache = std::make_shared<NodeCache>();
    cache->levels.resize(p.h + 1);
    const std::uint64_t leaves = leaf_capacity(p.h);
    cache->levels[0].reserve(leaves);
    for (std::uint64_t i = 0; i < leaves; ++i)
        cache->levels[0].push_back(leaf_hash_from_seeds(
            secret_seed, public_seed, static_cast<std::uint32_t>(i), p.n, p.w));
    for (std::uint32_t level = 1; level <= p.h; ++level) {
        const auto& below = cache->levels[level - 1];
        auto& here = cache->levels[level];
        here.reserve(below.size() / 2);
        for (std::size_t i = 0; i + 1 < below.size(); i += 2)
            here.push_back(hash_node(public_seed, level,
                                     static_cast<std::uint32_t>(i / 2),
                                     below[i], below[i + 1], p.n));
    }
    return cache;
}

struct RawKeyPair {
    Bytes public_key;
    Bytes private_key;
    std::shared_ptr<const NodeCache> cache;
};

inline RawKeyPair keygen(const SchemeParams& p, SeedRng& rng) {
    RawKeyPair kp;
    const Bytes secret_seed = rng.bytes(p.n);
    const Bytes public_seed = rng.bytes(p.n);
    const Bytes prf_seed = rng.bytes(p.n);
    kp.cache = build_node_cache(secret_seed, public_seed, p);
    kp.public_key = public_seed;
    append(kp.public_key, kp.cache->root());
    kp.private_key = secret_seed;
    append(kp.private_key, public_seed);
    append(kp.private_key, prf_seed);
    return kp;
}

inline std::shared_ptr<const NodeCache> rebuild_cache(const SchemeParams& p,
                                                      ByteView private_key) {
    if (private_key.size() != 3 * static_cast<std::size_t>(p.n))
        throw DecodeError("xmss private key has wrong length");
    return build_node_cache(private_key.subspan(0, p.n),
                            private_key.subspan(p.n, p.n), p);
}

// Message digest bound to the randomizer, the tree root, and the leaf index.
inline Bytes message_digest(ByteView randomizer, ByteView root,
                            std::uint32_t leaf, ByteView message,
                            std::uint32_t n) {
    const Bytes pos = u32be_bytes(leaf);
    return labeled_hash("pqpki.xmss.msg",
                        {randomizer, root, ByteView(pos), message}, n);
}

// Signs with an already-reserved leaf.  The caller must have advanced the
// key state past `leaf` before calling; nothing here rechecks that.
inline Bytes sign_with_leaf(const SchemeParams& p, ByteView private_key,
                            const NodeCache& cache, std::uint32_t leaf,
                            ByteView message) {
    if (private_key.size() != 3 * static_cast<std::size_t>(p.n))
        throw ParameterError("xmss private key has wrong length");
    const ByteView secret_seed = private_key.subspan(0, p.n);
    const ByteView public_seed = private_key.subspan(p.n, p.n);
    const ByteView prf_seed = private_key.subspan(2 * static_cast<std::size_t>(p.n), p.n);

    const Bytes pos = u32be_bytes(leaf);
    const Bytes randomizer =
        labeled_hash("pqpki.xmss.r", {prf_seed, ByteView(pos)}, p.n);
    const Bytes digest =
        message_digest(randomizer, cache.root(), leaf, message, p.n);

    Bytes payload;
    append_u32be(payload, leaf);
    append(payload, randomizer);
    append(payload, wots::sign_digest(secret_seed, public_seed, leaf, digest,
                                      p.n, p.w));
    for (std::uint32_t level = 0; level < p.h; ++level) {
        const std::uint32_t sibling = (leaf >> level) ^ 1u;
        append(payload, cache.levels[level][sibling]);
    }
    return payload;
}

inline bool verify(const SchemeParams& p, ByteView public_key, ByteView message,
                   ByteView payload) {
    if (public_key.size() != 2 * static_cast<std::size_t>(p.n))
        throw DecodeError("xmss public key has wrong length");
    if (payload.size() != payload_size(p))
        throw DecodeError("xmss signature payload has wrong length");
    const ByteView public_seed = public_key.subspan(0, p.n);
    const ByteView root = public_key.subspan(p.n, p.n);

    const std::uint32_t leaf = read_u32be(payload);
    if (leaf >= leaf_capacity(p.h)) return false;
    const WotsChainLengths cl = wots_chain_lengths(p.n, p.w);
    std::size_t off = 4;
    const ByteView randomizer = payload.subspan(off, p.n);
    off += p.n;
    const ByteView chains = payload.subspan(off, static_cast<std::size_t>(cl.len) * p.n);
    off += static_cast<std::size_t>(cl.len) * p.n;

    const Bytes digest = message_digest(randomizer, root, leaf, message, p.n);
    const auto ends = wots::chain_ends_from_signature(chains, public_seed, leaf,
                                                      digest, p.n, p.w);
    const Bytes compressed =
        wots::compress_chain_ends(public_seed, leaf, ends, p.n);
    Bytes node = hash_leaf(public_seed, leaf, compressed, p.n);
    for (std::uint32_t level = 0; level < p.h; ++level) {
        const ByteView sibling = payload.subspan(off, p.n);
        off += p.n;
        const std::uint32_t parent_index = leaf >> (level + 1);
        if (((leaf >> level) & 1u) == 0)
            node = hash_node(public_seed, level + 1, parent_index, node, sibling,
                             p.n);
        else
            node = hash_node(public_seed, level + 1, parent_index, sibling, node,
                             p.n);
    }
    return equal_bytes(node, root);
}

}  // namespace pqpki::sig::xmss

#endif
