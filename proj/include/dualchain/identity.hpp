/**
 * Copyright 2026 The DualChain Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dualchain/rng.hpp"
#include "dualchain/secparams.hpp"
#include "dualchain/types.hpp"

namespace dualchain {

/// Anyone who can sign: nodes occupy [0, N), accounts start at kAccountBase.
using Principal = std::uint64_t;
inline constexpr Principal kAccountBase = 1ULL << 32;

inline Principal principal_of(NodeId n) { return n.value; }

struct EpochRandomness {
    std::uint64_t seed = 0;
    std::uint64_t epoch = 0;

    /// Root key of every labeled stream for this epoch.
    std::uint64_t root() const { return mix64(seed ^ mix64(epoch + 0x5151)); }
    CounterRng stream(Stream s, std::initializer_list<std::uint64_t> keys = {}) const {
        return CounterRng(root(), s, keys);
    }
};

/// Node → PS/FC placement for one epoch. Member lists are sorted by node id.
struct Assignment {
    std::uint32_t ps_per_fc = 1;
    std::vector<PsId> ps_of;
    std::vector<FcId> fc_of;
    std::vector<std::vector<NodeId>> members_of_ps;
    std::vector<std::vector<NodeId>> members_of_fc;
    std::vector<std::uint32_t> pos_in_ps;
    std::vector<std::uint32_t> pos_in_fc;

    std::size_t node_count() const { return ps_of.size(); }
    std::size_t ps_count() const { return members_of_ps.size(); }
    std::size_t fc_count() const { return members_of_fc.size(); }
    FcId fc_of_ps(PsId ps) const { return FcId(ps.value / ps_per_fc); }
    const std::vector<NodeId>& ps_members(PsId ps) const { return members_of_ps.at(ps.value); }
    const std::vector<NodeId>& fc_members(FcId fc) const { return members_of_fc.at(fc.value); }
    std::vector<PsId> shards_of_fc(FcId fc) const;

    /// One line per node: "node ps fc" with 1-based shard ids.
    std::string serialize() const;
};

/// ⌊(j+K−1)/K⌋ with 1-based PS and FC ids.
constexpr std::uint32_t fc_of_ps_1based(std::uint32_t ps_1based, std::uint32_t k) { return (ps_1based + k - 1) / k; }

/// Seeded permutation of [0,N) cut into consecutive chunks of m.
Assignment derive_assignment(const EpochRandomness& rand, const secparams::EpochParams& params);

/// Uniformly random ⌊f·N⌋-subset, sorted, drawn from its own stream.
std::vector<NodeId> assign_malicious(const EpochRandomness& rand, const secparams::EpochParams& params);

/// Round-robin leader: view 0 starts at a seeded offset per shard.
NodeId select_leader(std::span<const NodeId> members, std::uint64_t view, const EpochRandomness& rand,
                     std::uint64_t shard_key);

/// Uniform pick among complainers (sorted by id) for the replacement in `new_view`.
NodeId pick_complainer(std::span<const NodeId> complainers, const EpochRandomness& rand, PsId ps,
                       std::uint64_t new_view);

struct Signature {
    Principal signer = 0;
    Hash256 digest;
    Hash256 tag;

    bool operator==(const Signature&) const = default;
};

class UnknownSigner : public Error {
  public:
    using Error::Error;
};

class KeyRegistry;

/// Signing capability for one principal. Only the registry can mint these.
class Signer {
  public:
    Signer() = default;
    Signature sign(const Hash256& digest) const;
    Principal principal() const { return principal_; }
    bool valid() const { return registry_ != nullptr; }

  private:
    friend class KeyRegistry;
    Signer(const KeyRegistry* reg, Principal p) : registry_(reg), principal_(p) {}
    const KeyRegistry* registry_ = nullptr;
    Principal principal_ = 0;
};

/// Mock unforgeable signatures: tag = H(secret ‖ digest) with secrets that
/// never leave the registry.
class KeyRegistry {
  public:
    KeyRegistry(const EpochRandomness& rand, std::uint64_t node_count, std::uint64_t account_count);

    Signer issue(Principal p) const;
    bool verify(const Signature& sig, const Hash256& digest, Principal expected) const;
    bool knows(Principal p) const;

  private:
    friend class Signer;
    Hash256 tag_for(Principal p, const Hash256& digest) const;
    const Hash256& secret(Principal p) const;

    std::vector<Hash256> node_secrets_;
    std::vector<Hash256> account_secrets_;
};

inline Signature sign(const Signer& s, const Hash256& digest) { return s.sign(digest); }
inline bool verify(const KeyRegistry& keys, const Signature& sig, const Hash256& digest, NodeId node) {
    return keys.verify(sig, digest, principal_of(node));
}

/// Signatures of shard members over one digest, indexed by member position.
struct AggregateVotes {
    Hash256 digest;
    std::vector<std::pair<std::uint32_t, Hash256>> entries;  // (member position, tag), sorted

    /// Returns false when that position already signed.
    bool add(std::uint32_t position, const Hash256& tag);
    bool has(std::uint32_t position) const;
    std::size_t size() const { return entries.size(); }
    std::vector<std::uint64_t> bitmap(std::size_t member_count) const;
    std::size_t popcount(std::size_t member_count) const;

    bool operator==(const AggregateVotes&) const = default;
};

/// Throws UnknownSigner when a signer is not in `members`.
AggregateVotes aggregate(std::span<const Signature> sigs, std::span<const NodeId> members);

/// Number of distinct members whose entry verifies against agg.digest.
std::size_t count_valid(const AggregateVotes& agg, std::span<const NodeId> members, const KeyRegistry& keys);

/// Position of a node in a sorted member list, or -1.
std::int64_t member_position(std::span<const NodeId> members, NodeId node);

}  // namespace dualchain
