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

#include "dualchain/identity.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>

#include "dualchain/hash.hpp"

namespace dualchain {

std::vector<PsId> Assignment::shards_of_fc(FcId fc) const {
    std::vector<PsId> out;
    for (std::uint32_t k = 0; k < ps_per_fc; ++k) out.emplace_back(fc.value * ps_per_fc + k);
    return out;
}

std::string Assignment::serialize() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < ps_of.size(); ++i)
        os << i << ' ' << ps_of[i].value + 1 << ' ' << fc_of[i].value + 1 << '\n';
    return os.str();
}

Assignment derive_assignment(const EpochRandomness& rand, const secparams::EpochParams& params) {
    params.validate();
    const std::uint32_t N = params.network_size, m = params.ps_size, K = params.ps_per_fc();
    std::vector<std::uint32_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0u);
    auto rng = rand.stream(Stream::Assignment);
    for (std::uint32_t i = N; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform(i)]);

    Assignment a;
    a.ps_per_fc = K;
    a.ps_of.resize(N);
    a.fc_of.resize(N);
    a.pos_in_ps.resize(N);
    a.pos_in_fc.resize(N);
    a.members_of_ps.resize(params.ps_count());
    a.members_of_fc.resize(params.fc_count());
    for (std::uint32_t i = 0; i < N; ++i) {
        const std::uint32_t ps1 = i / m + 1;
        const std::uint32_t fc1 = fc_of_ps_1based(ps1, K);
        const NodeId node(perm[i]);
        a.ps_of[node.value] = PsId(ps1 - 1);
        a.fc_of[node.value] = FcId(fc1 - 1);
        a.members_of_ps[ps1 - 1].push_back(node);
        a.members_of_fc[fc1 - 1].push_back(node);
    }
    for (auto& v : a.members_of_ps) std::sort(v.begin(), v.end());
    for (auto& v : a.members_of_fc) std::sort(v.begin(), v.end());
    for (const auto& v : a.members_of_ps)
        for (std::uint32_t p = 0; p < v.size(); ++p) a.pos_in_ps[v[p].value] = p;
    for (const auto& v : a.members_of_fc)
        for (std::uint32_t p = 0; p < v.size(); ++p) a.pos_in_fc[v[p].value] = p;
    return a;
}

std::vector<NodeId> assign_malicious(const EpochRandomness& rand, const secparams::EpochParams& params) {
    const std::uint32_t N = params.network_size, F = params.malicious_count();
    std::vector<std::uint32_t> pool(N);
    std::iota(pool.begin(), pool.end(), 0u);
    auto rng = rand.stream(Stream::Malicious);
    // Partial Fisher-Yates: the first F slots are a uniform F-subset.
    for (std::uint32_t i = 0; i < F; ++i) std::swap(pool[i], pool[i + rng.uniform(N - i)]);
    std::vector<NodeId> out;
    out.reserve(F);
    for (std::uint32_t i = 0; i < F; ++i) out.emplace_back(pool[i]);
    std::sort(out.begin(), out.end());
    return out;
}

NodeId select_leader(std::span<const NodeId> members, std::uint64_t view, const EpochRandomness& rand,
                     std::uint64_t shard_key) {
    if (members.empty()) throw Error("select_leader: empty member list");
    auto rng = rand.stream(Stream::Leader, {shard_key});
    const std::uint64_t offset = rng.uniform(members.size());
    return members[(offset + view) % members.size()];
}

NodeId pick_complainer(std::span<const NodeId> complainers, const EpochRandomness& rand, PsId ps,
                       std::uint64_t new_view) {
    if (complainers.empty()) throw Error("pick_complainer: no complainers");
    auto rng = rand.stream(Stream::Complainer, {ps.value, new_view});
    return complainers[rng.uniform(complainers.size())];
}

// --- signatures -------------------------------------------------------------

KeyRegistry::KeyRegistry(const EpochRandomness& rand, std::uint64_t node_count, std::uint64_t account_count) {
    auto derive = [&](Principal p) {
        Encoder e;
        e.str("dualchain-key").u64(rand.root()).u64(p);
        return e.digest();
    };
    node_secrets_.reserve(node_count);
    for (std::uint64_t i = 0; i < node_count; ++i) node_secrets_.push_back(derive(i));
    account_secrets_.reserve(account_count);
    for (std::uint64_t i = 0; i < account_count; ++i) account_secrets_.push_back(derive(kAccountBase + i));
}

bool KeyRegistry::knows(Principal p) const {
    if (p < kAccountBase) return p < node_secrets_.size();
    return p - kAccountBase < account_secrets_.size();
}

const Hash256& KeyRegistry::secret(Principal p) const {
    if (!knows(p)) throw UnknownSigner("unknown principal " + std::to_string(p));
    return p < kAccountBase ? node_secrets_[p] : account_secrets_[p - kAccountBase];
}

Hash256 KeyRegistry::tag_for(Principal p, const Hash256& digest) const {
    Encoder e;
    e.hash(secret(p)).u64(p).hash(digest);
    return e.digest();
}

Signer KeyRegistry::issue(Principal p) const {
    (void)secret(p);
    return Signer(this, p);
}

bool KeyRegistry::verify(const Signature& sig, const Hash256& digest, Principal expected) const {
    if (sig.signer != expected || sig.digest != digest || !knows(expected)) return false;
    return tag_for(expected, digest) == sig.tag;
}

Signature Signer::sign(const Hash256& digest) const {
    if (registry_ == nullptr) throw Error("Signer: not issued by a registry");
    return Signature{principal_, digest, registry_->tag_for(principal_, digest)};
}

// --- aggregation ------------------------------------------------------------

bool AggregateVotes::add(std::uint32_t position, const Hash256& tag) {
    auto it = std::lower_bound(entries.begin(), entries.end(), position,
                               [](const auto& e, std::uint32_t p) { return e.first < p; });
    if (it != entries.end() && it->first == position) return false;
    entries.insert(it, {position, tag});
    return true;
}

bool AggregateVotes::has(std::uint32_t position) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), position,
                               [](const auto& e, std::uint32_t p) { return e.first < p; });
    return it != entries.end() && it->first == position;
}

std::vector<std::uint64_t> AggregateVotes::bitmap(std::size_t member_count) const {
    std::vector<std::uint64_t> words((member_count + 63) / 64, 0);
    for (const auto& [pos, tag] : entries)
        if (pos < member_count) words[pos / 64] |= 1ULL << (pos % 64);
    return words;
}

std::size_t AggregateVotes::popcount(std::size_t member_count) const {
    std::size_t c = 0;
    for (auto w : bitmap(member_count)) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

std::int64_t member_position(std::span<const NodeId> members, NodeId node) {
    auto it = std::lower_bound(members.begin(), members.end(), node);
    if (it == members.end() || *it != node) return -1;
    return it - members.begin();
}

AggregateVotes aggregate(std::span<const Signature> sigs, std::span<const NodeId> members) {
    AggregateVotes agg;
    if (!sigs.empty()) agg.digest = sigs.front().digest;
    for (const auto& s : sigs) {
        if (s.signer >= kAccountBase) throw UnknownSigner("aggregate: account signer");
        const auto pos = member_position(members, NodeId(static_cast<std::uint32_t>(s.signer)));
        if (pos < 0) throw UnknownSigner("aggregate: signer " + std::to_string(s.signer) + " is not a member");
        if (s.digest != agg.digest) continue;
        agg.add(static_cast<std::uint32_t>(pos), s.tag);
    }
    return agg;
}

std::size_t count_valid(const AggregateVotes& agg, std::span<const NodeId> members, const KeyRegistry& keys) {
    std::size_t valid = 0;
    for (const auto& [pos, tag] : agg.entries) {
        if (pos >= members.size()) continue;
        const Principal p = principal_of(members[pos]);
        if (keys.verify(Signature{p, agg.digest, tag}, agg.digest, p)) ++valid;
    }
    return valid;
}

}  // namespace dualchain
