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

#include "dualchain/protocol.hpp"

namespace dualchain {

namespace {

std::uint64_t account_span(const std::vector<std::vector<Principal>>& accts) {
    std::uint64_t hi = 0;
    for (const auto& v : accts)
        for (auto p : v) hi = std::max<std::uint64_t>(hi, p - kAccountBase + 1);
    return hi;
}

std::vector<std::vector<Principal>> split_adversary(std::vector<std::vector<Principal>>& all) {
    std::vector<std::vector<Principal>> funded = all;
    for (auto& v : funded) v.pop_back();
    return funded;
}

}  // namespace

World::World(const secparams::EpochParams& p, const EpochRandomness& r, const ProtocolConfig& pc,
             std::uint32_t per_shard, std::uint64_t balance)
    : params(p),
      rand(r),
      assignment(derive_assignment(r, p)),
      keys(r, p.network_size, 0),
      proto(pc),
      genesis_balance(balance),
      behavior(p.network_size) {
    auto all = accounts_per_shard(p.ps_count(), per_shard + 1);
    accounts = split_adversary(all);
    for (const auto& v : all) adversary_accounts.push_back(v.back());
    keys = KeyRegistry(r, p.network_size, account_span(all));
    ctx.assignment = &assignment;
    ctx.keys = &keys;
    ctx.quorum_ps = secparams::quorum_ps(p.ps_size);
    ctx.quorum_fc = secparams::quorum_fc(p.fc_size);
    ctx.block_capacity = pc.block_capacity;
}

ShardState World::genesis_state(PsId ps) const {
    ShardState s;
    s.ps = ps;
    s.tip = ps_genesis(ps);
    for (auto p : accounts.at(ps.value)) s.balances[account_address_for(p)] = genesis_balance;
    return s;
}

std::uint64_t World::initial_supply() const {
    std::uint64_t n = 0;
    for (const auto& v : accounts) n += v.size();
    return n * genesis_balance;
}

const char* to_string(TraceKind k) {
    switch (k) {
        case TraceKind::Propose: return "PROPOSE";
        case TraceKind::Vote: return "VOTE";
        case TraceKind::PsQuorum: return "PS_QUORUM";
        case TraceKind::Complain: return "COMPLAIN";
        case TraceKind::AdoptLeader: return "ADOPT_LEADER";
        case TraceKind::FinalizeAdopted: return "FINALIZE_ADOPTED";
        case TraceKind::FcCache: return "FC_CACHE";
        case TraceKind::FcPropose: return "FC_PROPOSE";
        case TraceKind::FcVote: return "FC_VOTE";
        case TraceKind::FcFinal: return "FC_FINAL";
        case TraceKind::ViewChange: return "VIEW_CHANGE";
        case TraceKind::FcView: return "FC_VIEW";
    }
    return "?";
}

}  // namespace dualchain
