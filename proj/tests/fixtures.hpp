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

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "dualchain/hash.hpp"
#include "dualchain/identity.hpp"
#include "dualchain/ledger.hpp"
#include "dualchain/secparams.hpp"

namespace dualchain::testing {

/// Tiny epoch with funded accounts and helpers that forge nothing: every
/// signature comes from the registry.
struct MiniWorld {
    secparams::EpochParams params;
    EpochRandomness rand;
    Assignment assignment;
    std::vector<std::vector<Principal>> accounts;
    KeyRegistry keys;
    LedgerContext ctx;

    MiniWorld(std::uint32_t N, std::uint32_t n, std::uint32_t m, std::uint64_t seed, std::uint32_t per_shard = 4)
        : params(secparams::EpochParams::make(N, 0.0, n, m)),
          rand{seed, 0},
          assignment(derive_assignment(rand, params)),
          accounts(accounts_per_shard(params.ps_count(), per_shard)),
          keys(rand, N, max_account(accounts) + 1) {
        ctx.assignment = &assignment;
        ctx.keys = &keys;
        ctx.quorum_ps = secparams::quorum_ps(m);
        ctx.quorum_fc = secparams::quorum_fc(n);
        ctx.block_capacity = 64;
    }

    static std::uint64_t max_account(const std::vector<std::vector<Principal>>& accts) {
        std::uint64_t hi = 0;
        for (const auto& v : accts)
            for (auto p : v) hi = std::max<std::uint64_t>(hi, p - kAccountBase);
        return hi;
    }

    Address addr(std::uint32_t ps, std::size_t i) const { return account_address_for(accounts[ps][i]); }
    Signer payer(std::uint32_t ps, std::size_t i) const { return keys.issue(accounts[ps][i]); }

    Transaction tx(std::uint32_t from_ps, std::size_t from_i, std::uint32_t to_ps, std::size_t to_i,
                   std::uint64_t amount, std::uint64_t serial) const {
        return Transaction::make(payer(from_ps, from_i), addr(from_ps, from_i), addr(to_ps, to_i), amount, 0, serial);
    }

    ShardState genesis(std::uint32_t ps, std::uint64_t balance) const {
        ShardState s;
        s.ps = PsId(ps);
        s.tip = ps_genesis(PsId(ps));
        for (std::size_t i = 0; i < accounts[ps].size(); ++i) s.balances[addr(ps, i)] = balance;
        return s;
    }

    ProposerBlock block(std::uint32_t ps, const ShardState& base, std::vector<Transaction> txs,
                        std::vector<std::shared_ptr<const Receipt>> deposits = {}) const {
        ProposerBlock b;
        b.header.ps = PsId(ps);
        b.header.height = base.height + 1;
        b.header.parent = base.tip;
        b.header.leader = assignment.ps_members(PsId(ps)).front();
        b.txs = std::move(txs);
        b.outbox = partition_outbox(b.txs, PsId(ps), ctx.total_ps());
        b.deposits = std::move(deposits);
        b.header.tx_root = b.compute_tx_root();
        b.header.leader_sig = keys.issue(b.header.leader.value).sign(b.header.hash());
        return b;
    }

    /// Adds PS votes from the first `count` members.
    void ps_votes(ProposerHeader& h, std::size_t count) const {
        const auto& members = assignment.ps_members(h.ps);
        h.votes = AggregateVotes{};
        h.votes.digest = h.hash();
        for (std::size_t i = 0; i < count && i < members.size(); ++i)
            h.votes.add(static_cast<std::uint32_t>(i), keys.issue(members[i].value).sign(h.votes.digest).tag);
    }

    FinalizerBlock finalize(const ProposerHeader& h, std::size_t fc_votes, std::uint64_t height = 1) const {
        FinalizerBlock f;
        f.fc = assignment.fc_of_ps(h.ps);
        f.height = height;
        f.parent = fc_genesis(f.fc);
        f.segments.push_back(Segment{h.ps, {h.hash()}});
        f.votes.digest = f.hash();
        const auto& members = assignment.fc_members(f.fc);
        for (std::size_t i = 0; i < fc_votes && i < members.size(); ++i)
            f.votes.add(static_cast<std::uint32_t>(i), keys.issue(members[i].value).sign(f.votes.digest).tag);
        return f;
    }
};

/// Compares `actual` against tests/golden/<name>; set DUALCHAIN_UPDATE_GOLDEN
/// to rewrite the file.
inline void expect_golden(const std::string& name, const std::string& actual) {
    const std::string path = std::string(DUALCHAIN_GOLDEN_DIR) + "/" + name;
    if (std::getenv("DUALCHAIN_UPDATE_GOLDEN") != nullptr) {
        std::ofstream(path) << actual;
        return;
    }
    std::ifstream in(path);
    ASSERT_TRUE(in.good()) << "missing golden file " << path;
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), actual) << "golden mismatch: " << name;
}

}  // namespace dualchain::testing
