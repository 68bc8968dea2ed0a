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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "dualchain/hash.hpp"
#include "dualchain/identity.hpp"
#include "dualchain/merkle.hpp"
#include "dualchain/types.hpp"

namespace dualchain {

struct Address {
    std::string value;

    auto operator<=>(const Address&) const = default;
};

/// Home shard of an account: hash(address) mod total PS count.
std::uint32_t home_shard(const Address& addr, std::uint32_t total_ps);

/// Self-certifying address of an account principal; payer signatures are
/// checked against it.
Address account_address_for(Principal p);

/// First `per_shard` account principals homed in each shard, scanning
/// principals upward from kAccountBase.
std::vector<std::vector<Principal>> accounts_per_shard(std::uint32_t total_ps, std::uint32_t per_shard);

struct Transaction {
    Hash256 id;
    Address payer;
    Address payee;
    std::uint64_t amount = 0;
    Signature payer_sig;
    SimTime issue_time = 0;
    /// Run-unique serial; only makes ids distinct, it is not an account nonce.
    std::uint64_t serial = 0;

    Hash256 body_digest() const;
    void encode(Encoder& e) const;
    Leaf serialize() const;

    static Transaction make(const Signer& payer_key, Address payer, Address payee, std::uint64_t amount,
                            SimTime issue_time, std::uint64_t serial);
};

struct ProposerHeader {
    PsId ps;
    std::uint64_t view = 0;
    std::uint64_t height = 0;
    Hash256 parent;
    Hash256 latest_fc_block;
    Hash256 latest_finalized;
    Hash256 tx_root;
    NodeId leader;
    Signature leader_sig;
    AggregateVotes votes;

    /// Identity of the block: every field except leader_sig and votes.
    Hash256 hash() const;
    Leaf serialize() const;
};

/// Cross-shard transfers from one block toward one destination shard.
struct OutboxBatch {
    PsId dest;
    std::vector<Transaction> txs;

    bool operator==(const OutboxBatch& o) const;
};

/// Merkle leaf committing a whole outbox batch.
Leaf outbox_leaf(PsId source, const OutboxBatch& batch);

struct Receipt;

struct ProposerBlock {
    ProposerHeader header;
    std::vector<Transaction> txs;
    std::vector<OutboxBatch> outbox;  // sorted by dest
    std::vector<std::shared_ptr<const Receipt>> deposits;

    /// txs ++ outbox commitments ++ deposit commitments.
    std::vector<Leaf> merkle_leaves() const;
    Hash256 compute_tx_root() const;
    /// Leaf index of the batch for `dest`, if any.
    std::optional<std::size_t> outbox_index(PsId dest) const;
    const OutboxBatch* batch_for(PsId dest) const;
    /// Transactions plus credited deposit transactions.
    std::size_t load() const;
};

struct Segment {
    PsId ps;
    std::vector<Hash256> headers;

    bool operator==(const Segment&) const = default;
};

struct ViewChangeEntry {
    PsId ps;
    std::uint64_t new_view = 0;
    NodeId new_leader;
    std::vector<Hash256> complaint_digests;

    bool operator==(const ViewChangeEntry&) const = default;
};

struct FinalizerBlock {
    FcId fc;
    std::uint64_t height = 0;
    Hash256 parent;
    std::vector<Segment> segments;  // sorted by ps
    std::vector<ViewChangeEntry> view_changes;
    /// FC view and proposer are metadata: a re-proposal in a later view keeps its hash.
    std::uint64_t view = 0;
    NodeId proposer;
    AggregateVotes votes;

    Hash256 hash() const;
    Leaf serialize() const;
    bool finalizes(PsId ps, const Hash256& header) const;
    bool empty() const;
};

struct Receipt {
    PsId source_ps;
    PsId dest_ps;
    std::vector<Transaction> batch;
    std::uint32_t leaf_index = 0;
    MerkleProof merkle_proof;
    ProposerHeader proposer_header;
    FinalizerBlock finalizer_header;

    /// Exactly-once key: (source block, destination).
    Hash256 batch_digest() const;
    Leaf serialize() const;
};

Hash256 ps_genesis(PsId ps);
Hash256 fc_genesis(FcId fc);

/// Read-only facts every node shares: memberships, keys, quorum sizes.
struct LedgerContext {
    const Assignment* assignment = nullptr;
    const KeyRegistry* keys = nullptr;
    std::uint32_t quorum_ps = 1;
    std::uint32_t quorum_fc = 1;
    std::uint32_t block_capacity = 64;

    std::uint32_t total_ps() const { return static_cast<std::uint32_t>(assignment->ps_count()); }
};

/// Finalized balances of one shard plus replay-protection sets.
struct ShardState {
    PsId ps;
    std::map<Address, std::uint64_t> balances;
    std::unordered_set<Hash256, Hash256Hasher> included_txs;
    std::unordered_set<Hash256, Hash256Hasher> applied_receipts;
    Hash256 tip;
    std::uint64_t height = 0;

    std::uint64_t total() const;
};

/// Effect of one block: post-balances of touched accounts and the ids it consumed.
struct BlockDelta {
    std::vector<std::pair<Address, std::uint64_t>> balances;
    std::vector<Hash256> txs;
    std::vector<Hash256> receipts;

    std::optional<std::uint64_t> balance(const Address& a) const;
};

/// Finalized state with a stack of speculative deltas on top (newest first).
class StateView {
  public:
    explicit StateView(const ShardState& base) : base_(&base) {}
    StateView(const ShardState& base, std::vector<const BlockDelta*> overlays)
        : base_(&base), overlays_(std::move(overlays)) {}

    PsId ps() const { return base_->ps; }
    std::uint64_t balance(const Address& a) const;
    bool has_tx(const Hash256& id) const;
    bool has_receipt(const Hash256& digest) const;
    void push_front(const BlockDelta* d) { overlays_.insert(overlays_.begin(), d); }

  private:
    const ShardState* base_;
    std::vector<const BlockDelta*> overlays_;
};

enum class TxVerdict { Ok, BadSignature, WrongShard, InsufficientBalance, Duplicate };
const char* to_string(TxVerdict v);

/// Id binds the body and the payer's self-certifying key signed it.
bool tx_signature_ok(const Transaction& tx, const LedgerContext& ctx);

/// Payer signature, home shard, unused id and sufficient speculative balance.
TxVerdict validate_tx(const StateView& view, const Transaction& tx, const LedgerContext& ctx);

bool verify_receipt(const Receipt& r, const LedgerContext& ctx);

class InvalidBlock : public Error {
  public:
    using Error::Error;
};

/// Debits every payer, credits intra-shard payees, moves cross-shard amounts
/// into the outbox and credits payees of deposited receipts. Throws
/// InvalidBlock on any violation.
BlockDelta apply_block(const StateView& view, const ProposerBlock& block, const LedgerContext& ctx);
/// Value form over a finalized state.
ShardState apply_block(const ShardState& state, const ProposerBlock& block, const LedgerContext& ctx);
void commit(ShardState& state, const BlockDelta& delta, const ProposerHeader& header);

class NotFinalized : public Error {
  public:
    using Error::Error;
};
class NoSuchBatch : public Error {
  public:
    using Error::Error;
};

Receipt build_receipt(const ProposerBlock& block, const FinalizerBlock& fin, PsId dest);

/// Rebuilds the outbox a block must carry for its cross-shard transactions.
std::vector<OutboxBatch> partition_outbox(std::span<const Transaction> txs, PsId source, std::uint32_t total_ps);

}  // namespace dualchain
