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

#include "dualchain/ledger.hpp"

#include <algorithm>

namespace dualchain {

namespace {

void encode_votes(Encoder& e, const AggregateVotes& v) {
    e.hash(v.digest).u32(static_cast<std::uint32_t>(v.entries.size()));
    for (const auto& [pos, tag] : v.entries) e.u32(pos).hash(tag);
}

void encode_sig(Encoder& e, const Signature& s) { e.u64(s.signer).hash(s.digest).hash(s.tag); }

void encode_header_body(Encoder& e, const ProposerHeader& h) {
    e.str("ps-header")
        .u32(h.ps.value)
        .u64(h.view)
        .u64(h.height)
        .hash(h.parent)
        .hash(h.latest_fc_block)
        .hash(h.latest_finalized)
        .hash(h.tx_root)
        .u32(h.leader.value);
}

void encode_fin_body(Encoder& e, const FinalizerBlock& f) {
    e.str("fc-block").u32(f.fc.value).u64(f.height).hash(f.parent);
    e.u32(static_cast<std::uint32_t>(f.segments.size()));
    for (const auto& s : f.segments) {
        e.u32(s.ps.value).u32(static_cast<std::uint32_t>(s.headers.size()));
        for (const auto& h : s.headers) e.hash(h);
    }
    e.u32(static_cast<std::uint32_t>(f.view_changes.size()));
    for (const auto& vc : f.view_changes) {
        e.u32(vc.ps.value).u64(vc.new_view).u32(vc.new_leader.value);
        e.u32(static_cast<std::uint32_t>(vc.complaint_digests.size()));
        for (const auto& d : vc.complaint_digests) e.hash(d);
    }
}

}  // namespace

std::uint32_t home_shard(const Address& addr, std::uint32_t total_ps) {
    return static_cast<std::uint32_t>(sha256(addr.value).prefix64() % total_ps);
}

Hash256 Transaction::body_digest() const {
    Encoder e;
    e.str("tx").str(payer.value).str(payee.value).u64(amount).i64(issue_time).u64(serial);
    return e.digest();
}

void Transaction::encode(Encoder& e) const {
    e.hash(id).str(payer.value).str(payee.value).u64(amount);
    encode_sig(e, payer_sig);
    e.i64(issue_time).u64(serial);
}

Leaf Transaction::serialize() const {
    Encoder e;
    encode(e);
    return e.take();
}

Transaction Transaction::make(const Signer& payer_key, Address payer, Address payee, std::uint64_t amount,
                              SimTime issue_time, std::uint64_t serial) {
    Transaction tx;
    tx.payer = std::move(payer);
    tx.payee = std::move(payee);
    tx.amount = amount;
    tx.issue_time = issue_time;
    tx.serial = serial;
    tx.id = tx.body_digest();
    tx.payer_sig = payer_key.sign(tx.id);
    return tx;
}

Hash256 ProposerHeader::hash() const {
    Encoder e;
    encode_header_body(e, *this);
    return e.digest();
}

Leaf ProposerHeader::serialize() const {
    Encoder e;
    encode_header_body(e, *this);
    encode_sig(e, leader_sig);
    encode_votes(e, votes);
    return e.take();
}

bool OutboxBatch::operator==(const OutboxBatch& o) const {
    if (dest != o.dest || txs.size() != o.txs.size()) return false;
    for (std::size_t i = 0; i < txs.size(); ++i)
        if (txs[i].id != o.txs[i].id) return false;
    return true;
}

Leaf outbox_leaf(PsId source, const OutboxBatch& batch) {
    Encoder e;
    e.str("outbox").u32(source.value).u32(batch.dest.value).u32(static_cast<std::uint32_t>(batch.txs.size()));
    for (const auto& tx : batch.txs) tx.encode(e);
    return e.take();
}

std::vector<Leaf> ProposerBlock::merkle_leaves() const {
    std::vector<Leaf> leaves;
    leaves.reserve(txs.size() + outbox.size() + deposits.size());
    for (const auto& tx : txs) leaves.push_back(tx.serialize());
    for (const auto& b : outbox) leaves.push_back(outbox_leaf(header.ps, b));
    for (const auto& r : deposits) {
        Encoder e;
        e.str("deposit").hash(r->batch_digest());
        leaves.push_back(e.take());
    }
    return leaves;
}

Hash256 ProposerBlock::compute_tx_root() const {
    const auto leaves = merkle_leaves();
    return merkle_root(leaves);
}

std::optional<std::size_t> ProposerBlock::outbox_index(PsId dest) const {
    for (std::size_t i = 0; i < outbox.size(); ++i)
        if (outbox[i].dest == dest) return txs.size() + i;
    return std::nullopt;
}

const OutboxBatch* ProposerBlock::batch_for(PsId dest) const {
    for (const auto& b : outbox)
        if (b.dest == dest) return &b;
    return nullptr;
}

std::size_t ProposerBlock::load() const {
    std::size_t n = txs.size();
    for (const auto& r : deposits) n += r->batch.size();
    return n;
}

Hash256 FinalizerBlock::hash() const {
    Encoder e;
    encode_fin_body(e, *this);
    return e.digest();
}

Leaf FinalizerBlock::serialize() const {
    Encoder e;
    encode_fin_body(e, *this);
    e.u64(view).u32(proposer.value);
    encode_votes(e, votes);
    return e.take();
}

bool FinalizerBlock::finalizes(PsId ps, const Hash256& header) const {
    for (const auto& s : segments)
        if (s.ps == ps && std::find(s.headers.begin(), s.headers.end(), header) != s.headers.end()) return true;
    return false;
}

bool FinalizerBlock::empty() const {
    for (const auto& s : segments)
        if (!s.headers.empty()) return false;
    return view_changes.empty();
}

Hash256 Receipt::batch_digest() const {
    Encoder e;
    e.str("receipt").hash(proposer_header.hash()).u32(dest_ps.value);
    return e.digest();
}

Leaf Receipt::serialize() const {
    Encoder e;
    e.str("receipt").u32(source_ps.value).u32(dest_ps.value).u32(static_cast<std::uint32_t>(batch.size()));
    for (const auto& tx : batch) tx.encode(e);
    e.u32(leaf_index).u32(merkle_proof.leaf_count).u32(static_cast<std::uint32_t>(merkle_proof.siblings.size()));
    for (const auto& s : merkle_proof.siblings) e.hash(s);
    e.bytes(proposer_header.serialize());
    e.bytes(finalizer_header.serialize());
    return e.take();
}

Hash256 ps_genesis(PsId ps) {
    Encoder e;
    e.str("ps-genesis").u32(ps.value);
    return e.digest();
}

Hash256 fc_genesis(FcId fc) {
    Encoder e;
    e.str("fc-genesis").u32(fc.value);
    return e.digest();
}

std::uint64_t ShardState::total() const {
    std::uint64_t t = 0;
    for (const auto& [a, b] : balances) t += b;
    return t;
}

std::optional<std::uint64_t> BlockDelta::balance(const Address& a) const {
    for (const auto& [addr, bal] : balances)
        if (addr == a) return bal;
    return std::nullopt;
}

std::uint64_t StateView::balance(const Address& a) const {
    for (const auto* d : overlays_)
        if (auto b = d->balance(a)) return *b;
    auto it = base_->balances.find(a);
    return it == base_->balances.end() ? 0 : it->second;
}

bool StateView::has_tx(const Hash256& id) const {
    for (const auto* d : overlays_)
        if (std::find(d->txs.begin(), d->txs.end(), id) != d->txs.end()) return true;
    return base_->included_txs.count(id) > 0;
}

bool StateView::has_receipt(const Hash256& digest) const {
    for (const auto* d : overlays_)
        if (std::find(d->receipts.begin(), d->receipts.end(), digest) != d->receipts.end()) return true;
    return base_->applied_receipts.count(digest) > 0;
}

const char* to_string(TxVerdict v) {
    switch (v) {
        case TxVerdict::Ok: return "Ok";
        case TxVerdict::BadSignature: return "BadSignature";
        case TxVerdict::WrongShard: return "WrongShard";
        case TxVerdict::InsufficientBalance: return "InsufficientBalance";
        case TxVerdict::Duplicate: return "Duplicate";
    }
    return "?";
}

bool tx_signature_ok(const Transaction& tx, const LedgerContext& ctx) {
    if (tx.id != tx.body_digest()) return false;
    if (tx.payer_sig.signer < kAccountBase) return false;
    if (account_address_for(tx.payer_sig.signer) != tx.payer) return false;
    return ctx.keys->verify(tx.payer_sig, tx.id, tx.payer_sig.signer);
}

namespace {

TxVerdict check_tx(const Transaction& tx, const LedgerContext& ctx, PsId ps, std::uint64_t balance, bool seen) {
    if (!tx_signature_ok(tx, ctx)) return TxVerdict::BadSignature;
    if (home_shard(tx.payer, ctx.total_ps()) != ps.value) return TxVerdict::WrongShard;
    if (seen) return TxVerdict::Duplicate;
    if (tx.amount == 0 || balance < tx.amount) return TxVerdict::InsufficientBalance;
    return TxVerdict::Ok;
}

}  // namespace

TxVerdict validate_tx(const StateView& view, const Transaction& tx, const LedgerContext& ctx) {
    return check_tx(tx, ctx, view.ps(), view.balance(tx.payer), view.has_tx(tx.id));
}

bool verify_receipt(const Receipt& r, const LedgerContext& ctx) {
    const auto& a = *ctx.assignment;
    if (r.source_ps.value >= a.ps_count() || r.dest_ps.value >= a.ps_count()) return false;
    const auto& fin = r.finalizer_header;
    if (fin.fc != a.fc_of_ps(r.source_ps)) return false;
    const Hash256 fin_hash = fin.hash();
    if (fin.votes.digest != fin_hash) return false;
    if (count_valid(fin.votes, a.fc_members(fin.fc), *ctx.keys) < ctx.quorum_fc) return false;
    const auto& hdr = r.proposer_header;
    if (hdr.ps != r.source_ps) return false;
    const Hash256 hdr_hash = hdr.hash();
    if (!fin.finalizes(r.source_ps, hdr_hash)) return false;
    if (hdr.votes.digest != hdr_hash) return false;
    if (count_valid(hdr.votes, a.ps_members(hdr.ps), *ctx.keys) < ctx.quorum_ps) return false;
    for (const auto& tx : r.batch) {
        if (home_shard(tx.payee, ctx.total_ps()) != r.dest_ps.value) return false;
        if (home_shard(tx.payer, ctx.total_ps()) != r.source_ps.value) return false;
    }
    const Leaf leaf = outbox_leaf(r.source_ps, OutboxBatch{r.dest_ps, r.batch});
    return merkle_verify(hdr.tx_root, leaf, r.leaf_index, r.merkle_proof);
}

std::vector<OutboxBatch> partition_outbox(std::span<const Transaction> txs, PsId source, std::uint32_t total_ps) {
    std::map<std::uint32_t, std::vector<Transaction>> by_dest;
    for (const auto& tx : txs) {
        const auto dest = home_shard(tx.payee, total_ps);
        if (dest != source.value) by_dest[dest].push_back(tx);
    }
    std::vector<OutboxBatch> out;
    for (auto& [dest, list] : by_dest) out.push_back(OutboxBatch{PsId(dest), std::move(list)});
    return out;
}

BlockDelta apply_block(const StateView& view, const ProposerBlock& block, const LedgerContext& ctx) {
    const PsId ps = view.ps();
    if (block.header.ps != ps) throw InvalidBlock("block for another shard");
    if (block.load() > ctx.block_capacity) throw InvalidBlock("block exceeds capacity");
    if (block.header.tx_root != block.compute_tx_root()) throw InvalidBlock("tx root mismatch");

    std::map<Address, std::uint64_t> touched;
    auto balance = [&](const Address& a) {
        auto it = touched.find(a);
        return it != touched.end() ? it->second : view.balance(a);
    };
    BlockDelta delta;
    const std::uint32_t total = ctx.total_ps();
    for (const auto& tx : block.txs) {
        const bool seen = view.has_tx(tx.id) || std::find(delta.txs.begin(), delta.txs.end(), tx.id) != delta.txs.end();
        const TxVerdict v = check_tx(tx, ctx, ps, balance(tx.payer), seen);
        if (v != TxVerdict::Ok) throw InvalidBlock(std::string("invalid transaction: ") + to_string(v));
        touched[tx.payer] = balance(tx.payer) - tx.amount;
        if (home_shard(tx.payee, total) == ps.value) touched[tx.payee] = balance(tx.payee) + tx.amount;
        delta.txs.push_back(tx.id);
    }
    if (partition_outbox(block.txs, ps, total) != block.outbox) throw InvalidBlock("outbox does not match transactions");

    for (const auto& r : block.deposits) {
        if (r->dest_ps != ps) throw InvalidBlock("receipt for another shard");
        const Hash256 d = r->batch_digest();
        if (view.has_receipt(d) || std::find(delta.receipts.begin(), delta.receipts.end(), d) != delta.receipts.end())
            throw InvalidBlock("receipt already applied");
        if (!verify_receipt(*r, ctx)) throw InvalidBlock("receipt does not verify");
        for (const auto& tx : r->batch) touched[tx.payee] = balance(tx.payee) + tx.amount;
        delta.receipts.push_back(d);
    }
    delta.balances.assign(touched.begin(), touched.end());
    return delta;
}

void commit(ShardState& state, const BlockDelta& delta, const ProposerHeader& header) {
    for (const auto& [a, b] : delta.balances) state.balances[a] = b;
    state.included_txs.insert(delta.txs.begin(), delta.txs.end());
    state.applied_receipts.insert(delta.receipts.begin(), delta.receipts.end());
    state.tip = header.hash();
    state.height = header.height;
}

ShardState apply_block(const ShardState& state, const ProposerBlock& block, const LedgerContext& ctx) {
    const BlockDelta d = apply_block(StateView(state), block, ctx);
    ShardState next = state;
    commit(next, d, block.header);
    return next;
}

Receipt build_receipt(const ProposerBlock& block, const FinalizerBlock& fin, PsId dest) {
    if (!fin.finalizes(block.header.ps, block.header.hash())) throw NotFinalized("finalizer block does not finalize this header");
    const auto idx = block.outbox_index(dest);
    if (!idx) throw NoSuchBatch("block has no batch for the requested shard");
    const auto leaves = block.merkle_leaves();
    Receipt r;
    r.source_ps = block.header.ps;
    r.dest_ps = dest;
    r.batch = block.batch_for(dest)->txs;
    r.leaf_index = static_cast<std::uint32_t>(*idx);
    r.merkle_proof = merkle_prove(leaves, *idx);
    r.proposer_header = block.header;
    r.finalizer_header = fin;
    return r;
}

Address account_address_for(Principal p) {
    Encoder e;
    e.str("account").u64(p);
    return Address{"0x" + e.digest().hex().substr(0, 40)};
}

std::vector<std::vector<Principal>> accounts_per_shard(std::uint32_t total_ps, std::uint32_t per_shard) {
    std::vector<std::vector<Principal>> out(total_ps);
    if (per_shard == 0) return out;
    std::uint32_t filled = 0;
    for (Principal p = kAccountBase; filled < total_ps; ++p) {
        auto& slot = out[home_shard(account_address_for(p), total_ps)];
        if (slot.size() >= per_shard) continue;
        slot.push_back(p);
        if (slot.size() == per_shard) ++filled;
    }
    return out;
}

}  // namespace dualchain
