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

#include "dualchain/merkle.hpp"

#include <array>

#include "dualchain/hash.hpp"

namespace dualchain {

Hash256 merkle_parent(const Hash256& left, const Hash256& right) {
    std::array<std::uint8_t, 64> buf{};
    std::copy(left.bytes.begin(), left.bytes.end(), buf.begin());
    std::copy(right.bytes.begin(), right.bytes.end(), buf.begin() + 32);
    return sha256(buf);
}

Hash256 merkle_root_of_hashes(std::vector<Hash256> level) {
    if (level.empty()) return Hash256{};
    while (level.size() > 1) {
        if (level.size() % 2 == 1) level.push_back(level.back());
        std::vector<Hash256> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) next.push_back(merkle_parent(level[i], level[i + 1]));
        level = std::move(next);
    }
    return level.front();
}

Hash256 merkle_root(std::span<const Leaf> leaves) {
    std::vector<Hash256> level;
    level.reserve(leaves.size());
    for (const auto& l : leaves) level.push_back(sha256(l));
    return merkle_root_of_hashes(std::move(level));
}

MerkleProof merkle_prove(std::span<const Leaf> leaves, std::size_t index) {
    if (index >= leaves.size()) throw IndexOutOfRange("merkle_prove: index out of range");
    MerkleProof proof;
    proof.leaf_count = static_cast<std::uint32_t>(leaves.size());
    std::vector<Hash256> level;
    for (const auto& l : leaves) level.push_back(sha256(l));
    std::size_t pos = index;
    while (level.size() > 1) {
        if (level.size() % 2 == 1) level.push_back(level.back());
        proof.siblings.push_back(level[pos ^ 1]);
        std::vector<Hash256> next;
        for (std::size_t i = 0; i < level.size(); i += 2) next.push_back(merkle_parent(level[i], level[i + 1]));
        level = std::move(next);
        pos /= 2;
    }
    return proof;
}

bool merkle_verify(const Hash256& root, std::span<const std::uint8_t> leaf, std::size_t index,
                   const MerkleProof& proof) {
    if (index >= proof.leaf_count) return false;
    Hash256 cur = sha256(leaf);
    std::size_t pos = index;
    std::size_t width = proof.leaf_count;
    std::size_t used = 0;
    while (width > 1) {
        if (used >= proof.siblings.size()) return false;
        const Hash256& sib = proof.siblings[used++];
        // The padded last node of an odd level is its own sibling.
        if (pos == width - 1 && width % 2 == 1 && sib != cur) return false;
        cur = (pos % 2 == 0) ? merkle_parent(cur, sib) : merkle_parent(sib, cur);
        pos /= 2;
        width = (width + 1) / 2;
    }
    return used == proof.siblings.size() && cur == root;
}

}  // namespace dualchain
