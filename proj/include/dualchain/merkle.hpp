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
#include <vector>

#include "dualchain/types.hpp"

namespace dualchain {

using Leaf = std::vector<std::uint8_t>;

/// Sibling path from leaf to root. leaf_count pins where the
/// duplicate-last padding happened.
struct MerkleProof {
    std::uint32_t leaf_count = 0;
    std::vector<Hash256> siblings;

    bool operator==(const MerkleProof&) const = default;
};

class IndexOutOfRange : public Error {
  public:
    using Error::Error;
};

/// Binary tree over hash(leaf); odd levels duplicate their last node. An
/// empty list maps to the all-zero root.
Hash256 merkle_root(std::span<const Leaf> leaves);
Hash256 merkle_root_of_hashes(std::vector<Hash256> level);
MerkleProof merkle_prove(std::span<const Leaf> leaves, std::size_t index);
bool merkle_verify(const Hash256& root, std::span<const std::uint8_t> leaf, std::size_t index,
                   const MerkleProof& proof);

/// hash(left ‖ right) over the raw 64 bytes.
Hash256 merkle_parent(const Hash256& left, const Hash256& right);

}  // namespace dualchain
