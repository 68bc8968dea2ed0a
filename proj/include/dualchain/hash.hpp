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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dualchain/types.hpp"

namespace dualchain {

/// SHA-256 of a byte string.
Hash256 sha256(std::span<const std::uint8_t> data);
Hash256 sha256(std::string_view data);

/// Incremental SHA-256.
class Sha256Stream {
  public:
    Sha256Stream();
    ~Sha256Stream();
    Sha256Stream(Sha256Stream&&) noexcept;
    Sha256Stream& operator=(Sha256Stream&&) noexcept;
    Sha256Stream(const Sha256Stream&) = delete;
    Sha256Stream& operator=(const Sha256Stream&) = delete;

    void update(std::span<const std::uint8_t> data);
    void update(std::string_view data);
    Hash256 finish();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Canonical serializer: fixed-width integers big-endian, variable fields
/// length-prefixed with a u32, fields appended in declaration order.
class Encoder {
  public:
    Encoder& u8(std::uint8_t v);
    Encoder& u32(std::uint32_t v);
    Encoder& u64(std::uint64_t v);
    Encoder& i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }
    Encoder& hash(const Hash256& h);
    Encoder& bytes(std::span<const std::uint8_t> b);
    Encoder& str(std::string_view s);

    const std::vector<std::uint8_t>& data() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }
    Hash256 digest() const { return sha256(buf_); }

  private:
    std::vector<std::uint8_t> buf_;
};

std::string to_hex(std::span<const std::uint8_t> data);

}  // namespace dualchain
