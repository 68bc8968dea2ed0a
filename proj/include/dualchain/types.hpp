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

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dualchain {

/// Simulated time in micro-ticks. One tick is the abstract unit that δ is
/// expressed in; all hashed paths use this integer representation.
using SimTime = std::int64_t;
inline constexpr SimTime kTick = 1'000'000;

constexpr SimTime ticks(double t) { return static_cast<SimTime>(t * static_cast<double>(kTick)); }
constexpr double to_ticks(SimTime t) { return static_cast<double>(t) / static_cast<double>(kTick); }

template <class Tag>
struct StrongId {
    std::uint32_t value = 0;

    constexpr StrongId() = default;
    constexpr explicit StrongId(std::uint32_t v) : value(v) {}
    constexpr auto operator<=>(const StrongId&) const = default;
};

/// Node identity; total order by index.
using NodeId = StrongId<struct NodeTag>;
/// Proposer shard id, 0-based internally (printed 1-based).
using PsId = StrongId<struct PsTag>;
/// Finalizer committee id, 0-based internally (printed 1-based).
using FcId = StrongId<struct FcTag>;

/// 256-bit digest.
struct Hash256 {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const Hash256&) const = default;
    bool is_zero() const;
    std::string hex() const;
    /// First 8 bytes, big-endian. Used for bucketing and short ids.
    std::uint64_t prefix64() const;
    static Hash256 from_hex(std::string_view hex);
};

struct Hash256Hasher {
    std::size_t operator()(const Hash256& h) const noexcept { return static_cast<std::size_t>(h.prefix64()); }
};

/// Base class of every error this library raises on contract violation.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace dualchain

template <class Tag>
struct std::hash<dualchain::StrongId<Tag>> {
    std::size_t operator()(const dualchain::StrongId<Tag>& id) const noexcept { return id.value; }
};
