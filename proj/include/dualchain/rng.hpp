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
#include <initializer_list>

namespace dualchain {

__extension__ using uint128 = unsigned __int128;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Labeled sub-streams of the epoch randomness. Adding a label never shifts
/// the values drawn from an existing one.
enum class Stream : std::uint64_t {
    Assignment = 1,
    Malicious = 2,
    Leader = 3,
    Complainer = 4,
    Network = 5,
    Workload = 6,
    Keys = 7,
    Adversary = 8,
    FcLeader = 9,
};

/// Counter-based generator: value i of a stream is a pure function of
/// (key, i), so streams are reproducible across platforms.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, Stream stream, std::initializer_list<std::uint64_t> keys = {}) {
        std::uint64_t k = mix64(seed ^ mix64(static_cast<std::uint64_t>(stream)));
        for (auto v : keys) k = mix64(k ^ mix64(v + 0x632be59bd9b4e019ULL));
        key_ = k;
    }

    std::uint64_t next() { return mix64(key_ + mix64(counter_++)); }

    /// Uniform integer in [0, bound) via Lemire's multiply-shift with rejection.
    std::uint64_t uniform(std::uint64_t bound) {
        if (bound <= 1) return 0;
        for (;;) {
            const std::uint64_t x = next();
            const uint128 prod = static_cast<uint128>(x) * bound;
            const std::uint64_t low = static_cast<std::uint64_t>(prod);
            const std::uint64_t threshold = (0 - bound) % bound;
            if (low >= threshold) return static_cast<std::uint64_t>(prod >> 64);
        }
    }

    /// Uniform in [lo, hi] inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// True with probability num/den, integer-only.
    bool chance(std::uint64_t num, std::uint64_t den) { return uniform(den) < num; }

    std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace dualchain
