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

#include <functional>
#include <map>
#include <memory>
#include <tuple>
#include <vector>

#include "dualchain/node.hpp"

namespace dualchain::testing {

/// Replicas wired together with a fixed message delay and no simulator
/// oracle, so tests can drop, inspect and inject individual messages.
struct Lockstep {
    std::unique_ptr<World> world;
    std::vector<Node> nodes;
    SimTime delay = kTick / 2;
    SimTime now = 0;
    /// Returns false to drop a message.
    std::function<bool(NodeId from, NodeId to, const Message&)> filter;
    std::vector<std::tuple<SimTime, NodeId, NodeId, Message>> log;  // delivered messages
    std::vector<Observation> observations;

    Lockstep(std::uint32_t N, std::uint32_t n, std::uint32_t m, std::uint64_t seed, ProtocolConfig proto = {},
             const std::function<void(World&)>& setup = {}) {
        world = std::make_unique<World>(secparams::EpochParams::make(N, 0.0, n, m), EpochRandomness{seed, 0}, proto,
                                        4, 1000);
        if (setup) setup(*world);
        for (std::uint32_t i = 0; i < N; ++i) nodes.emplace_back(NodeId(i), *world);
    }

    void start() {
        for (auto& node : nodes) {
            Effects fx;
            node.start(now, fx);
            apply(node.id(), fx);
        }
    }

    void inject(NodeId from, NodeId to, Message m, SimTime at) {
        queue_.emplace(Key{at, seq_++}, Item{from, to, std::move(m), std::nullopt});
    }

    void client_tx(NodeId to, const Transaction& tx) {
        Effects fx;
        nodes.at(to.value).on_client_tx(now, tx, fx);
        apply(to, fx);
    }

    /// Processes events up to and including `until`.
    void run_until(SimTime until) {
        while (!queue_.empty() && queue_.begin()->first.at <= until) {
            auto it = queue_.begin();
            Item item = std::move(it->second);
            now = it->first.at;
            queue_.erase(it);
            Effects fx;
            Node& node = nodes.at(item.to.value);
            if (item.timer) {
                node.on_timer(now, *item.timer, fx);
            } else {
                log.emplace_back(now, item.from, item.to, item.msg);
                node.on_message(now, item.from, item.msg, fx);
            }
            apply(item.to, fx);
        }
        now = until;
    }

    const PsReplica& ps(NodeId n) const { return nodes.at(n.value).ps(); }
    const FcReplica& fc(NodeId n) const { return nodes.at(n.value).fc(); }

    template <class T>
    std::size_t count_delivered() const {
        std::size_t k = 0;
        for (const auto& e : log) k += std::holds_alternative<T>(std::get<3>(e));
        return k;
    }

  private:
    struct Key {
        SimTime at;
        std::uint64_t seq;
        bool operator<(const Key& o) const { return std::tie(at, seq) < std::tie(o.at, o.seq); }
    };
    struct Item {
        NodeId from, to;
        Message msg;
        std::optional<TimerRequest> timer;
    };

    void apply(NodeId owner, Effects& fx) {
        for (auto& s : fx.sends)
            for (auto to : s.to) {
                if (filter && !filter(owner, to, s.msg)) continue;
                queue_.emplace(Key{now + (to == owner ? 0 : delay), seq_++}, Item{owner, to, s.msg, std::nullopt});
            }
        for (auto& t : fx.timers) queue_.emplace(Key{std::max(t.at, now), seq_++}, Item{owner, owner, {}, t});
        for (auto& o : fx.observations) observations.push_back(std::move(o));
    }

    std::map<Key, Item> queue_;
    std::uint64_t seq_ = 0;
};

}  // namespace dualchain::testing
