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

#include "dualchain/fc_consensus.hpp"
#include "dualchain/ps_consensus.hpp"

namespace dualchain {

/// A simulated participant: one PS replica and one FC replica sharing an
/// identity. Finalizations of the FC replica are handed to the PS replica
/// directly, since every member of a PS also belongs to its FC.
class Node {
  public:
    Node(NodeId id, const World& world) : id_(id), ps_(id, world), fc_(id, world) {}

    NodeId id() const { return id_; }
    void start(SimTime now, Effects& fx);
    void on_message(SimTime now, NodeId from, const Message& m, Effects& fx);
    void on_client_tx(SimTime now, const Transaction& tx, Effects& fx) { ps_.on_client_tx(now, tx, fx); }
    void on_timer(SimTime now, const TimerRequest& t, Effects& fx);

    const PsReplica& ps() const { return ps_; }
    const FcReplica& fc() const { return fc_; }

  private:
    void hand_off(SimTime now, Effects& fx);

    NodeId id_;
    PsReplica ps_;
    FcReplica fc_;
};

}  // namespace dualchain
