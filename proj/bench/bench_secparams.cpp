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

#include <benchmark/benchmark.h>

#include "dualchain/secparams.hpp"
#include "dualchain/simnet.hpp"

namespace sp = dualchain::secparams;

namespace {

// The four FC sizes of the sizing table, at their solved PS sizes.
sp::EpochParams row(std::int64_t i) {
    static const std::uint32_t N[] = {640, 1290, 1920, 2550}, n[] = {320, 430, 480, 510}, m[] = {80, 86, 96, 102};
    return sp::EpochParams::make(N[i], 0.25, n[i], m[i]);
}

void BM_PsTailSerial(benchmark::State& state) {
    const auto p = row(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sp::detail::ps_tail_numerator_serial(p));
}
BENCHMARK(BM_PsTailSerial)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_PsTailParallel(benchmark::State& state) {
    const auto p = row(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sp::detail::ps_tail_numerator_parallel(p));
}
BENCHMARK(BM_PsTailParallel)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_SystemBound(benchmark::State& state) {
    const auto p = row(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sp::system_failure_upper(p));
}
BENCHMARK(BM_SystemBound)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_SimulateSmall(benchmark::State& state) {
    dualchain::SimConfig c;
    c.params = sp::EpochParams::make(64, 0.0, 32, 16);
    c.end_time = 20 * dualchain::kTick;
    c.workload.rate = 10;
    c.workload.duration = c.end_time;
    for (auto _ : state) benchmark::DoNotOptimize(dualchain::simulate(c).trace_hash);
}
BENCHMARK(BM_SimulateSmall)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
