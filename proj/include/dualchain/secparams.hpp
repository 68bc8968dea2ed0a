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
#include <vector>

#include <gmpxx.h>

#include "dualchain/types.hpp"

namespace dualchain::secparams {

/// Default negligible failure probability, 2^-17 rounded the way sizing
/// tables usually print it.
inline constexpr double kDefaultEpsilon = 7.6e-6;

/// Epoch sizing: N nodes split into C finalizer committees of n nodes, each
/// made of K proposer shards of m nodes.
struct EpochParams {
    std::uint32_t network_size = 1;   // N
    double malicious_fraction = 0.0;  // f
    std::uint32_t fc_size = 1;        // n
    std::uint32_t ps_size = 1;        // m
    double target_epsilon = kDefaultEpsilon;

    std::uint32_t fc_count() const { return network_size / fc_size; }
    std::uint32_t ps_per_fc() const { return fc_size / ps_size; }
    std::uint32_t ps_count() const { return fc_count() * ps_per_fc(); }
    /// ⌊f·N⌋, the malicious population used everywhere.
    std::uint32_t malicious_count() const;

    /// Throws Error when the divisibility or range invariants do not hold.
    void validate() const;

    static EpochParams make(std::uint32_t N, double f, std::uint32_t n, std::uint32_t m,
                            double epsilon = kDefaultEpsilon);
};

struct FailureReport {
    double p_fc_case1 = 0.0;
    double p_ps_given_honest_fc = 0.0;
    double p_fc_case2_upper = 0.0;
    double p_fc_upper = 0.0;
    double p_system_upper = 0.0;
};

class DomainError : public Error {
  public:
    using Error::Error;
};

/// No PS size dividing n meets the target; carries the best size found.
class NoFeasibleSize : public Error {
  public:
    NoFeasibleSize(std::uint32_t best_m, double best_bound);
    std::uint32_t best_ps_size;
    double best_bound;
};

/// Which implementation evaluates the PS tail double sum.
enum class Kernel { Serial, Parallel };

mpz_class binomial(std::uint32_t n, std::uint32_t k);

/// Exact hypergeometric probability C(marked,k)·C(pop−marked,draws−k)/C(pop,draws).
mpq_class hypergeom_pmf_exact(std::uint32_t population, std::uint32_t marked, std::uint32_t draws,
                              std::uint32_t k);
double hypergeom_pmf(std::uint32_t population, std::uint32_t marked, std::uint32_t draws, std::uint32_t k);

/// Pr[X ≥ ⌊n/3⌋] for a committee of n drawn from N with ⌊f·N⌋ malicious.
mpq_class fc_case1_exact(const EpochParams& params);
double fc_case1_prob(const EpochParams& params);

/// Pr[Y ≥ ⌊m/2⌋ ∧ 1 ≤ X ≤ ⌊n/3⌋−1]: one PS of size m inside a committee
/// that is itself below the 1/3 threshold. Each committee composition x is
/// weighted by Pr[X = x].
mpq_class ps_fail_given_honest_fc_exact(const EpochParams& params, Kernel kernel = Kernel::Parallel);
double ps_fail_given_honest_fc(const EpochParams& params, Kernel kernel = Kernel::Parallel);

FailureReport fc_failure_upper(const EpochParams& params, Kernel kernel = Kernel::Parallel);
double system_failure_upper(const EpochParams& params, Kernel kernel = Kernel::Parallel);

/// Smallest divisor m of n with system_failure_upper ≤ ε. Throws
/// NoFeasibleSize when no divisor qualifies.
std::uint32_t solve_min_ps_size(std::uint32_t N, double f, std::uint32_t n, double epsilon);

std::vector<std::uint32_t> divisors(std::uint32_t n);

constexpr std::uint32_t quorum_ps(std::uint32_t m) { return m / 2 + 1; }
constexpr std::uint32_t quorum_fc(std::uint32_t n) { return (2 * n) / 3 + 1; }

namespace detail {
/// Σ_{x=lo}^{hi} C(F,x)·C(N−F,n−x) · Σ_{y=⌊m/2⌋}^{m} C(x,y)·C(n−x,m−y), the
/// integer numerator of the PS tail. Both kernels return identical values.
mpz_class ps_tail_numerator_serial(const EpochParams& params);
mpz_class ps_tail_numerator_parallel(const EpochParams& params);
}  // namespace detail

}  // namespace dualchain::secparams
