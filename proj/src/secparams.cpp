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

#include "dualchain/secparams.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dualchain::secparams {

std::uint32_t EpochParams::malicious_count() const {
    // The tiny offset keeps f·N = 28.999999999999996 from flooring to 28.
    return static_cast<std::uint32_t>(std::floor(malicious_fraction * network_size + 1e-9));
}

void EpochParams::validate() const {
    if (network_size == 0 || fc_size == 0 || ps_size == 0) throw Error("EpochParams: all counts must be >= 1");
    if (!(malicious_fraction >= 0.0 && malicious_fraction < 1.0))
        throw Error("EpochParams: malicious fraction must lie in [0,1)");
    if (network_size % fc_size != 0) throw Error("EpochParams: fc size must divide network size");
    if (fc_size % ps_size != 0) throw Error("EpochParams: ps size must divide fc size");
    if (!(target_epsilon > 0.0)) throw Error("EpochParams: epsilon must be positive");
}

EpochParams EpochParams::make(std::uint32_t N, double f, std::uint32_t n, std::uint32_t m, double epsilon) {
    EpochParams p{N, f, n, m, epsilon};
    p.validate();
    return p;
}

NoFeasibleSize::NoFeasibleSize(std::uint32_t best_m, double bound)
    : Error("no proposer-shard size meets the target failure probability (best m=" + std::to_string(best_m) +
            ", bound=" + std::to_string(bound) + ")"),
      best_ps_size(best_m),
      best_bound(bound) {}

mpz_class binomial(std::uint32_t n, std::uint32_t k) {
    mpz_class r;
    if (k > n) return r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

mpq_class hypergeom_pmf_exact(std::uint32_t population, std::uint32_t marked, std::uint32_t draws,
                              std::uint32_t k) {
    if (marked > population || draws > population || k > draws)
        throw DomainError("hypergeom_pmf: precondition violated");
    if (k > marked || draws - k > population - marked) return mpq_class(0);
    mpq_class q(binomial(marked, k) * binomial(population - marked, draws - k), binomial(population, draws));
    q.canonicalize();
    return q;
}

double hypergeom_pmf(std::uint32_t population, std::uint32_t marked, std::uint32_t draws, std::uint32_t k) {
    return hypergeom_pmf_exact(population, marked, draws, k).get_d();
}

mpq_class fc_case1_exact(const EpochParams& p) {
    p.validate();
    const std::uint32_t N = p.network_size, n = p.fc_size, F = p.malicious_count();
    mpz_class num;
    for (std::uint32_t x = n / 3; x <= n; ++x) {
        if (x > F || n - x > N - F) continue;
        num += binomial(F, x) * binomial(N - F, n - x);
    }
    mpq_class q(num, binomial(N, n));
    q.canonicalize();
    return q;
}

double fc_case1_prob(const EpochParams& p) { return fc_case1_exact(p).get_d(); }

namespace detail {

namespace {

// Weight of committee composition x times the count of size-m sub-draws
// holding at least ⌊m/2⌋ of those x malicious members.
mpz_class ps_tail_term(const EpochParams& p, std::uint32_t x) {
    const std::uint32_t N = p.network_size, n = p.fc_size, m = p.ps_size, F = p.malicious_count();
    if (x > F || n - x > N - F) return 0;
    mpz_class inner;
    // Terms with y > x vanish.
    for (std::uint32_t y = m / 2; y <= std::min(m, x); ++y) {
        if (m - y > n - x) continue;
        inner += binomial(x, y) * binomial(n - x, m - y);
    }
    if (inner == 0) return 0;
    return binomial(F, x) * binomial(N - F, n - x) * inner;
}

}  // namespace

mpz_class ps_tail_numerator_serial(const EpochParams& p) {
    mpz_class total;
    const std::uint32_t hi = p.fc_size / 3;
    for (std::uint32_t x = 1; x < hi; ++x) total += ps_tail_term(p, x);
    return total;
}

mpz_class ps_tail_numerator_parallel(const EpochParams& p) {
    const std::int64_t hi = p.fc_size / 3;
    std::vector<mpz_class> terms(static_cast<std::size_t>(std::max<std::int64_t>(hi, 1)));
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t x = 1; x < hi; ++x) terms[static_cast<std::size_t>(x)] = ps_tail_term(p, static_cast<std::uint32_t>(x));
    mpz_class total;
    for (const auto& t : terms) total += t;
    return total;
}

}  // namespace detail

mpq_class ps_fail_given_honest_fc_exact(const EpochParams& p, Kernel kernel) {
    p.validate();
    mpz_class num = kernel == Kernel::Serial ? detail::ps_tail_numerator_serial(p)
                                             : detail::ps_tail_numerator_parallel(p);
    mpq_class q(num, binomial(p.network_size, p.fc_size) * binomial(p.fc_size, p.ps_size));
    q.canonicalize();
    return q;
}

double ps_fail_given_honest_fc(const EpochParams& p, Kernel kernel) {
    return ps_fail_given_honest_fc_exact(p, kernel).get_d();
}

FailureReport fc_failure_upper(const EpochParams& p, Kernel kernel) {
    const mpq_class case1 = fc_case1_exact(p);
    const mpq_class ps = ps_fail_given_honest_fc_exact(p, kernel);
    const mpq_class case2 = ps * p.ps_per_fc();
    mpq_class fc = case1 + case2;
    if (fc > 1) fc = 1;
    mpq_class sys = fc * p.fc_count();
    if (sys > 1) sys = 1;

    FailureReport r;
    r.p_fc_case1 = case1.get_d();
    r.p_ps_given_honest_fc = ps.get_d();
    r.p_fc_case2_upper = std::min(1.0, case2.get_d());
    r.p_fc_upper = fc.get_d();
    r.p_system_upper = sys.get_d();
    return r;
}

double system_failure_upper(const EpochParams& p, Kernel kernel) { return fc_failure_upper(p, kernel).p_system_upper; }

std::vector<std::uint32_t> divisors(std::uint32_t n) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t d = 1; d <= n; ++d)
        if (n % d == 0) out.push_back(d);
    return out;
}

std::uint32_t solve_min_ps_size(std::uint32_t N, double f, std::uint32_t n, double epsilon) {
    if (n == 0 || N % n != 0) throw Error("solve_min_ps_size: n must divide N");
    if (!(epsilon > 0.0)) throw Error("solve_min_ps_size: epsilon must be positive");
    std::uint32_t best_m = n;
    double best = 2.0;
    for (std::uint32_t m : divisors(n)) {
        const double bound = system_failure_upper(EpochParams::make(N, f, n, m, epsilon));
        if (bound <= epsilon) return m;
        if (bound < best) {
            best = bound;
            best_m = m;
        }
    }
    throw NoFeasibleSize(best_m, best);
}

}  // namespace dualchain::secparams
