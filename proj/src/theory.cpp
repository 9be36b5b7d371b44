// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: fast beam training and alignment for IRS-assisted mmWave/THz links
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "irsbeam/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace irsbeam::theory {

namespace {

long double log_binomial(long double n, long double k)
{
    return std::lgammal(n + 1.0L) - std::lgammal(k + 1.0L) - std::lgammal(n - k + 1.0L);
}

/// Neumaier-compensated sum, largest magnitudes first.
long double compensated_sum(std::vector<long double> terms)
{
    std::sort(terms.begin(), terms.end(),
              [](long double a, long double b) { return std::fabs(a) > std::fabs(b); });
    long double sum = 0.0L;
    long double comp = 0.0L;
    for (long double t : terms) {
        const long double s = sum + t;
        if (std::fabs(sum) >= std::fabs(t))
            comp += (sum - s) + t;
        else
            comp += (t - s) + sum;
        sum = s;
    }
    return sum + comp;
}

double clamp01(double x)
{
    return std::clamp(x, 0.0, 1.0);
}

} // namespace

void PlanProbe::validate() const
{
    if (q < 1 || r < 1 || q >= m || r >= n_t)
        throw InvalidParameter("need 1 <= Q < M and 1 <= R < N_t");
    if (m % q != 0 || n_t % r != 0)
        throw InvalidParameter("Q must divide M and R must divide N_t");
    if (l < 0)
        throw InvalidParameter("round count must be >= 0");
    if (k < 1)
        throw InvalidParameter("nonzero count K must be >= 1");
}

double p_single(int x, int y, int z)
{
    if (x < 1 || z < 2 || x > z || y < 0)
        throw InvalidParameter("p_single needs 1 <= x <= z, z >= 2, y >= 0");
    return 1.0 - (z - 1.0) * std::pow((x - 1.0) / (z - 1.0), y);
}

double p_lower_los(const PlanProbe& probe)
{
    probe.validate();
    const double a = clamp01(p_single(probe.q, probe.l, probe.m));
    const double b = clamp01(p_single(probe.r, probe.l, probe.n_t));
    return clamp01(a * b);
}

double g_exact(int x, int y, int z)
{
    if (x < 1 || z < 1 || x > z || y < 0)
        throw InvalidParameter("g_exact needs 1 <= x <= z and y >= 0");
    const int n = z - 1;  // elements other than the planted one
    const int s = x - 1;  // subset size drawn per round
    if (y == 0)
        return n == 0 ? 1.0 : 0.0;
    if (s == 0)
        return 1.0;

    // Inclusion-exclusion over the j-element subsets J that survive all y
    // rounds: sum_j (-1)^(j-1) C(n, j) (C(n-j, s-j) / C(n, s))^y.
    std::vector<long double> terms;
    const long double log_all = log_binomial(n, s);
    for (int j = 1; j <= s; ++j) {
        const long double log_term =
            log_binomial(n, j) + y * (log_binomial(n - j, s - j) - log_all);
        const long double term = std::exp(log_term);
        terms.push_back((j % 2 == 1) ? term : -term);
    }
    return clamp01(static_cast<double>(1.0L - compensated_sum(std::move(terms))));
}

double p_nm_round(const PlanProbe& probe)
{
    probe.validate();
    const long long uv = static_cast<long long>(probe.u()) * probe.v();
    if (probe.k > uv)
        return 0.0;
    // (RQ)^K C(UV, K) / C(M N_t, K) telescopes into K factors RQ (UV - k) / (M N_t - k),
    // each at most one.
    const double rq = static_cast<double>(probe.r) * probe.q;
    const double total = static_cast<double>(probe.m) * probe.n_t;
    double p = 1.0;
    for (int k = 0; k < probe.k; ++k)
        p *= rq * (static_cast<double>(uv) - k) / (total - k);
    return p;
}

double p_lower_nlos(const PlanProbe& probe)
{
    probe.validate();
    const double p = p_nm_round(probe);
    const int big_l = probe.l;
    long double sum = 0.0L;
    for (int l = 0; l <= big_l; ++l) {
        const long double weight =
            std::exp(log_binomial(big_l, l)) * std::pow(static_cast<long double>(p), l) *
            std::pow(static_cast<long double>(1.0 - p), big_l - l);
        sum += static_cast<long double>(g_exact(probe.q, l, probe.m)) *
               g_exact(probe.r, l, probe.n_t) * weight;
    }
    return clamp01(static_cast<double>(sum));
}

double rounds_closed_form(int x, int z, double target)
{
    if (!(target > 0.0 && target < 1.0))
        throw InvalidParameter("target probability must lie in (0, 1)");
    if (x < 2 || x >= z)
        throw InvalidParameter("closed form needs 1 < x < z");
    const double c = -std::log(1.0 - target);
    return (std::log(z - 1.0) + c) / std::log((z - 1.0) / (x - 1.0));
}

int min_rounds(int x, int z, double target)
{
    if (!(target > 0.0 && target < 1.0))
        throw InvalidParameter("target probability must lie in (0, 1)");
    if (x < 1 || x >= z)
        throw InvalidParameter("min_rounds needs 1 <= x < z");
    if (x == 1)
        return 1;
    int l = std::max(1, static_cast<int>(std::ceil(rounds_closed_form(x, z, target))));
    while (l > 1 && p_single(x, l - 1, z) >= target)
        --l;
    while (p_single(x, l, z) < target)
        ++l;
    return l;
}

SampleComplexity sample_complexity(const PlanProbe& probe, double p0, BudgetSplit split)
{
    probe.validate();
    if (!(p0 > 0.0 && p0 < 1.0))
        throw InvalidParameter("target probability must lie in (0, 1)");
    SampleComplexity sc;
    const double half = std::sqrt(p0);
    sc.l1 = min_rounds(probe.q, probe.m, half);
    sc.l2 = min_rounds(probe.r, probe.n_t, half);
    if (split == BudgetSplit::Equal) {
        sc.l = std::max(sc.l1, sc.l2);
    } else {
        PlanProbe p = probe;
        p.l = 1;
        while (p_lower_los(p) < p0)
            ++p.l;
        sc.l = p.l;
    }
    sc.t = static_cast<long long>(probe.u()) * probe.v() * sc.l;
    return sc;
}

} // namespace irsbeam::theory
