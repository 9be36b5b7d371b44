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

#pragma once

#include "irsbeam/common.hpp"

namespace irsbeam::theory {

/// System and plan sizes a success probability is evaluated for.
struct PlanProbe {
    int m = 256;
    int n_t = 128;
    int q = 32;
    int r = 4;
    int l = 4;
    int k = 1;   ///< number of nonzero beamspace entries

    int u() const { return m / q; }
    int v() const { return n_t / r; }
    /// Requires q < m, r < n_t and exact divisibility.
    void validate() const;
};

/// 1 - (z - 1) * ((x - 1) / (z - 1))^y, the union-bound probability that the
/// y-fold intersection of random x-subsets pins down a single element.
double p_single(int x, int y, int z);

/// Lower bound on the noiseless LOS success probability, P(Q,L,M) * P(R,L,N_t),
/// with each factor clamped to [0, 1].
double p_lower_los(const PlanProbe& probe);

/// Exact probability that the intersection of y independent uniform
/// (x-1)-subsets of a (z-1)-set is empty, by inclusion-exclusion. For y = 0
/// the (empty) intersection is the whole set.
double g_exact(int x, int y, int z);

/// Probability that one scanning round has no multiton bin when K nonzero
/// entries sit at uniformly random distinct positions.
double p_nm_round(const PlanProbe& probe);

/// Binomial mixture over the number of no-multiton rounds of exact
/// intersection probabilities.
double p_lower_nlos(const PlanProbe& probe);

/// Closed-form sufficient round count (log(z-1) + c) / log((z-1)/(x-1)).
double rounds_closed_form(int x, int z, double target);

/// Smallest L with p_single(x, L, z) >= target.
int min_rounds(int x, int z, double target);

enum class BudgetSplit {
    Joint,   ///< smallest L whose product bound reaches p0
    Equal,   ///< p1 = p2 = sqrt(p0), L = max(L1, L2)
};

struct SampleComplexity {
    int l1 = 0;
    int l2 = 0;
    int l = 0;
    long long t = 0;
};

/// Training budget T = U * V * L needed to reach success probability p0.
SampleComplexity sample_complexity(const PlanProbe& probe, double p0,
                                   BudgetSplit split = BudgetSplit::Joint);

} // namespace irsbeam::theory
