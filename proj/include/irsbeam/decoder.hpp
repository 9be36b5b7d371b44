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

#include "irsbeam/codebook.hpp"

#include <utility>
#include <vector>

namespace irsbeam {

/// The candidate threshold rejected every grid index.
class ThresholdTooHigh : public Error {
public:
    ThresholdTooHigh(double threshold, double max_probability);

    double threshold() const { return threshold_; }
    double max_probability() const { return max_probability_; }

private:
    double threshold_;
    double max_probability_;
};

/// Phaseless measurements of a scan plan: y[l](u, v) = |c_u^H Lambda a_v + n|.
struct MeasurementSet {
    std::vector<RMatrix> y;  ///< L matrices, U x V, entries >= 0

    int l() const { return static_cast<int>(y.size()); }
};

struct AlignmentEstimate {
    GridIndex index;              ///< zero-based (i*, j*)
    int candidate_count = 0;      ///< size of the candidate set the argmax ran over
    std::vector<int> nm_rounds;   ///< rounds that entered the decision (NLOS decoder)
    double detector_threshold = 0.0;
};

struct BinIndex {
    int u = 0;
    int v = 0;

    friend bool operator==(const BinIndex&, const BinIndex&) = default;
};

// ---- measurement synthesis -------------------------------------------------

/// Measures every (u, v) beam pair of every round through the physical beams:
/// |v_u^H H f_v + n|, n ~ CN(0, sigma^2). Noise is drawn round by round in
/// row-major (u, v) order.
MeasurementSet synthesize_measurements(const ScanPlan& plan, const CascadeChannel& ch,
                                       double sigma, Rng& rng);

/// Ideal-sparse shortcut working directly on a beamspace matrix:
/// |beta * gamma * sum over the bin of lambda + n|.
MeasurementSet synthesize_from_beamspace(const ScanPlan& plan, const CMatrix& lambda,
                                         double sigma, Rng& rng);

// ---- decoding ---------------------------------------------------------------

/// The unique bin of round l that senses beamspace entry (i, j).
BinIndex bin_of(const ScanPlan& plan, int l, int i, int j);

/// Beamspace rows (columns) sensed by passive beam u (precoder v) of round l.
Support row_members(const ScanPlan& plan, int l, int u);
Support col_members(const ScanPlan& plan, int l, int v);

/// Location of the largest measurement of every round (ties: lowest u, v).
std::vector<BinIndex> argmax_bins(const MeasurementSet& ms);

struct Intersection {
    Support rows;
    Support cols;
    /// Set when either intersection is empty; callers fall back to the
    /// probability decoder.
    bool ambiguous = false;
};

/// Noiseless set-intersection decoder: intersect the supports of the winning
/// bins across rounds.
Intersection intersect_los(const ScanPlan& plan, const std::vector<BinIndex>& bins);

/// P(i, j) = y_l(bin_of(l, i, j))^2, the bin-lookup form of the
/// indicator/measurement inner product.
RMatrix probability_matrix(const RMatrix& y_l, const ScanPlan& plan, int l);

/// Energy-detector threshold for a target false-alarm rate under Rayleigh
/// noise: sigma * sqrt(ln(1 / p_fa)).
double detector_threshold(double sigma, double p_fa);

/// Probability-product decoder over all rounds. Candidates are indices whose
/// bin magnitude reaches `epsilon` in at least one round; the winner maximises
/// the product of P^(l) over rounds.
AlignmentEstimate decode_los(const MeasurementSet& ms, const ScanPlan& plan, double epsilon);

/// Number of entries below `epsilon` (accepted as nulltons).
int classify_nulltons(const RMatrix& y_l, double epsilon);
std::vector<int> classify_nulltons(const MeasurementSet& ms, double epsilon);

/// All rounds whose nullton count equals the minimum.
std::vector<int> select_nm_rounds(const std::vector<int>& counts);

/// NLOS decoder: restrict the probability product to the rounds with the
/// fewest nulltons.
AlignmentEstimate decode_nlos(const MeasurementSet& ms, const ScanPlan& plan, double epsilon);

/// Probability-product decision over an explicit subset of rounds.
AlignmentEstimate decode_rounds(const MeasurementSet& ms, const ScanPlan& plan,
                                const std::vector<int>& rounds, double epsilon);

} // namespace irsbeam
