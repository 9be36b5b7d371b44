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

#include "irsbeam/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace irsbeam {

namespace {

std::string threshold_message(double threshold, double max_probability)
{
    std::ostringstream os;
    os << "candidate threshold " << threshold << " exceeds the largest probability value "
       << max_probability;
    return os.str();
}

void check_round(const ScanPlan& plan, int l)
{
    if (l < 0 || l >= plan.l() || static_cast<int>(plan.beams.size()) != plan.l())
        throw InvalidParameter("round index out of range or plan beams not materialised");
}

void check_measurements(const MeasurementSet& ms, const ScanPlan& plan)
{
    if (ms.l() != plan.l())
        throw InvalidDimension("measurement set and plan have different round counts");
    for (const RMatrix& y : ms.y)
        if (y.rows() != plan.u() || y.cols() != plan.v())
            throw InvalidDimension("measurement matrix must be U x V");
}

} // namespace

ThresholdTooHigh::ThresholdTooHigh(double threshold, double max_probability)
    : Error(threshold_message(threshold, max_probability))
    , threshold_(threshold)
    , max_probability_(max_probability)
{
}

MeasurementSet synthesize_measurements(const ScanPlan& plan, const CascadeChannel& ch,
                                       double sigma, Rng& rng)
{
    if (sigma < 0.0 || !std::isfinite(sigma))
        throw InvalidParameter("noise standard deviation must be finite and >= 0");
    if (ch.h.rows() != plan.array.m() || ch.h.cols() != plan.array.n_t)
        throw InvalidDimension("channel does not match the plan's array");
    MeasurementSet ms;
    for (const RoundBeams& rb : plan.beams) {
        const CMatrix z = rb.passive.adjoint() * (ch.h * rb.precoders);
        RMatrix y(z.rows(), z.cols());
        for (Eigen::Index u = 0; u < z.rows(); ++u)
            for (Eigen::Index v = 0; v < z.cols(); ++v) {
                Complex s = z(u, v);
                if (sigma > 0.0)
                    s += complex_gaussian(rng, sigma * sigma);
                y(u, v) = std::abs(s);
            }
        ms.y.push_back(std::move(y));
    }
    return ms;
}

MeasurementSet synthesize_from_beamspace(const ScanPlan& plan, const CMatrix& lambda,
                                         double sigma, Rng& rng)
{
    if (plan.mode != CodebookMode::IdealSparse)
        throw InvalidParameter("beamspace synthesis requires an ideal-sparse plan");
    if (lambda.rows() != plan.array.m() || lambda.cols() != plan.array.n_t)
        throw InvalidDimension("beamspace matrix does not match the plan's array");
    if (sigma < 0.0 || !std::isfinite(sigma))
        throw InvalidParameter("noise standard deviation must be finite and >= 0");
    MeasurementSet ms;
    for (int l = 0; l < plan.l(); ++l) {
        const RoundBeams& rb = plan.beams[l];
        const RoundEncoding& round = plan.rounds[l];
        CMatrix z = CMatrix::Zero(round.u(), round.v());
        // Only nonzero entries contribute; sparse planted matrices stay cheap.
        for (Eigen::Index i = 0; i < lambda.rows(); ++i)
            for (Eigen::Index j = 0; j < lambda.cols(); ++j)
                if (lambda(i, j) != Complex(0.0, 0.0))
                    z(rb.row_bin[i], rb.col_bin[j]) += lambda(i, j);
        z *= round.beta * round.gamma;
        RMatrix y(z.rows(), z.cols());
        for (Eigen::Index u = 0; u < z.rows(); ++u)
            for (Eigen::Index v = 0; v < z.cols(); ++v) {
                Complex s = z(u, v);
                if (sigma > 0.0)
                    s += complex_gaussian(rng, sigma * sigma);
                y(u, v) = std::abs(s);
            }
        ms.y.push_back(std::move(y));
    }
    return ms;
}

BinIndex bin_of(const ScanPlan& plan, int l, int i, int j)
{
    check_round(plan, l);
    if (i < 0 || i >= plan.array.m() || j < 0 || j >= plan.array.n_t)
        throw InvalidParameter("beamspace index out of range");
    return {plan.beams[l].row_bin[i], plan.beams[l].col_bin[j]};
}

Support row_members(const ScanPlan& plan, int l, int u)
{
    check_round(plan, l);
    Support out;
    const std::vector<int>& bins = plan.beams[l].row_bin;
    for (int i = 0; i < static_cast<int>(bins.size()); ++i)
        if (bins[i] == u)
            out.push_back(i);
    return out;
}

Support col_members(const ScanPlan& plan, int l, int v)
{
    check_round(plan, l);
    Support out;
    const std::vector<int>& bins = plan.beams[l].col_bin;
    for (int j = 0; j < static_cast<int>(bins.size()); ++j)
        if (bins[j] == v)
            out.push_back(j);
    return out;
}

std::vector<BinIndex> argmax_bins(const MeasurementSet& ms)
{
    std::vector<BinIndex> out;
    for (const RMatrix& y : ms.y) {
        const GridIndex g = argmax_value(y);
        out.push_back({g.row, g.col});
    }
    return out;
}

Intersection intersect_los(const ScanPlan& plan, const std::vector<BinIndex>& bins)
{
    if (static_cast<int>(bins.size()) != plan.l() || bins.empty())
        throw InvalidDimension("need exactly one winning bin per round");
    Intersection out;
    out.rows = row_members(plan, 0, bins[0].u);
    out.cols = col_members(plan, 0, bins[0].v);
    for (int l = 1; l < plan.l(); ++l) {
        const Support rows = row_members(plan, l, bins[l].u);
        const Support cols = col_members(plan, l, bins[l].v);
        Support r, c;
        std::set_intersection(out.rows.begin(), out.rows.end(), rows.begin(), rows.end(),
                              std::back_inserter(r));
        std::set_intersection(out.cols.begin(), out.cols.end(), cols.begin(), cols.end(),
                              std::back_inserter(c));
        out.rows = std::move(r);
        out.cols = std::move(c);
    }
    out.ambiguous = out.rows.empty() || out.cols.empty();
    return out;
}

RMatrix probability_matrix(const RMatrix& y_l, const ScanPlan& plan, int l)
{
    check_round(plan, l);
    if (y_l.rows() != plan.u() || y_l.cols() != plan.v())
        throw InvalidDimension("measurement matrix must be U x V");
    const RoundBeams& rb = plan.beams[l];
    const RMatrix power = y_l.cwiseAbs2();
    RMatrix p(plan.array.m(), plan.array.n_t);
    for (Eigen::Index j = 0; j < p.cols(); ++j)
        for (Eigen::Index i = 0; i < p.rows(); ++i)
            p(i, j) = power(rb.row_bin[i], rb.col_bin[j]);
    return p;
}

double detector_threshold(double sigma, double p_fa)
{
    if (!(p_fa > 0.0 && p_fa <= 1.0))
        throw InvalidParameter("false-alarm probability must lie in (0, 1]");
    if (sigma < 0.0)
        throw InvalidParameter("noise standard deviation must be >= 0");
    return sigma * std::sqrt(std::log(1.0 / p_fa));
}

AlignmentEstimate decode_rounds(const MeasurementSet& ms, const ScanPlan& plan,
                                const std::vector<int>& rounds, double epsilon)
{
    check_measurements(ms, plan);
    if (rounds.empty())
        throw InvalidParameter("decoder needs at least one round");
    if (!(epsilon >= 0.0))
        throw InvalidParameter("threshold must be >= 0");

    const int m = plan.array.m();
    const int n_t = plan.array.n_t;
    // Products of squared magnitudes are accumulated as sums of logarithms;
    // a zero measurement maps to -inf and keeps its place in the ordering.
    std::vector<RMatrix> log_power;
    double max_power = 0.0;
    for (int l : rounds) {
        check_round(plan, l);
        const RMatrix& y = ms.y[l];
        log_power.push_back(y.unaryExpr([](double x) { return 2.0 * std::log(x); }));
        max_power = std::max(max_power, y.cwiseAbs2().maxCoeff());
    }

    // Candidate test on magnitudes: P >= epsilon^2  <=>  y >= epsilon.
    std::vector<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> is_candidate;
    for (int l : rounds)
        is_candidate.push_back((ms.y[l].array() >= epsilon).matrix());

    AlignmentEstimate est;
    est.detector_threshold = epsilon;
    est.nm_rounds = rounds;
    bool found = false;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n_t; ++j) {
            bool candidate = false;
            double score = 0.0;
            for (size_t k = 0; k < rounds.size(); ++k) {
                const RoundBeams& rb = plan.beams[rounds[k]];
                const int u = rb.row_bin[i];
                const int v = rb.col_bin[j];
                candidate = candidate || is_candidate[k](u, v);
                score += log_power[k](u, v);
            }
            if (!candidate)
                continue;
            ++est.candidate_count;
            if (!found || score > best) {
                found = true;
                best = score;
                est.index = {i, j};
            }
        }
    }
    if (!found)
        throw ThresholdTooHigh(epsilon * epsilon, max_power);
    return est;
}

AlignmentEstimate decode_los(const MeasurementSet& ms, const ScanPlan& plan, double epsilon)
{
    std::vector<int> all(plan.l());
    for (int l = 0; l < plan.l(); ++l)
        all[l] = l;
    return decode_rounds(ms, plan, all, epsilon);
}

int classify_nulltons(const RMatrix& y_l, double epsilon)
{
    if (!(epsilon >= 0.0))
        throw InvalidParameter("threshold must be >= 0");
    return static_cast<int>((y_l.array() < epsilon).count());
}

std::vector<int> classify_nulltons(const MeasurementSet& ms, double epsilon)
{
    std::vector<int> counts;
    for (const RMatrix& y : ms.y)
        counts.push_back(classify_nulltons(y, epsilon));
    return counts;
}

std::vector<int> select_nm_rounds(const std::vector<int>& counts)
{
    if (counts.empty())
        throw InvalidParameter("no rounds to select from");
    const int least = *std::min_element(counts.begin(), counts.end());
    std::vector<int> out;
    for (int l = 0; l < static_cast<int>(counts.size()); ++l)
        if (counts[l] == least)
            out.push_back(l);
    return out;
}

AlignmentEstimate decode_nlos(const MeasurementSet& ms, const ScanPlan& plan, double epsilon)
{
    check_measurements(ms, plan);
    const std::vector<int> nm = select_nm_rounds(classify_nulltons(ms, epsilon));
    return decode_rounds(ms, plan, nm, epsilon);
}

} // namespace irsbeam
