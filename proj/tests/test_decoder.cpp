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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "irsbeam/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace irsbeam;

namespace {

ArrayConfig array_of(int n_t, int m_y, int m_z, int r)
{
    ArrayConfig c;
    c.n_t = n_t;
    c.m_y = m_y;
    c.m_z = m_z;
    c.r = r;
    return c;
}

ScanPlan hand_plan(const Beamspace& space, int q, std::vector<RoundEncoding> rounds)
{
    ScanPlan plan;
    plan.array = space.array;
    plan.q = q;
    plan.mode = CodebookMode::IdealSparse;
    for (RoundEncoding& r : rounds) {
        r.beta = std::sqrt(double(space.array.m()) / q);
        r.gamma = 1.0 / std::sqrt(double(space.array.r));
    }
    plan.rounds = std::move(rounds);
    materialize_beams(plan, space);
    return plan;
}

// Support-scan oracle for the bin of (i, j).
BinIndex scan_bin(const ScanPlan& plan, int l, int i, int j)
{
    BinIndex b{-1, -1};
    int hits_u = 0, hits_v = 0;
    const RoundEncoding& r = plan.rounds[l];
    for (int u = 0; u < r.u(); ++u)
        if (std::find(r.c_sets[u].begin(), r.c_sets[u].end(), i) != r.c_sets[u].end()) {
            b.u = u;
            ++hits_u;
        }
    for (int v = 0; v < r.v(); ++v)
        if (std::find(r.a_sets[v].begin(), r.a_sets[v].end(), j) != r.a_sets[v].end()) {
            b.v = v;
            ++hits_v;
        }
    REQUIRE(hits_u == 1);
    REQUIRE(hits_v == 1);
    return b;
}

CMatrix planted(const ArrayConfig& cfg, const std::vector<GridIndex>& where,
                const std::vector<Complex>& values)
{
    CMatrix lambda = CMatrix::Zero(cfg.m(), cfg.n_t);
    for (size_t k = 0; k < where.size(); ++k)
        lambda(where[k].row, where[k].col) = values[k];
    return lambda;
}

std::vector<GridIndex> distinct_positions(const ArrayConfig& cfg, int k, Rng& rng)
{
    std::uniform_int_distribution<int> row(0, cfg.m() - 1), col(0, cfg.n_t - 1);
    std::vector<GridIndex> out;
    while (static_cast<int>(out.size()) < k) {
        const GridIndex g{row(rng), col(rng)};
        if (std::find(out.begin(), out.end(), g) == out.end())
            out.push_back(g);
    }
    return out;
}

} // namespace

TEST_CASE("bin_of on a hand-built partition")
{
    const Beamspace space(array_of(2, 2, 2, 1));
    RoundEncoding r;
    r.c_sets = {{0, 1}, {2, 3}};
    r.a_sets = {{0}, {1}};
    const ScanPlan plan = hand_plan(space, 2, {r});
    CHECK(bin_of(plan, 0, 2, 1) == BinIndex{1, 1});
    CHECK(bin_of(plan, 0, 0, 0) == BinIndex{0, 0});
    CHECK(row_members(plan, 0, 1) == Support{2, 3});
    CHECK_THROWS_AS(bin_of(plan, 1, 0, 0), InvalidParameter);
    CHECK_THROWS_AS(bin_of(plan, 0, 4, 0), InvalidParameter);
}

TEST_CASE("bin_of agrees with a support scan")
{
    const Beamspace space(array_of(16, 4, 4, 4));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ScanPlan plan = build_scan_plan(space, 4, 3, CodebookMode::IdealSparse, seed);
        for (int l = 0; l < plan.l(); ++l)
            for (int i = 0; i < 16; ++i)
                for (int j = 0; j < 16; ++j)
                    CHECK(bin_of(plan, l, i, j) == scan_bin(plan, l, i, j));
    }
}

TEST_CASE("physical and beamspace synthesis agree in ideal mode")
{
    const ArrayConfig cfg = array_of(16, 4, 4, 4);
    const Beamspace space(cfg);
    Rng rng(2);
    const ScanPlan plan = build_scan_plan(space, 4, 3, CodebookMode::IdealSparse, rng);
    CMatrix lambda(cfg.m(), cfg.n_t);
    for (Eigen::Index k = 0; k < lambda.size(); ++k)
        lambda(k) = complex_gaussian(rng, 1.0);
    const CascadeChannel ch = CascadeChannel::from_beamspace(lambda, space);
    Rng a(5), b(5);
    const MeasurementSet phys = synthesize_measurements(plan, ch, 0.3, a);
    const MeasurementSet fast = synthesize_from_beamspace(plan, lambda, 0.3, b);
    for (int l = 0; l < plan.l(); ++l)
        CHECK((phys.y[l] - fast.y[l]).cwiseAbs().maxCoeff() < 1e-10);

    // Each sample matches measure() on the same beams.
    Rng c(0), d(0);
    const MeasurementSet clean = synthesize_measurements(plan, ch, 0.0, c);
    const RoundBeams& rb = plan.beams[1];
    for (int u = 0; u < plan.u(); ++u)
        for (int v = 0; v < plan.v(); ++v)
            CHECK(clean.y[1](u, v) ==
                  doctest::Approx(measure(ch, rb.passive.col(u), rb.precoders.col(v), 0.0, d)));
}

TEST_CASE("intersect_los")
{
    const ArrayConfig cfg = array_of(8, 4, 4, 2);
    const Beamspace space(cfg);
    RoundEncoding r0, r1;
    r0.c_sets = {{0, 1, 2, 3}, {4, 5, 6, 7}, {8, 9, 10, 11}, {12, 13, 14, 15}};
    r1.c_sets = {{0, 4, 8, 12}, {1, 5, 9, 13}, {2, 6, 10, 14}, {3, 7, 11, 15}};
    r0.a_sets = {{0, 1}, {2, 3}, {4, 5}, {6, 7}};
    r1.a_sets = {{0, 7}, {1, 2}, {3, 4}, {5, 6}};
    const ScanPlan plan = hand_plan(space, 4, {r0, r1});

    const CMatrix lambda = planted(cfg, {{7, 3}}, {Complex(0.0, 1.0)});
    Rng rng(1);
    const MeasurementSet ms = synthesize_from_beamspace(plan, lambda, 0.0, rng);
    const Intersection got = intersect_los(plan, argmax_bins(ms));
    CHECK(got.rows == Support{7});
    CHECK(got.cols == Support{3});
    CHECK_FALSE(got.ambiguous);

    const ScanPlan first = hand_plan(space, 4, {r0});
    const Intersection one = intersect_los(first, {bin_of(first, 0, 7, 3)});
    CHECK(one.rows == Support{4, 5, 6, 7});
    CHECK(one.cols == Support{2, 3});

    const Intersection none = intersect_los(plan, {{0, 0}, {0, 2}});
    CHECK(none.ambiguous);
}

TEST_CASE("probability matrix")
{
    const ArrayConfig cfg = array_of(16, 4, 4, 4);
    const Beamspace space(cfg);
    Rng rng(3);
    const ScanPlan plan = build_scan_plan(space, 4, 2, CodebookMode::IdealSparse, rng);
    CHECK(probability_matrix(RMatrix::Zero(plan.u(), plan.v()), plan, 0).isZero());

    std::uniform_real_distribution<double> unif(0.0, 2.0);
    RMatrix y(plan.u(), plan.v());
    for (Eigen::Index k = 0; k < y.size(); ++k)
        y(k) = unif(rng);
    const RMatrix p = probability_matrix(y, plan, 1);
    const RMatrix y2 = y.cwiseProduct(y);
    for (int i = 0; i < cfg.m(); ++i)
        for (int j = 0; j < cfg.n_t; ++j) {
            RMatrix indicator = RMatrix::Zero(plan.u(), plan.v());
            const BinIndex b = scan_bin(plan, 1, i, j);
            indicator(b.u, b.v) = 1.0;
            CHECK(indicator.sum() == 1.0);
            CHECK(p(i, j) == (indicator.array() * y2.array()).sum());
        }
    CHECK_THROWS_AS(probability_matrix(RMatrix::Zero(2, 2), plan, 0), InvalidDimension);
}

TEST_CASE("detector threshold")
{
    CHECK(detector_threshold(1.0, 0.1) == doctest::Approx(std::sqrt(std::log(10.0))));
    CHECK(detector_threshold(0.0, 0.1) == 0.0);
    CHECK_THROWS_AS(detector_threshold(1.0, 0.0), InvalidParameter);

    // Rayleigh tail: P(|CN(0, s^2)| < eps) = 1 - p_fa.
    Rng rng(4);
    RMatrix y(100, 100);
    const int rounds = 10;
    int nulls = 0;
    for (int r = 0; r < rounds; ++r) {
        for (Eigen::Index k = 0; k < y.size(); ++k)
            y(k) = std::abs(complex_gaussian(rng, 4.0));
        nulls += classify_nulltons(y, detector_threshold(2.0, 0.01));
    }
    const double n = rounds * 1e4;
    CHECK(std::abs(nulls / n - 0.99) < 3.0 * std::sqrt(0.99 * 0.01 / n));
}

TEST_CASE("decode_los")
{
    const ArrayConfig cfg = array_of(128, 16, 16, 4);
    const Beamspace space(cfg);
    Rng rng(6);
    int success = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const ScanPlan plan = build_scan_plan(space, 32, 4, CodebookMode::IdealSparse, rng);
        const auto where = distinct_positions(cfg, 1, rng);
        const CMatrix lambda = planted(cfg, where, {std::polar(1.0, 0.3 * t)});
        const MeasurementSet ms = synthesize_from_beamspace(plan, lambda, 0.0, rng);
        const AlignmentEstimate est = decode_los(ms, plan, 0.0);
        CHECK(est.candidate_count == cfg.m() * cfg.n_t);
        success += est.index == where[0] ? 1 : 0;

        // Intersection singleton implies the decoder answer.
        const Intersection x = intersect_los(plan, argmax_bins(ms));
        if (x.rows.size() == 1 && x.cols.size() == 1) {
            CHECK(x.rows[0] == where[0].row);
            CHECK(x.cols[0] == where[0].col);
            CHECK(est.index == where[0]);
        }

        // Positive scaling of measurements and threshold leaves the answer unchanged.
        MeasurementSet scaled = ms;
        for (RMatrix& y : scaled.y)
            y *= 3.5;
        CHECK(decode_los(scaled, plan, 0.0).index == est.index);
        CHECK(decode_los(ms, plan, 1e-6).index == est.index);
    }
    CHECK(success >= 180);

    const ScanPlan plan = build_scan_plan(space, 32, 2, CodebookMode::IdealSparse, rng);
    const MeasurementSet noise = synthesize_from_beamspace(plan, CMatrix::Zero(256, 128), 1.0, rng);
    const AlignmentEstimate e = decode_los(noise, plan, detector_threshold(1.0, 0.1));
    CHECK((e.index.row >= 0 && e.index.row < 256 && e.index.col >= 0 && e.index.col < 128));
    CHECK(decode_los(noise, plan, 0.5).index == decode_los(noise, plan, 0.5).index);
    CHECK_THROWS_AS(decode_los(noise, plan, 1e3), ThresholdTooHigh);
    try {
        decode_los(noise, plan, 1e3);
    } catch (const ThresholdTooHigh& ex) {
        CHECK(ex.threshold() == doctest::Approx(1e6));
        CHECK(ex.max_probability() > 0.0);
    }
}

TEST_CASE("nullton classification and NM rounds")
{
    CHECK(select_nm_rounds({60, 60, 61, 63}) == std::vector<int>{0, 1});
    CHECK(select_nm_rounds({5, 5, 5}) == std::vector<int>{0, 1, 2});
    CHECK_THROWS_AS(select_nm_rounds({}), InvalidParameter);
    CHECK(classify_nulltons(RMatrix::Zero(4, 4), 0.0) == 0);

    const ArrayConfig cfg = array_of(128, 16, 16, 4);
    const Beamspace space(cfg);
    Rng rng(7);
    const int trials = 300;
    int exact = 0;
    for (int t = 0; t < trials; ++t) {
        const ScanPlan plan = build_scan_plan(space, 32, 5, CodebookMode::IdealSparse, rng);
        const auto where = distinct_positions(cfg, 4, rng);
        std::uniform_real_distribution<double> mag(0.5, 1.0), phase(0.0, 2.0 * kPi);
        std::vector<Complex> values;
        for (int k = 0; k < 4; ++k)
            values.push_back(std::polar(mag(rng), phase(rng)));
        const MeasurementSet ms =
            synthesize_from_beamspace(plan, planted(cfg, where, values), 0.0, rng);

        std::vector<int> truth_nm;
        for (int l = 0; l < plan.l(); ++l) {
            std::set<std::pair<int, int>> bins;
            for (const GridIndex& g : where) {
                const BinIndex b = bin_of(plan, l, g.row, g.col);
                bins.insert({b.u, b.v});
            }
            if (bins.size() == where.size()) {
                truth_nm.push_back(l);
                CHECK(classify_nulltons(ms.y[l], 1e-9) == plan.u() * plan.v() - 4);
            }
        }
        exact += select_nm_rounds(classify_nulltons(ms, 1e-9)) == truth_nm ? 1 : 0;
    }
    CHECK(exact >= 0.99 * trials);
}

TEST_CASE("decode_nlos")
{
    const ArrayConfig cfg = array_of(8, 4, 4, 2);
    const Beamspace space(cfg);

    // K = 1 makes every round NM, so both decoders agree.
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const ScanPlan plan = build_scan_plan(space, 4, 3, CodebookMode::IdealSparse, rng);
        const auto where = distinct_positions(cfg, 1, rng);
        const MeasurementSet ms =
            synthesize_from_beamspace(plan, planted(cfg, where, {1.0}), 0.0, rng);
        const AlignmentEstimate a = decode_nlos(ms, plan, 1e-9);
        CHECK(a.index == decode_los(ms, plan, 1e-9).index);
        CHECK(a.nm_rounds == std::vector<int>{0, 1, 2});
    }

    // Adversarial instance: in round 2 the two strongest entries share a bin
    // and nearly cancel. Search seeds for a plan with that layout and a
    // unique intersection over rounds 0 and 1.
    bool found = false;
    for (std::uint64_t seed = 0; seed < 5000 && !found; ++seed) {
        Rng r(seed);
        const ScanPlan plan = build_scan_plan(space, 4, 3, CodebookMode::IdealSparse, r);
        const auto where = distinct_positions(cfg, 4, r);
        auto distinct_bins = [&](int l) {
            std::set<std::pair<int, int>> bins;
            for (const GridIndex& g : where) {
                const BinIndex b = bin_of(plan, l, g.row, g.col);
                bins.insert({b.u, b.v});
            }
            return bins.size();
        };
        if (distinct_bins(0) != 4 || distinct_bins(1) != 4 || distinct_bins(2) != 3)
            continue;
        if (!(bin_of(plan, 2, where[0].row, where[0].col) ==
              bin_of(plan, 2, where[1].row, where[1].col)))
            continue;
        const std::vector<Complex> values{1.0, -0.95, Complex(0.0, 0.5), 0.4};
        Rng noiseless(0);
        const MeasurementSet ms =
            synthesize_from_beamspace(plan, planted(cfg, where, values), 0.0, noiseless);
        ScanPlan first_two = plan;
        first_two.rounds.resize(2);
        first_two.beams.resize(2);
        const Intersection x =
            intersect_los(first_two, {bin_of(plan, 0, where[0].row, where[0].col),
                                      bin_of(plan, 1, where[0].row, where[0].col)});
        if (x.rows.size() != 1 || x.cols.size() != 1)
            continue;
        const AlignmentEstimate est = decode_nlos(ms, plan, 1e-9);
        CHECK(est.nm_rounds == std::vector<int>{0, 1});
        found = true;
        CHECK(est.index == where[0]);
        CHECK(classify_nulltons(ms, 1e-9) == std::vector<int>{12, 12, 13});
    }
    CHECK(found);
}
