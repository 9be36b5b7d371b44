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

#include "irsbeam/codebook.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
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

void check_partition(const std::vector<Support>& sets, int n, int size)
{
    std::vector<int> seen(n, 0);
    for (const Support& s : sets) {
        REQUIRE(static_cast<int>(s.size()) == size);
        CHECK(std::is_sorted(s.begin(), s.end()));
        for (int i : s) {
            REQUIRE((i >= 0 && i < n));
            ++seen[i];
        }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

Support random_subset(int n, int k, Rng& rng)
{
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    Support s(all.begin(), all.begin() + k);
    std::sort(s.begin(), s.end());
    return s;
}

} // namespace

TEST_CASE("build_round partitions")
{
    Rng rng(1);
    const RoundEncoding small = build_round(array_of(4, 2, 2, 2), 2, rng);
    CHECK(small.u() == 2);
    check_partition(small.c_sets, 4, 2);

    const ArrayConfig cfg = array_of(128, 16, 16, 4);
    const RoundEncoding r = build_round(cfg, 32, rng);
    CHECK(r.u() == 8);
    CHECK(r.v() == 32);
    check_partition(r.c_sets, 256, 32);
    check_partition(r.a_sets, 128, 4);
    CHECK(r.beta == doctest::Approx(std::sqrt(8.0)));
    CHECK(r.gamma == doctest::Approx(0.5));

    Rng other(2);
    const RoundEncoding s = build_round(cfg, 32, other);
    CHECK(s.c_sets != r.c_sets);

    CHECK_THROWS_AS(build_round(cfg, 30, rng), InvalidParameter);
    CHECK_THROWS_AS(build_round(array_of(128, 16, 16, 3), 32, rng), InvalidParameter);
}

TEST_CASE("random partition is uniform over positions")
{
    // Each index lands in each of the n / size chunks equally often.
    Rng rng(4);
    const int n = 6, size = 2, draws = 30000;
    std::vector<std::vector<int>> hits(n, std::vector<int>(n / size, 0));
    for (int t = 0; t < draws; ++t) {
        const auto sets = random_partition(n, size, rng);
        for (int c = 0; c < n / size; ++c)
            for (int i : sets[c])
                ++hits[i][c];
    }
    const double p = 1.0 / 3.0;
    for (const auto& row : hits)
        for (int h : row)
            CHECK(std::abs(double(h) / draws - p) < 4.0 * std::sqrt(p * (1 - p) / draws));
}

TEST_CASE("scan plan budget and ideal beams")
{
    const ArrayConfig cfg = array_of(128, 16, 16, 4);
    const Beamspace space(cfg);
    ScanPlan a = build_scan_plan(space, 32, 4, CodebookMode::IdealSparse, std::uint64_t{9});
    CHECK(a.budget() == 1024);
    CHECK(build_scan_plan(space, 16, 4, CodebookMode::IdealSparse, std::uint64_t{9}).budget() ==
          2048);
    CHECK(build_scan_plan(space, 32, 1, CodebookMode::IdealSparse, std::uint64_t{9}).l() == 1);
    CHECK(static_cast<long long>(cfg.m()) * cfg.n_t == 32768);

    for (int l = 1; l < a.l(); ++l)
        CHECK(a.rounds[l].c_sets != a.rounds[0].c_sets);

    const RoundBeams& rb = a.beams[0];
    for (int u = 0; u < a.u(); ++u) {
        CHECK(rb.passive.col(u).squaredNorm() == doctest::Approx(256.0).epsilon(1e-10));
        const CVector c = space.cascade.adjoint() * rb.passive.col(u);
        CHECK(effective_support(space.cascade, rb.passive.col(u), 32) == a.rounds[0].c_sets[u]);
        for (int w = u + 1; w < a.u(); ++w)
            CHECK(std::abs(rb.passive.col(u).dot(rb.passive.col(w))) < 1e-9);
        (void)c;
    }
    for (int v = 0; v < a.v(); ++v) {
        CHECK(rb.precoders.col(v).norm() == doctest::Approx(1.0).epsilon(1e-12));
        for (int w = v + 1; w < a.v(); ++w)
            CHECK(std::abs(rb.precoders.col(v).dot(rb.precoders.col(w))) < 1e-12);
    }

    const ScanPlan b = build_scan_plan(space, 32, 4, CodebookMode::IdealSparse, std::uint64_t{9});
    for (int l = 0; l < a.l(); ++l) {
        CHECK(a.rounds[l].c_sets == b.rounds[l].c_sets);
        CHECK(a.rounds[l].a_sets == b.rounds[l].a_sets);
        CHECK(a.beams[l].passive == b.beams[l].passive);
    }

    CHECK_THROWS_AS(build_scan_plan(space, 32, 0, CodebookMode::IdealSparse, std::uint64_t{1}),
                    InvalidParameter);
}

TEST_CASE("constant-modulus solver small cases")
{
    const ArrayConfig cfg = array_of(4, 4, 4, 1);
    const Beamspace space(cfg);

    const SolverResult one = optimize_constant_modulus(space.cascade, {5});
    for (Eigen::Index i = 0; i < one.v.size(); ++i)
        CHECK(std::abs(std::abs(one.v(i)) - 1.0) < 1e-15);
    CHECK(std::norm(space.cascade.col(5).dot(one.v)) == doctest::Approx(16.0).epsilon(1e-9));

    Support all(16);
    std::iota(all.begin(), all.end(), 0);
    const SolverResult full = optimize_constant_modulus(space.cascade, all);
    CHECK(support_energy_fraction(space.cascade, full.v, all) == doctest::Approx(1.0));
    CHECK((space.cascade.adjoint() * full.v).squaredNorm() == doctest::Approx(16.0));
    CHECK(effective_support(space.cascade, full.v, 16) == all);
}

TEST_CASE("constant-modulus solver at M=256, Q=16")
{
    const ArrayConfig cfg = array_of(4, 16, 16, 1);
    const Beamspace space(cfg);
    Rng rng(21);
    int exact = 0;
    const int draws = 40;
    for (int t = 0; t < draws; ++t) {
        const Support s = random_subset(256, 16, rng);
        const SolverResult res = optimize_constant_modulus(space.cascade, s);
        for (Eigen::Index i = 0; i < res.v.size(); ++i)
            REQUIRE(std::abs(std::abs(res.v(i)) - 1.0) < 1e-15);
        for (size_t k = 1; k < res.objective.size(); ++k)
            REQUIRE(res.objective[k] >= res.objective[k - 1]);
        CHECK(res.objective.back() ==
              doctest::Approx(log_sum_objective(space.cascade(Eigen::all, s), res.v)));
        const double frac = support_energy_fraction(space.cascade, res.v, s);
        CHECK(frac >= 5.0 * 16.0 / 256.0);
        exact += effective_support(space.cascade, res.v, 16) == s ? 1 : 0;
    }
    MESSAGE("effective support equals the design in " << exact << " of " << draws);
    CHECK(exact >= 0.95 * draws);
}

TEST_CASE("constant-modulus plan keeps a partition of rows")
{
    const ArrayConfig cfg = array_of(16, 8, 8, 4);
    const Beamspace space(cfg);
    const ScanPlan plan = build_scan_plan(space, 16, 2, CodebookMode::ConstantModulus,
                                          std::uint64_t{3});
    for (const RoundBeams& rb : plan.beams) {
        CHECK(rb.passive.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(rb.passive.cwiseAbs().minCoeff() == doctest::Approx(1.0).epsilon(1e-15));
        for (int b : rb.row_bin)
            CHECK((b >= 0 && b < plan.u()));
        REQUIRE(static_cast<int>(rb.row_supports.size()) == plan.u());
    }
}

TEST_CASE("plan serialisation round trip")
{
    const ArrayConfig cfg = array_of(16, 4, 4, 4);
    const Beamspace space(cfg);
    for (CodebookMode mode : {CodebookMode::IdealSparse, CodebookMode::ConstantModulus}) {
        const ScanPlan a = build_scan_plan(space, 4, 3, mode, std::uint64_t{77});
        const std::string text = save_plan(a);
        const ScanPlan b = load_plan(text, space);
        CHECK(b.mode == a.mode);
        CHECK(b.seed == 77);
        CHECK(b.q == a.q);
        REQUIRE(b.l() == a.l());
        for (int l = 0; l < a.l(); ++l) {
            CHECK(a.rounds[l].c_sets == b.rounds[l].c_sets);
            CHECK(a.rounds[l].a_sets == b.rounds[l].a_sets);
            CHECK(a.beams[l].passive == b.beams[l].passive);
            CHECK(a.beams[l].precoders == b.beams[l].precoders);
            CHECK(a.beams[l].row_bin == b.beams[l].row_bin);
        }
        CHECK(save_plan(b) == text);
    }

    CHECK_THROWS(load_plan("{not json", space));
    const ScanPlan a = build_scan_plan(space, 4, 1, CodebookMode::IdealSparse, std::uint64_t{1});
    nlohmann::json doc = nlohmann::json::parse(save_plan(a));
    doc["rounds"][0]["c_sets"][0][0] = doc["rounds"][0]["c_sets"][1][0];
    CHECK_THROWS_AS(load_plan(doc.dump(), space), InvalidParameter);
    doc = nlohmann::json::parse(save_plan(a));
    doc["format"] = "something-else";
    CHECK_THROWS(load_plan(doc.dump(), space));
}

TEST_CASE("codebook mode names")
{
    CHECK(codebook_mode_from_string("ideal-sparse") == CodebookMode::IdealSparse);
    CHECK(codebook_mode_from_string(to_string(CodebookMode::ConstantModulus)) ==
          CodebookMode::ConstantModulus);
    CHECK_THROWS_AS(codebook_mode_from_string("sparse"), InvalidParameter);
}
