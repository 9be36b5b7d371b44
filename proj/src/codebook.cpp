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

#include "irsbeam/codebook.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace irsbeam {

std::string to_string(CodebookMode mode)
{
    return mode == CodebookMode::IdealSparse ? "ideal-sparse" : "constant-modulus";
}

CodebookMode codebook_mode_from_string(const std::string& s)
{
    if (s == "ideal-sparse")
        return CodebookMode::IdealSparse;
    if (s == "constant-modulus")
        return CodebookMode::ConstantModulus;
    throw InvalidParameter("unknown codebook mode '" + s + "'");
}

std::vector<Support> random_partition(int n, int size, Rng& rng)
{
    if (size < 1 || n < 1 || n % size != 0)
        throw InvalidParameter("set size " + std::to_string(size) + " does not divide " +
                               std::to_string(n));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    // Explicit Fisher-Yates; std::shuffle's draw sequence is library-specific.
    for (int i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        std::swap(perm[i], perm[pick(rng)]);
    }
    std::vector<Support> sets(n / size);
    for (int s = 0; s < n / size; ++s) {
        sets[s].assign(perm.begin() + s * size, perm.begin() + (s + 1) * size);
        std::sort(sets[s].begin(), sets[s].end());
    }
    return sets;
}

RoundEncoding build_round(const ArrayConfig& cfg, int q, Rng& rng)
{
    cfg.validate();
    const int m = cfg.m();
    if (q < 1 || m % q != 0)
        throw InvalidParameter("Q = " + std::to_string(q) + " must divide M = " + std::to_string(m));
    if (cfg.n_t % cfg.r != 0)
        throw InvalidParameter("R = " + std::to_string(cfg.r) + " must divide N_t = " +
                               std::to_string(cfg.n_t));
    RoundEncoding round;
    round.c_sets = random_partition(m, q, rng);
    round.a_sets = random_partition(cfg.n_t, cfg.r, rng);
    round.beta = std::sqrt(static_cast<double>(m) / q);
    round.gamma = 1.0 / std::sqrt(static_cast<double>(cfg.r));
    return round;
}

double log_sum_objective(const CMatrix& selected, const CVector& v)
{
    const RVector power = (selected.adjoint() * v).cwiseAbs2();
    double f = 0.0;
    for (Eigen::Index k = 0; k < power.size(); ++k)
        f += std::log2(1.0 + power(k));
    return f;
}

namespace {

void project_unit_modulus(CVector& v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v(i));
        v(i) = mag > 0.0 ? v(i) / mag : Complex(1.0, 0.0);
    }
}

CMatrix gather_columns(const CMatrix& dict, const Support& cols)
{
    CMatrix out(dict.rows(), static_cast<Eigen::Index>(cols.size()));
    for (size_t k = 0; k < cols.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = dict.col(cols[k]);
    return out;
}

void check_partition(const std::vector<Support>& sets, int n, int size, const char* what)
{
    std::vector<int> seen(n, 0);
    for (const Support& s : sets) {
        if (static_cast<int>(s.size()) != size)
            throw InvalidParameter(std::string(what) + " set has wrong size");
        for (int i : s) {
            if (i < 0 || i >= n || seen[i]++)
                throw InvalidParameter(std::string(what) + " sets do not partition the index range");
        }
    }
    if (static_cast<int>(sets.size()) * size != n)
        throw InvalidParameter(std::string(what) + " sets do not cover the index range");
}

} // namespace

SolverResult optimize_constant_modulus(const CMatrix& cascade_dict, const Support& selected,
                                       const SolverParams& params)
{
    const Eigen::Index m = cascade_dict.rows();
    if (selected.empty() || static_cast<Eigen::Index>(selected.size()) > m)
        throw InvalidParameter("selected support must have between 1 and M columns");
    for (int c : selected)
        if (c < 0 || c >= m)
            throw InvalidParameter("selected column out of range");

    const CMatrix p = gather_columns(cascade_dict, selected);
    SolverResult res;
    res.v = p.rowwise().sum();
    project_unit_modulus(res.v);
    double f = log_sum_objective(p, res.v);
    res.objective.push_back(f);

    double step = params.initial_step;
    const double inv_ln2 = 1.0 / std::log(2.0);
    for (int it = 0; it < params.max_iters; ++it) {
        // Euclidean gradient w.r.t. conj(v), then its tangent component on
        // the torus |v_i| = 1.
        const CVector s = p.adjoint() * res.v;
        CVector w(s.size());
        for (Eigen::Index k = 0; k < s.size(); ++k)
            w(k) = inv_ln2 * s(k) / (1.0 + std::norm(s(k)));
        CVector g = p * w;
        for (Eigen::Index i = 0; i < m; ++i)
            g(i) -= std::real(g(i) * std::conj(res.v(i))) * res.v(i);

        bool accepted = false;
        CVector trial;
        double f_trial = f;
        for (int bt = 0; bt < params.max_backtracks; ++bt) {
            trial = res.v + step * g;
            project_unit_modulus(trial);
            f_trial = log_sum_objective(p, trial);
            if (f_trial > f) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        res.iterations = it + 1;
        if (!accepted) {
            res.converged = true;  // no ascent direction left at working precision
            break;
        }
        const double gain = (f_trial - f) / std::max(std::abs(f), 1e-300);
        res.v = std::move(trial);
        f = f_trial;
        res.objective.push_back(f);
        step = std::min(step * 2.0, 64.0 * params.initial_step);
        if (gain < params.tolerance) {
            res.converged = true;
            break;
        }
    }
    return res;
}

Support effective_support(const CMatrix& cascade_dict, const CVector& v, int q)
{
    const int m = static_cast<int>(cascade_dict.cols());
    if (q < 0 || q > m)
        throw InvalidParameter("support size must lie in [0, M]");
    const RVector mag = (cascade_dict.adjoint() * v).cwiseAbs2();
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return mag(a) > mag(b); });
    Support out(idx.begin(), idx.begin() + q);
    std::sort(out.begin(), out.end());
    return out;
}

double support_energy_fraction(const CMatrix& cascade_dict, const CVector& v,
                               const Support& support)
{
    const RVector mag = (cascade_dict.adjoint() * v).cwiseAbs2();
    double in = 0.0;
    for (int i : support)
        in += mag(i);
    return in / mag.sum();
}

void materialize_beams(ScanPlan& plan, const Beamspace& space)
{
    const ArrayConfig& cfg = plan.array;
    const int m = cfg.m();
    plan.beams.clear();
    plan.beams.reserve(plan.rounds.size());
    for (const RoundEncoding& round : plan.rounds) {
        RoundBeams rb;
        rb.passive.resize(m, round.u());
        rb.precoders.resize(cfg.n_t, round.v());
        rb.col_bin.assign(cfg.n_t, -1);
        rb.row_bin.assign(m, -1);

        for (int v = 0; v < round.v(); ++v) {
            rb.precoders.col(v).setZero();
            for (int j : round.a_sets[v]) {
                rb.precoders.col(v) += round.gamma * space.bs.col(j);
                rb.col_bin[j] = v;
            }
        }

        if (plan.mode == CodebookMode::IdealSparse) {
            for (int u = 0; u < round.u(); ++u) {
                rb.passive.col(u).setZero();
                for (int i : round.c_sets[u]) {
                    rb.passive.col(u) += round.beta * space.cascade.col(i);
                    rb.row_bin[i] = u;
                }
            }
            rb.row_supports = round.c_sets;
        } else {
            for (int u = 0; u < round.u(); ++u)
                rb.passive.col(u) = optimize_constant_modulus(space.cascade, round.c_sets[u],
                                                              plan.solver).v;
            // Decode with the prominent entries of each c_u = barD_R^H v_u.
            // Rows claimed by no beam or by several go to the beam with the
            // largest |c_u(i)|, which keeps the row map a partition.
            const RMatrix c_mag = (space.cascade.adjoint() * rb.passive).cwiseAbs2();
            std::vector<int> claims(m, 0);
            for (int u = 0; u < round.u(); ++u) {
                rb.row_supports.push_back(effective_support(space.cascade, rb.passive.col(u),
                                                            plan.q));
                for (int i : rb.row_supports.back()) {
                    ++claims[i];
                    rb.row_bin[i] = u;
                }
            }
            for (int i = 0; i < m; ++i) {
                if (claims[i] == 1)
                    continue;
                Eigen::Index best = 0;
                c_mag.row(i).maxCoeff(&best);
                rb.row_bin[i] = static_cast<int>(best);
            }
        }
        plan.beams.push_back(std::move(rb));
    }
}

ScanPlan build_scan_plan(const Beamspace& space, int q, int l, CodebookMode mode, Rng& rng,
                         const SolverParams& params)
{
    if (l < 1)
        throw InvalidParameter("number of rounds must be >= 1");
    ScanPlan plan;
    plan.array = space.array;
    plan.q = q;
    plan.mode = mode;
    plan.solver = params;
    for (int k = 0; k < l; ++k)
        plan.rounds.push_back(build_round(space.array, q, rng));
    materialize_beams(plan, space);
    return plan;
}

ScanPlan build_scan_plan(const Beamspace& space, int q, int l, CodebookMode mode,
                         std::uint64_t seed, const SolverParams& params)
{
    Rng rng(seed);
    ScanPlan plan = build_scan_plan(space, q, l, mode, rng, params);
    plan.seed = seed;
    return plan;
}

std::string save_plan(const ScanPlan& plan)
{
    using nlohmann::json;
    json doc;
    doc["format"] = "irsbeam-scan-plan";
    doc["version"] = 1;
    doc["mode"] = to_string(plan.mode);
    doc["seed"] = plan.seed;
    doc["array"] = {{"n_t", plan.array.n_t},
                    {"m_y", plan.array.m_y},
                    {"m_z", plan.array.m_z},
                    {"r", plan.array.r},
                    {"spacing_ratio", plan.array.spacing_ratio}};
    doc["q"] = plan.q;
    doc["solver"] = {{"max_iters", plan.solver.max_iters},
                     {"tolerance", plan.solver.tolerance},
                     {"initial_step", plan.solver.initial_step},
                     {"max_backtracks", plan.solver.max_backtracks}};
    doc["budget"] = plan.budget();
    json rounds = json::array();
    for (const RoundEncoding& r : plan.rounds)
        rounds.push_back({{"c_sets", r.c_sets}, {"a_sets", r.a_sets}, {"beta", r.beta},
                          {"gamma", r.gamma}});
    doc["rounds"] = std::move(rounds);
    return doc.dump(1);
}

ScanPlan load_plan(const std::string& json_text, const Beamspace& space)
{
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InvalidParameter(std::string("malformed plan document: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "irsbeam-scan-plan" ||
            doc.at("version").get<int>() != 1)
            throw InvalidParameter("not an irsbeam scan plan (version 1)");
        ScanPlan plan;
        const json& a = doc.at("array");
        plan.array.n_t = a.at("n_t").get<int>();
        plan.array.m_y = a.at("m_y").get<int>();
        plan.array.m_z = a.at("m_z").get<int>();
        plan.array.r = a.at("r").get<int>();
        plan.array.spacing_ratio = a.at("spacing_ratio").get<double>();
        if (plan.array.n_t != space.array.n_t || plan.array.m() != space.array.m() ||
            plan.array.m_y != space.array.m_y)
            throw InvalidDimension("plan array does not match the beamspace");
        plan.mode = codebook_mode_from_string(doc.at("mode").get<std::string>());
        plan.seed = doc.at("seed").get<std::uint64_t>();
        plan.q = doc.at("q").get<int>();
        const json& s = doc.at("solver");
        plan.solver.max_iters = s.at("max_iters").get<int>();
        plan.solver.tolerance = s.at("tolerance").get<double>();
        plan.solver.initial_step = s.at("initial_step").get<double>();
        plan.solver.max_backtracks = s.at("max_backtracks").get<int>();
        for (const json& r : doc.at("rounds")) {
            RoundEncoding round;
            round.c_sets = r.at("c_sets").get<std::vector<Support>>();
            round.a_sets = r.at("a_sets").get<std::vector<Support>>();
            round.beta = r.at("beta").get<double>();
            round.gamma = r.at("gamma").get<double>();
            check_partition(round.c_sets, plan.array.m(), plan.q, "passive");
            check_partition(round.a_sets, plan.array.n_t, plan.array.r, "precoder");
            plan.rounds.push_back(std::move(round));
        }
        materialize_beams(plan, space);
        return plan;
    } catch (const json::exception& e) {
        throw InvalidParameter(std::string("incomplete plan document: ") + e.what());
    }
}

} // namespace irsbeam
