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

#include "irsbeam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace irsbeam {

std::string to_string(Scenario s)
{
    return s == Scenario::Los ? "LOS" : "NLOS";
}

std::string to_string(Method m)
{
    return m == Method::Proposed ? "proposed" : "exhaustive";
}

std::string to_string(SweepAxis a)
{
    switch (a) {
    case SweepAxis::T:
        return "T";
    case SweepAxis::Snr:
        return "snr";
    case SweepAxis::M:
        return "M";
    }
    return "?";
}

SweepAxis sweep_axis_from_string(const std::string& s)
{
    if (s == "T")
        return SweepAxis::T;
    if (s == "snr")
        return SweepAxis::Snr;
    if (s == "M")
        return SweepAxis::M;
    throw InvalidParameter("unknown sweep axis '" + s + "' (expected T, snr or M)");
}

double ExperimentConfig::irs_user_rician_db() const
{
    if (rician_irs_user_db)
        return *rician_irs_user_db;
    return scenario == Scenario::Los ? 13.2 : 0.0;
}

void ExperimentConfig::validate() const
{
    array.validate();
    if (q < 1 || array.m() % q != 0)
        throw InvalidParameter("q must divide M");
    if (array.n_t % array.r != 0)
        throw InvalidParameter("r must divide n_t");
    if (l < 1)
        throw InvalidParameter("l must be >= 1");
    if (trials < 1)
        throw InvalidParameter("trials must be >= 1");
    if (snr_db.empty() || t_sweep.empty() || m_sweep.empty())
        throw InvalidParameter("sweep lists must be nonempty");
    for (int t : t_sweep)
        if (t < 1)
            throw InvalidParameter("t_sweep entries are round counts and must be >= 1");
    for (double s : snr_db)
        if (std::isnan(s))
            throw InvalidParameter("snr_db must be a number");
    if (paths_bs_irs < 1 || paths_irs_user < 1)
        throw InvalidParameter("path counts must be >= 1");
    if (!(p_fa > 0.0 && p_fa <= 1.0))
        throw InvalidParameter("p_fa must lie in (0, 1]");
    if (plan_pool < 0)
        throw InvalidParameter("plan_pool must be >= 0");
}

// ---- configuration parsing -----------------------------------------------

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(trim(item));
    return out;
}

double to_double(const std::string& key, const std::string& v)
{
    if (v == "inf" || v == "+inf")
        return std::numeric_limits<double>::infinity();
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InvalidParameter("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

long long to_integer(const std::string& key, const std::string& v)
{
    try {
        size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw InvalidParameter("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v)
{
    const long long i = to_integer(key, v);
    if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
        throw InvalidParameter("config key '" + key + "': value out of range");
    return static_cast<int>(i);
}

} // namespace

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig cfg;
    std::map<std::string, std::string> seen;
    std::stringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidParameter("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!seen.emplace(key, val).second)
            throw InvalidParameter("config key '" + key + "' given twice");

        if (key == "n_t")
            cfg.array.n_t = to_int(key, val);
        else if (key == "m_y")
            cfg.array.m_y = to_int(key, val);
        else if (key == "m_z")
            cfg.array.m_z = to_int(key, val);
        else if (key == "r")
            cfg.array.r = to_int(key, val);
        else if (key == "spacing_ratio")
            cfg.array.spacing_ratio = to_double(key, val);
        else if (key == "q")
            cfg.q = to_int(key, val);
        else if (key == "l")
            cfg.l = to_int(key, val);
        else if (key == "mode")
            cfg.mode = codebook_mode_from_string(val);
        else if (key == "scenario") {
            if (val == "LOS")
                cfg.scenario = Scenario::Los;
            else if (val == "NLOS")
                cfg.scenario = Scenario::Nlos;
            else
                throw InvalidParameter("scenario must be LOS or NLOS");
        } else if (key == "rician_bs_irs_db")
            cfg.rician_bs_irs_db = to_double(key, val);
        else if (key == "rician_irs_user_db")
            cfg.rician_irs_user_db = to_double(key, val);
        else if (key == "paths_bs_irs")
            cfg.paths_bs_irs = to_int(key, val);
        else if (key == "paths_irs_user")
            cfg.paths_irs_user = to_int(key, val);
        else if (key == "snr_db") {
            cfg.snr_db.clear();
            for (const auto& s : split_list(val))
                cfg.snr_db.push_back(to_double(key, s));
        } else if (key == "t_sweep") {
            cfg.t_sweep.clear();
            for (const auto& s : split_list(val))
                cfg.t_sweep.push_back(to_int(key, s));
        } else if (key == "m_sweep") {
            cfg.m_sweep.clear();
            for (const auto& s : split_list(val)) {
                const auto x = s.find('x');
                if (x == std::string::npos)
                    throw InvalidParameter("m_sweep entries look like 16x16");
                cfg.m_sweep.emplace_back(to_int(key, trim(s.substr(0, x))),
                                         to_int(key, trim(s.substr(x + 1))));
            }
        } else if (key == "trials")
            cfg.trials = to_int(key, val);
        else if (key == "seed") {
            const long long s = to_integer(key, val);
            if (s < 0)
                throw InvalidParameter("seed must be >= 0");
            cfg.seed = static_cast<std::uint64_t>(s);
        } else if (key == "p_fa")
            cfg.p_fa = to_double(key, val);
        else if (key == "method") {
            if (val == "proposed")
                cfg.method = Method::Proposed;
            else if (val == "exhaustive")
                cfg.method = Method::Exhaustive;
            else
                throw InvalidParameter("method must be proposed or exhaustive");
        } else if (key == "plan_pool")
            cfg.plan_pool = to_int(key, val);
        else if (key == "solver_max_iters")
            cfg.solver.max_iters = to_int(key, val);
        else if (key == "solver_tolerance")
            cfg.solver.tolerance = to_double(key, val);
        else if (key == "output")
            cfg.output = val;
        else
            throw InvalidParameter("unknown config key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---- metrics ----------------------------------------------------------------

double snr_to_sigma(const CMatrix& h, double snr_db)
{
    const double fro = h.norm();
    if (!(fro > 0.0))
        throw InvalidParameter("SNR is undefined for a zero channel");
    if (std::isinf(snr_db) && snr_db > 0)
        return 0.0;
    const double denom = static_cast<double>(h.rows()) * h.cols() * std::pow(10.0, snr_db / 10.0);
    return fro / std::sqrt(denom);
}

namespace {

CVector phase_of(const CVector& x)
{
    CVector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double mag = std::abs(x(i));
        out(i) = mag > 0.0 ? x(i) / mag : Complex(1.0, 0.0);
    }
    return out;
}

OptimalBeams alternate(const CMatrix& h, CVector v, CVector f)
{
    OptimalBeams ob;
    double gain = std::norm(v.dot(h * f));
    ob.history.push_back(gain);
    for (int it = 0; it < 100; ++it) {
        CVector f_new = h.adjoint() * v;
        const double n = f_new.norm();
        if (n == 0.0)
            break;
        f_new /= n;
        CVector v_new = phase_of(h * f_new);
        const double g = std::norm(v_new.dot(h * f_new));
        if (g < gain)
            break;  // cannot happen in exact arithmetic; guards rounding
        const double rel = (g - gain) / std::max(g, 1e-300);
        v = std::move(v_new);
        f = std::move(f_new);
        gain = g;
        ob.history.push_back(gain);
        if (rel < 1e-8)
            break;
    }
    ob.v = std::move(v);
    ob.f = std::move(f);
    ob.gain = gain;
    return ob;
}

} // namespace

OptimalBeams optimal_beams(const CascadeChannel& ch, const Beamspace& space)
{
    const CMatrix& h = ch.h;
    if (h.norm() == 0.0)
        throw InvalidParameter("optimal beams are undefined for a zero channel");

    // Dominant right singular vector by power iteration on H^H H.
    CVector f = space.bs.col(ch.strongest.col);
    for (int it = 0; it < 100; ++it) {
        CVector next = h.adjoint() * (h * f);
        const double n = next.norm();
        if (n == 0.0)
            break;
        next /= n;
        const double change = (next - f).norm();
        f = std::move(next);
        if (change < 1e-12)
            break;
    }
    OptimalBeams from_svd = alternate(h, phase_of(h * f), f);

    const double root_m = std::sqrt(static_cast<double>(h.rows()));
    OptimalBeams from_grid = alternate(h, root_m * space.cascade.col(ch.strongest.row),
                                       space.bs.col(ch.strongest.col));
    return from_grid.gain > from_svd.gain ? from_grid : from_svd;
}

double bgr(const CascadeChannel& ch, const GridIndex& index, const OptimalBeams& opt)
{
    if (index.row < 0 || index.row >= ch.lambda.rows() || index.col < 0 ||
        index.col >= ch.lambda.cols())
        throw InvalidParameter("estimate index out of range");
    // v = sqrt(M) barD_R(:, i), f = D(:, j) gives |v^H H f|^2 = M |lambda(i, j)|^2.
    const double grid = static_cast<double>(ch.lambda.rows()) *
                        std::norm(ch.lambda(index.row, index.col));
    return grid / opt.gain;
}

double pathloss(double distance_m, double exponent, double g0_db)
{
    if (!(distance_m >= 1.0))
        throw InvalidParameter("distance must be >= 1 m");
    return std::pow(10.0, g0_db / 10.0) * std::pow(distance_m, -exponent);
}

// ---- trials -----------------------------------------------------------------

namespace {

constexpr std::uint64_t kPlanStream = 0x706c616e;  // "plan"

} // namespace

std::uint64_t trial_seed(std::uint64_t master, int trial_index)
{
    return derive_seed(master, static_cast<std::uint64_t>(trial_index));
}

PointContext prepare_point(const ExperimentConfig& cfg)
{
    cfg.validate();
    PointContext ctx;
    ctx.cfg = cfg;
    ctx.space = std::make_shared<const Beamspace>(cfg.array);
    if (cfg.method == Method::Proposed) {
        for (int k = 0; k < cfg.plan_pool; ++k)
            ctx.plans.push_back(build_scan_plan(*ctx.space, cfg.q, cfg.l, cfg.mode,
                                                derive_seed(cfg.seed, kPlanStream, k), cfg.solver));
    }
    return ctx;
}

TrialRecord run_trial(const PointContext& ctx, std::uint64_t seed, int trial_index)
{
    const ExperimentConfig& cfg = ctx.cfg;
    const Beamspace& space = *ctx.space;
    Rng channel_rng(derive_seed(seed, 0));
    Rng noise_rng(derive_seed(seed, 1));

    const PathSet bs_irs = sample_paths(cfg.paths_bs_irs, cfg.rician_bs_irs_db, cfg.sector,
                                        channel_rng);
    const PathSet irs_user = sample_paths(cfg.paths_irs_user, cfg.irs_user_rician_db(),
                                          cfg.sector, channel_rng);
    const CascadeChannel ch = assemble_channels(bs_irs, irs_user, space);

    TrialRecord rec;
    rec.truth = ch.strongest;
    rec.sigma = cfg.snr_db.empty() ? 0.0 : snr_to_sigma(ch.h, cfg.snr_db.front());

    AlignmentEstimate est;
    if (cfg.method == Method::Exhaustive) {
        est = exhaustive_search(ch, rec.sigma, noise_rng);
    } else {
        ScanPlan own;
        const ScanPlan* plan = nullptr;
        if (ctx.plans.empty()) {
            own = build_scan_plan(space, cfg.q, cfg.l, cfg.mode, derive_seed(seed, 2), cfg.solver);
            plan = &own;
        } else {
            plan = &ctx.plans[static_cast<size_t>(trial_index) % ctx.plans.size()];
        }
        const MeasurementSet ms = synthesize_measurements(*plan, ch, rec.sigma, noise_rng);
        const double eps = detector_threshold(rec.sigma, cfg.p_fa);
        try {
            est = cfg.scenario == Scenario::Los ? decode_los(ms, *plan, eps)
                                                : decode_nlos(ms, *plan, eps);
        } catch (const ThresholdTooHigh&) {
            rec.decode_failed = true;
            return rec;
        }
    }
    rec.estimate = est.index;
    rec.candidate_count = est.candidate_count;
    rec.nm_round_count = static_cast<int>(est.nm_rounds.size());
    rec.success = est.index == ch.strongest;
    rec.bgr = bgr(ch, est.index, optimal_beams(ch, space));
    return rec;
}

TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t seed)
{
    ExperimentConfig c = cfg;
    c.plan_pool = 0;
    return run_trial(prepare_point(c), seed, 0);
}

int worker_threads()
{
    if (const char* env = std::getenv("IRSBEAM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1)
            return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

PointResult run_point(const ExperimentConfig& cfg, const std::string& sweep_var, double value,
                      int threads)
{
    const PointContext ctx = prepare_point(cfg);
    if (threads <= 0)
        threads = worker_threads();
    threads = std::min(threads, cfg.trials);

    PointResult res;
    res.sweep_var = sweep_var;
    res.value = value;
    res.trials = cfg.trials;
    res.seed = cfg.seed;
    res.records.resize(cfg.trials);

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (int k = next++; k < cfg.trials && !failed; k = next++) {
            try {
                res.records[k] = run_trial(ctx, trial_seed(cfg.seed, k), k);
            } catch (...) {
                if (!failed.exchange(true))
                    failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);

    double successes = 0.0, sum = 0.0, sum_sq = 0.0;
    for (const TrialRecord& r : res.records) {
        successes += r.success ? 1.0 : 0.0;
        sum += r.bgr;
        sum_sq += r.bgr * r.bgr;
    }
    const double n = cfg.trials;
    res.success_rate = successes / n;
    res.stderr_success = std::sqrt(res.success_rate * (1.0 - res.success_rate) / n);
    res.mean_bgr = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq - n * res.mean_bgr * res.mean_bgr) / (n - 1))
                             : 0.0;
    res.stderr_bgr = std::sqrt(var / n);
    return res;
}

std::vector<std::pair<double, ExperimentConfig>> sweep_points(const ExperimentConfig& cfg,
                                                              SweepAxis axis)
{
    cfg.validate();
    std::vector<std::pair<double, ExperimentConfig>> out;
    switch (axis) {
    case SweepAxis::T:
        for (int l : cfg.t_sweep) {
            ExperimentConfig c = cfg;
            c.l = l;
            const double t = static_cast<double>(c.array.m() / c.q) * (c.array.n_t / c.array.r) * l;
            out.emplace_back(t, c);
        }
        break;
    case SweepAxis::Snr:
        for (double s : cfg.snr_db) {
            ExperimentConfig c = cfg;
            c.snr_db = {s};
            out.emplace_back(s, c);
        }
        break;
    case SweepAxis::M: {
        // Hold U = M / Q fixed while the surface grows.
        const int u = cfg.array.m() / cfg.q;
        for (const auto& [my, mz] : cfg.m_sweep) {
            ExperimentConfig c = cfg;
            c.array.m_y = my;
            c.array.m_z = mz;
            if ((my * mz) % u != 0)
                throw InvalidParameter("M = " + std::to_string(my * mz) +
                                       " is not a multiple of U = " + std::to_string(u));
            c.q = my * mz / u;
            out.emplace_back(static_cast<double>(my * mz), c);
        }
        break;
    }
    }
    return out;
}

std::vector<PointResult> sweep(const ExperimentConfig& cfg, SweepAxis axis, int threads)
{
    std::vector<PointResult> out;
    for (const auto& [value, c] : sweep_points(cfg, axis))
        out.push_back(run_point(c, to_string(axis), value, threads));
    return out;
}

void write_csv_row(std::ostream& os, const PointResult& r)
{
    std::ostringstream line;
    line << std::setprecision(10) << r.sweep_var << ',' << r.value << ',' << r.trials << ','
         << r.success_rate << ',' << r.stderr_success << ',' << r.mean_bgr << ','
         << r.stderr_bgr << ',' << r.seed << '\n';
    os << line.str();
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + path + "'");
    return out;
}

std::vector<PointResult> sweep_to_csv(const ExperimentConfig& cfg, SweepAxis axis,
                                      const std::string& path, int threads,
                                      std::ostream* progress)
{
    const auto points = sweep_points(cfg, axis);
    std::ofstream out = open_output(path);
    out << kCsvHeader << '\n';
    std::vector<PointResult> results;
    for (const auto& [value, c] : points) {
        PointResult r = run_point(c, to_string(axis), value, threads);
        write_csv_row(out, r);
        out.flush();
        if (!out)
            throw IoError("failed writing '" + path + "'");
        if (progress)
            *progress << to_string(axis) << '=' << value << "  success=" << r.success_rate
                      << "  mean_bgr=" << r.mean_bgr << '\n';
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace irsbeam
