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
#include "irsbeam/theory.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace irsbeam;

namespace {

int cmd_theory(const theory::PlanProbe& probe)
{
    probe.validate();
    std::cout << std::fixed << std::setprecision(6);
    std::cout << "M=" << probe.m << " N_t=" << probe.n_t << " Q=" << probe.q << " R=" << probe.r
              << " L=" << probe.l << " K=" << probe.k << " (U=" << probe.u()
              << ", V=" << probe.v() << ", T=" << static_cast<long long>(probe.u()) * probe.v() * probe.l
              << ")\n";
    std::cout << "p_lower_los  " << theory::p_lower_los(probe) << '\n';
    std::cout << "p_nm_round   " << theory::p_nm_round(probe) << '\n';
    std::cout << "p_lower_nlos " << theory::p_lower_nlos(probe) << '\n';
    std::cout << "\nsample complexity (LOS bound)\n";
    std::cout << "p0        L1  L2  L_equal  T_equal  L_joint  T_joint\n";
    for (double p0 : {0.8, 0.9, 0.95, 0.99, 0.999}) {
        const auto eq = theory::sample_complexity(probe, p0, theory::BudgetSplit::Equal);
        const auto joint = theory::sample_complexity(probe, p0, theory::BudgetSplit::Joint);
        std::cout << std::setprecision(3) << std::left << std::setw(10) << p0 << std::right
                  << std::setw(2) << eq.l1 << std::setw(4) << eq.l2 << std::setw(9) << eq.l
                  << std::setw(9) << eq.t << std::setw(9) << joint.l << std::setw(9) << joint.t
                  << '\n';
    }
    return 0;
}

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed,
            std::optional<int> trials)
{
    ExperimentConfig cfg = load_config(config);
    if (seed)
        cfg.seed = *seed;
    if (trials)
        cfg.trials = *trials;
    cfg.validate();
    std::ofstream file;
    if (!cfg.output.empty())
        file = open_output(cfg.output);
    std::ostream& os = cfg.output.empty() ? std::cout : file;

    const double t = static_cast<double>(cfg.array.m() / cfg.q) * (cfg.array.n_t / cfg.array.r) * cfg.l;
    ExperimentConfig point = cfg;
    point.snr_db = {cfg.snr_db.front()};
    os << kCsvHeader << '\n';
    write_csv_row(os, run_point(point, "T", t));
    return 0;
}

int cmd_sweep(const std::string& config, const std::string& axis_name, const std::string& out)
{
    const ExperimentConfig cfg = load_config(config);
    sweep_to_csv(cfg, sweep_axis_from_string(axis_name), out, 0, &std::cerr);
    return 0;
}

int cmd_plan(const std::string& config, const std::string& out)
{
    const ExperimentConfig cfg = load_config(config);
    std::ofstream file = open_output(out);
    const Beamspace space(cfg.array);
    const ScanPlan plan = build_scan_plan(space, cfg.q, cfg.l, cfg.mode, cfg.seed, cfg.solver);
    file << save_plan(plan) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"irsbeam: beam training and alignment for IRS-assisted links"};
    app.require_subcommand(1);

    theory::PlanProbe probe;
    auto* th = app.add_subcommand("theory", "Evaluate the success-probability bounds");
    th->add_option("--m", probe.m, "IRS elements M")->required();
    th->add_option("--nt", probe.n_t, "BS antennas N_t")->required();
    th->add_option("--q", probe.q, "passive-beam support size Q")->required();
    th->add_option("--r", probe.r, "RF chains R")->required();
    th->add_option("--l", probe.l, "scanning rounds L")->required();
    th->add_option("--k", probe.k, "nonzero beamspace entries K");

    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    auto* run = app.add_subcommand("run", "Run one sweep point and print a CSV row");
    run->add_option("--config", config, "configuration file")->required();
    run->add_option("--seed", seed, "override the master seed");
    run->add_option("--trials", trials, "override the trial count");

    std::string axis, out;
    auto* sw = app.add_subcommand("sweep", "Run a full curve");
    sw->add_option("--config", config, "configuration file")->required();
    sw->add_option("--axis", axis, "T, snr or M")
        ->required()
        ->check(CLI::IsMember({"T", "snr", "M"}));
    sw->add_option("--out", out, "CSV output path")->required();

    auto* pl = app.add_subcommand("plan", "Export a scan plan as JSON");
    pl->add_option("--config", config, "configuration file")->required();
    pl->add_option("--out", out, "JSON output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*th)
            return cmd_theory(probe);
        if (*run)
            return cmd_run(config, seed, trials);
        if (*sw)
            return cmd_sweep(config, axis, out);
        if (*pl)
            return cmd_plan(config, out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
