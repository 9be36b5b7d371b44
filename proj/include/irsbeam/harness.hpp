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

#include "irsbeam/channel.hpp"
#include "irsbeam/codebook.hpp"
#include "irsbeam/decoder.hpp"

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace irsbeam {

enum class Scenario { Los, Nlos };
enum class Method { Proposed, Exhaustive };
enum class SweepAxis { T, Snr, M };

std::string to_string(Scenario s);
std::string to_string(Method m);
std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

struct ExperimentConfig {
    ArrayConfig array;
    int q = 16;
    int l = 4;
    CodebookMode mode = CodebookMode::ConstantModulus;
    Scenario scenario = Scenario::Los;
    double rician_bs_irs_db = 13.2;
    /// Defaults to 13.2 dB for LOS and 0 dB for NLOS when unset.
    std::optional<double> rician_irs_user_db;
    int paths_bs_irs = 2;
    int paths_irs_user = 2;
    AngleSector sector;
    std::vector<double> snr_db{-20.0};  ///< +inf means noiseless
    std::vector<int> t_sweep{2, 3, 4, 5, 6, 7, 8};  ///< round counts L of the T axis
    std::vector<std::pair<int, int>> m_sweep{{8, 8}, {8, 16}, {16, 16}};  ///< (m_y, m_z)
    int trials = 500;
    std::uint64_t seed = 1;
    double p_fa = 0.1;
    Method method = Method::Proposed;
    /// Number of distinct scan plans per sweep point; trial k uses plan
    /// k mod plan_pool. Zero draws a fresh plan for every trial.
    int plan_pool = 8;
    SolverParams solver;
    std::string output;

    double irs_user_rician_db() const;
    void validate() const;
};

/// Parses the flat `key = value` configuration format. Unknown keys,
/// malformed values and duplicate keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct TrialRecord {
    bool success = false;
    double bgr = 0.0;
    GridIndex truth;
    GridIndex estimate;
    int candidate_count = 0;
    int nm_round_count = 0;
    bool decode_failed = false;
    double sigma = 0.0;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// sigma = ||H||_F / sqrt(N_t M 10^(snr_db / 10)); +inf dB gives 0.
double snr_to_sigma(const CMatrix& h, double snr_db);

struct OptimalBeams {
    CVector v;   ///< unit-modulus entries
    CVector f;   ///< unit norm
    double gain = 0.0;  ///< |v^H H f|^2
    std::vector<double> history;  ///< gain after every alternating step of the winning start
};

/// Full-CSI reference beams by alternating phase alignment of |v^H H f|,
/// started from the dominant right singular vector and from the strongest
/// grid pair; the better of the two is returned.
OptimalBeams optimal_beams(const CascadeChannel& ch, const Beamspace& space);

/// Beamforming gain ratio of the grid pair at `index` relative to `opt`.
double bgr(const CascadeChannel& ch, const GridIndex& index, const OptimalBeams& opt);

/// Large-scale gain 10^(g0_db / 10) * distance^-exponent.
double pathloss(double distance_m, double exponent, double g0_db);

/// Everything a sweep point shares across its trials.
struct PointContext {
    ExperimentConfig cfg;
    std::shared_ptr<const Beamspace> space;
    std::vector<ScanPlan> plans;
};

PointContext prepare_point(const ExperimentConfig& cfg);

TrialRecord run_trial(const PointContext& ctx, std::uint64_t trial_seed, int trial_index);

/// Single trial with a fresh plan drawn from the trial seed.
TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial_seed);

struct PointResult {
    std::string sweep_var;
    double value = 0.0;
    int trials = 0;
    double success_rate = 0.0;
    double stderr_success = 0.0;
    double mean_bgr = 0.0;
    double stderr_bgr = 0.0;
    std::uint64_t seed = 0;
    std::vector<TrialRecord> records;
};

/// Per-trial seed; depends only on the master seed and the trial counter.
std::uint64_t trial_seed(std::uint64_t master, int trial_index);

/// Worker count from IRSBEAM_THREADS, else hardware concurrency.
int worker_threads();

/// Runs all trials of one point (in parallel) and aggregates them.
PointResult run_point(const ExperimentConfig& cfg, const std::string& sweep_var, double value,
                      int threads = 0);

/// Configuration of every point on the given axis.
std::vector<std::pair<double, ExperimentConfig>> sweep_points(const ExperimentConfig& cfg,
                                                              SweepAxis axis);

std::vector<PointResult> sweep(const ExperimentConfig& cfg, SweepAxis axis, int threads = 0);

inline constexpr const char* kCsvHeader =
    "sweep_var,value,trials,success_rate,stderr,mean_bgr,bgr_stderr,seed";

void write_csv_row(std::ostream& os, const PointResult& r);

/// Opens `path` for writing (truncating it); throws IoError when that fails.
std::ofstream open_output(const std::string& path);

/// Runs the sweep and writes the CSV table to `path`. The file is opened
/// before any trial runs, so an unwritable path fails fast. Rows are flushed
/// as points finish; `progress`, when given, gets one line per point.
std::vector<PointResult> sweep_to_csv(const ExperimentConfig& cfg, SweepAxis axis,
                                      const std::string& path, int threads = 0,
                                      std::ostream* progress = nullptr);

} // namespace irsbeam
