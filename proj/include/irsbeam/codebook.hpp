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

#include <cstdint>
#include <string>
#include <vector>

namespace irsbeam {

/// Index set over the beamspace rows or columns (zero-based, ascending).
using Support = std::vector<int>;

enum class CodebookMode { IdealSparse, ConstantModulus };

std::string to_string(CodebookMode mode);
CodebookMode codebook_mode_from_string(const std::string& s);

/// One round of full-coverage scanning: the U passive-beam supports partition
/// the M beamspace rows and the V precoder supports partition the N_t
/// beamspace columns.
struct RoundEncoding {
    std::vector<Support> c_sets;  ///< U sets of size Q
    std::vector<Support> a_sets;  ///< V sets of size R
    double beta = 0.0;            ///< amplitude of the nonzeros in c_u
    double gamma = 0.0;           ///< amplitude of the nonzeros in a_v

    int u() const { return static_cast<int>(c_sets.size()); }
    int v() const { return static_cast<int>(a_sets.size()); }
};

/// Parameters of the unit-modulus log-sum beam solver.
struct SolverParams {
    int max_iters = 200;
    double tolerance = 1e-6;    ///< stop when the relative objective gain drops below this
    double initial_step = 1.0;
    int max_backtracks = 40;
};

struct SolverResult {
    CVector v;
    std::vector<double> objective;  ///< objective after each accepted iterate (entry 0: init)
    int iterations = 0;
    bool converged = false;
};

/// Physical beams of one round plus the row/column-to-bin maps the decoder
/// uses.
struct RoundBeams {
    CMatrix passive;    ///< M x U, column u is v_u
    CMatrix precoders;  ///< N_t x V, column v is f_v
    std::vector<int> row_bin;  ///< beamspace row -> u
    std::vector<int> col_bin;  ///< beamspace column -> v
    std::vector<Support> row_supports;  ///< supports used for decoding (designed or effective)
};

struct ScanPlan {
    ArrayConfig array;
    int q = 1;
    CodebookMode mode = CodebookMode::IdealSparse;
    std::uint64_t seed = 0;
    SolverParams solver;
    std::vector<RoundEncoding> rounds;
    std::vector<RoundBeams> beams;

    int l() const { return static_cast<int>(rounds.size()); }
    int u() const { return array.m() / q; }
    int v() const { return array.n_t / array.r; }
    /// Total measurement budget T = U * V * L.
    long long budget() const { return static_cast<long long>(u()) * v() * l(); }
};

/// Uniform random partition of {0..n-1} into n / size sets of `size` indices
/// (Fisher-Yates shuffle, then chunk; each chunk sorted).
std::vector<Support> random_partition(int n, int size, Rng& rng);

/// Draws one round. Amplitudes are beta = sqrt(M / Q), gamma = 1 / sqrt(R).
RoundEncoding build_round(const ArrayConfig& cfg, int q, Rng& rng);

/// L independently randomised rounds with their physical beams materialised.
/// Constant-modulus beams are solved per (round, bin) support.
ScanPlan build_scan_plan(const Beamspace& space, int q, int l, CodebookMode mode, Rng& rng,
                         const SolverParams& params = {});

/// Same as above with an owned RNG seeded from `seed`; the seed is recorded.
ScanPlan build_scan_plan(const Beamspace& space, int q, int l, CodebookMode mode,
                         std::uint64_t seed, const SolverParams& params = {});

/// Objective sum_q log2(1 + |p_q^H v|^2) over the selected dictionary columns.
double log_sum_objective(const CMatrix& selected, const CVector& v);

/// Riemannian gradient ascent on the unit-modulus torus for the log-sum
/// objective over the selected columns of barD_R. Entries of the result have
/// modulus exactly one.
SolverResult optimize_constant_modulus(const CMatrix& cascade_dict, const Support& selected,
                                       const SolverParams& params = {});

/// The q largest-magnitude entries of barD_R^H v (ties: lowest index), sorted.
Support effective_support(const CMatrix& cascade_dict, const CVector& v, int q);

/// Fraction of ||barD_R^H v||^2 carried by the given support.
double support_energy_fraction(const CMatrix& cascade_dict, const CVector& v,
                               const Support& support);

/// Serialises a plan as JSON (indices zero-based). Physical beams are not
/// stored; `load_plan` rebuilds them deterministically from the supports.
std::string save_plan(const ScanPlan& plan);
ScanPlan load_plan(const std::string& json_text, const Beamspace& space);

/// Rebuilds the physical beams and bin maps of every round.
void materialize_beams(ScanPlan& plan, const Beamspace& space);

} // namespace irsbeam
