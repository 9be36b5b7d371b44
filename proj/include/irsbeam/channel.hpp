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

#include <memory>
#include <vector>

namespace irsbeam {

/// Antenna geometry of the BS (uniform linear array) and the IRS (uniform
/// planar array, m_y x m_z elements).
struct ArrayConfig {
    int n_t = 128;                ///< BS antennas
    int m_y = 16;                 ///< IRS elements along y
    int m_z = 16;                 ///< IRS elements along z
    int r = 4;                    ///< BS RF chains
    double spacing_ratio = 0.5;   ///< element spacing over wavelength, d / lambda

    int m() const { return m_y * m_z; }

    /// Throws InvalidParameter when any field is out of range.
    void validate() const;
};

/// Geometric multipath description of one link.
///
/// For the BS-IRS link `departure` holds the BS angle of departure of each
/// path and (`azimuth`, `elevation`) the arrival angles at the IRS. For the
/// IRS-user link `departure` is empty and (`azimuth`, `elevation`) are the
/// departure angles from the IRS. Path 0 is the line-of-sight path.
struct PathSet {
    std::vector<Complex> gains;
    std::vector<double> azimuth;
    std::vector<double> elevation;
    std::vector<double> departure;

    int path_count() const { return static_cast<int>(gains.size()); }
    void validate(bool with_departure) const;
};

/// Uniform angular sector the path angles are drawn from (radians).
struct AngleSector {
    double azimuth_min = -kPi / 3.0;
    double azimuth_max = kPi / 3.0;
    double elevation_min = kPi / 3.0;
    double elevation_max = 2.0 * kPi / 3.0;
};

/// Unitary dictionaries that map the cascade channel to its beamspace image.
/// Built once per array configuration and shared read-only.
struct Beamspace {
    ArrayConfig array;
    CMatrix bs;       ///< D_{N_t}, N_t x N_t
    CMatrix cascade;  ///< barD_R, M x M

    explicit Beamspace(const ArrayConfig& cfg);
};

/// Cascade BS-IRS-user channel H = diag(h_r^H) G together with its
/// beamspace matrix and the location of the strongest beamspace entry.
struct CascadeChannel {
    CMatrix h;        ///< M x N_t
    CMatrix lambda;   ///< barD_R^H H D_{N_t}
    GridIndex strongest;

    /// Builds the beamspace image and argmax of an existing cascade matrix.
    static CascadeChannel from_matrix(CMatrix h, const Beamspace& space);
    /// Builds H = barD_R * lambda * D^H from a prescribed beamspace matrix.
    static CascadeChannel from_beamspace(CMatrix lambda, const Beamspace& space);
};

// ---- array responses and dictionaries -------------------------------------

/// a(freq, n): k-th entry exp(j*pi*k*freq) / sqrt(n).
CVector steering_vector(double freq, int n);

/// BS ULA response for departure angle `angle`.
CVector ula_response(double angle, const ArrayConfig& cfg);

/// IRS UPA response a(2d/l sin(az) sin(el), m_y) kron a(2d/l cos(el), m_z).
CVector upa_response(double azimuth, double elevation, const ArrayConfig& cfg);

/// Grid frequency of the (zero-based) i-th DFT dictionary column.
double grid_frequency(int i, int n);

/// n x n DFT dictionary whose columns are steering vectors on the grid
/// -1 + (2i - 1)/n, i = 1..n.
CMatrix dft_dictionary(int n);

/// The M x M unitary dictionary of the cascade (IRS-side) channel: the first
/// M columns of sqrt(M) * conj(D_R) row-wise-Kronecker D_R with
/// D_R = D_{m_y} kron D_{m_z}.
CMatrix cascade_dictionary(const ArrayConfig& cfg);

/// Row-wise Kronecker product (transposed Khatri-Rao) of two matrices with
/// the same number of rows.
CMatrix row_kronecker(const CMatrix& a, const CMatrix& b);

// ---- channel generation ---------------------------------------------------

/// Draws a Rician path set. The LOS path carries power kappa / (kappa + 1)
/// with a uniform phase, the remaining path_count - 1 paths share the rest as
/// zero-mean complex Gaussians. Angles are drawn off-grid from `sector`.
PathSet sample_paths(int path_count, double rician_db, const AngleSector& sector, Rng& rng);

/// G = sqrt(N_t M / P) sum_p rho_p a_r a_t^H, h_r = sqrt(M / P') sum_p alpha_p a_r,
/// H = diag(h_r^H) G.
CascadeChannel assemble_channels(const PathSet& bs_irs, const PathSet& irs_user,
                                 const Beamspace& space);

/// Phaseless measurement |v^H H f + n| with n ~ CN(0, sigma^2).
double measure(const CascadeChannel& ch, const CVector& v, const CVector& f, double sigma,
               Rng& rng);

/// Argmax of |x(i, j)| with ties broken by lowest row, then lowest column.
GridIndex argmax_magnitude(const CMatrix& x);
GridIndex argmax_value(const RMatrix& x);

struct AlignmentEstimate;

/// Exhaustive search over all M * N_t grid beam pairs
/// (v = sqrt(M) barD_R(:, i), f = D_{N_t}(:, j)).
AlignmentEstimate exhaustive_search(const CascadeChannel& ch, double sigma, Rng& rng);

} // namespace irsbeam
