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

#include "irsbeam/channel.hpp"
#include "irsbeam/decoder.hpp"

#include <cmath>
#include <string>

namespace irsbeam {

void ArrayConfig::validate() const
{
    if (n_t < 1 || m_y < 1 || m_z < 1)
        throw InvalidParameter("array sizes must be positive");
    if (r < 1 || r > n_t)
        throw InvalidParameter("RF chain count must lie in [1, n_t], got " + std::to_string(r));
    if (!(spacing_ratio > 0.0) || !std::isfinite(spacing_ratio))
        throw InvalidParameter("spacing_ratio must be positive");
}

void PathSet::validate(bool with_departure) const
{
    const size_t n = gains.size();
    if (n == 0)
        throw InvalidDimension("path set is empty");
    if (azimuth.size() != n || elevation.size() != n)
        throw InvalidDimension("angle arrays do not match path count");
    if (with_departure && departure.size() != n)
        throw InvalidDimension("departure angles do not match path count");
}

Beamspace::Beamspace(const ArrayConfig& cfg)
    : array(cfg)
{
    cfg.validate();
    bs = dft_dictionary(cfg.n_t);
    cascade = cascade_dictionary(cfg);
}

CVector steering_vector(double freq, int n)
{
    if (n < 1)
        throw InvalidDimension("steering vector length must be >= 1");
    CVector a(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k)
        a(k) = std::polar(scale, kPi * k * freq);
    return a;
}

CVector ula_response(double angle, const ArrayConfig& cfg)
{
    cfg.validate();
    return steering_vector(2.0 * cfg.spacing_ratio * std::sin(angle), cfg.n_t);
}

namespace {

CVector kron(const CVector& a, const CVector& b)
{
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

CMatrix kron(const CMatrix& a, const CMatrix& b)
{
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

} // namespace

CVector upa_response(double azimuth, double elevation, const ArrayConfig& cfg)
{
    cfg.validate();
    const double k = 2.0 * cfg.spacing_ratio;
    return kron(steering_vector(k * std::sin(azimuth) * std::sin(elevation), cfg.m_y),
                steering_vector(k * std::cos(elevation), cfg.m_z));
}

double grid_frequency(int i, int n)
{
    return -1.0 + (2.0 * (i + 1) - 1.0) / n;
}

CMatrix dft_dictionary(int n)
{
    if (n < 1)
        throw InvalidDimension("dictionary size must be >= 1");
    CMatrix d(n, n);
    for (int i = 0; i < n; ++i)
        d.col(i) = steering_vector(grid_frequency(i, n), n);
    return d;
}

CMatrix row_kronecker(const CMatrix& a, const CMatrix& b)
{
    if (a.rows() != b.rows())
        throw InvalidDimension("row-wise Kronecker needs equal row counts");
    CMatrix out(a.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.cols(); ++i)
        out.middleCols(i * b.cols(), b.cols()) = b.array().colwise() * a.col(i).array();
    return out;
}

CMatrix cascade_dictionary(const ArrayConfig& cfg)
{
    cfg.validate();
    const int m = cfg.m();
    const CMatrix d_r = kron(dft_dictionary(cfg.m_y), dft_dictionary(cfg.m_z));
    // Only the first M columns of the full M x M^2 product are needed: they
    // pair the first column of conj(D_R) with every column of D_R.
    const CVector first = d_r.col(0).conjugate() * std::sqrt(static_cast<double>(m));
    return d_r.array().colwise() * first.array();
}

PathSet sample_paths(int path_count, double rician_db, const AngleSector& sector, Rng& rng)
{
    if (path_count < 1)
        throw InvalidParameter("path_count must be >= 1");
    if (!std::isfinite(rician_db))
        throw InvalidParameter("rician factor must be finite");

    const double kappa = std::pow(10.0, rician_db / 10.0);
    double los_power = kappa / (kappa + 1.0);
    double nlos_power = 0.0;
    if (path_count == 1)
        los_power = 1.0;
    else
        nlos_power = (1.0 / (kappa + 1.0)) / (path_count - 1);

    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> az(sector.azimuth_min, sector.azimuth_max);
    std::uniform_real_distribution<double> el(sector.elevation_min, sector.elevation_max);

    PathSet ps;
    ps.gains.push_back(std::polar(std::sqrt(los_power), phase(rng)));
    for (int p = 1; p < path_count; ++p)
        ps.gains.push_back(complex_gaussian(rng, nlos_power));
    for (int p = 0; p < path_count; ++p) {
        ps.azimuth.push_back(az(rng));
        ps.elevation.push_back(el(rng));
        ps.departure.push_back(az(rng));
    }
    return ps;
}

CascadeChannel assemble_channels(const PathSet& bs_irs, const PathSet& irs_user,
                                 const Beamspace& space)
{
    bs_irs.validate(true);
    irs_user.validate(false);
    const ArrayConfig& cfg = space.array;
    const int m = cfg.m();

    CMatrix g = CMatrix::Zero(m, cfg.n_t);
    for (int p = 0; p < bs_irs.path_count(); ++p) {
        g.noalias() += bs_irs.gains[p] * upa_response(bs_irs.azimuth[p], bs_irs.elevation[p], cfg) *
                       ula_response(bs_irs.departure[p], cfg).adjoint();
    }
    g *= std::sqrt(static_cast<double>(cfg.n_t) * m / bs_irs.path_count());

    CVector h_r = CVector::Zero(m);
    for (int p = 0; p < irs_user.path_count(); ++p)
        h_r += irs_user.gains[p] * upa_response(irs_user.azimuth[p], irs_user.elevation[p], cfg);
    h_r *= std::sqrt(static_cast<double>(m) / irs_user.path_count());

    CMatrix h = h_r.conjugate().asDiagonal() * g;
    return CascadeChannel::from_matrix(std::move(h), space);
}

CascadeChannel CascadeChannel::from_matrix(CMatrix h, const Beamspace& space)
{
    if (h.rows() != space.array.m() || h.cols() != space.array.n_t)
        throw InvalidDimension("cascade channel must be M x N_t");
    CascadeChannel ch;
    ch.lambda = space.cascade.adjoint() * h * space.bs;
    ch.h = std::move(h);
    ch.strongest = argmax_magnitude(ch.lambda);
    return ch;
}

CascadeChannel CascadeChannel::from_beamspace(CMatrix lambda, const Beamspace& space)
{
    if (lambda.rows() != space.array.m() || lambda.cols() != space.array.n_t)
        throw InvalidDimension("beamspace matrix must be M x N_t");
    CascadeChannel ch;
    ch.h = space.cascade * lambda * space.bs.adjoint();
    ch.lambda = std::move(lambda);
    ch.strongest = argmax_magnitude(ch.lambda);
    return ch;
}

double measure(const CascadeChannel& ch, const CVector& v, const CVector& f, double sigma,
               Rng& rng)
{
    if (v.size() != ch.h.rows() || f.size() != ch.h.cols())
        throw InvalidDimension("beam lengths do not match the channel");
    if (!v.allFinite() || !f.allFinite() || !std::isfinite(sigma))
        throw NumericError("non-finite measurement input");
    if (sigma < 0.0)
        throw InvalidParameter("noise standard deviation must be >= 0");
    Complex z = v.dot(ch.h * f);  // dot() conjugates its first argument
    if (sigma > 0.0)
        z += complex_gaussian(rng, sigma * sigma);
    return std::abs(z);
}

GridIndex argmax_magnitude(const CMatrix& x)
{
    return argmax_value(x.cwiseAbs2());
}

GridIndex argmax_value(const RMatrix& x)
{
    if (x.size() == 0)
        throw InvalidDimension("argmax of empty matrix");
    GridIndex best;
    double best_val = x(0, 0);
    // Row-major scan so the first maximum found is the lowest (row, col).
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (x(i, j) > best_val) {
                best_val = x(i, j);
                best = {static_cast<int>(i), static_cast<int>(j)};
            }
    return best;
}

AlignmentEstimate exhaustive_search(const CascadeChannel& ch, double sigma, Rng& rng)
{
    if (sigma < 0.0 || !std::isfinite(sigma))
        throw InvalidParameter("noise standard deviation must be finite and >= 0");
    // With v = sqrt(M) barD_R(:, i) and f = D(:, j) the noiseless sample is
    // exactly sqrt(M) * lambda(i, j), so the grid is measured in beamspace.
    const double scale = std::sqrt(static_cast<double>(ch.lambda.rows()));
    RMatrix y(ch.lambda.rows(), ch.lambda.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            Complex z = scale * ch.lambda(i, j);
            if (sigma > 0.0)
                z += complex_gaussian(rng, sigma * sigma);
            y(i, j) = std::abs(z);
        }
    AlignmentEstimate est;
    est.index = argmax_value(y);
    est.candidate_count = static_cast<int>(y.size());
    return est;
}

} // namespace irsbeam
