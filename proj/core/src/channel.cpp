// SPDX-License-Identifier: Apache-2.0
//
// hbf - hybrid beamforming laboratory for mmWave massive MIMO
// Copyright (C) 2026 The hbf authors
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

#include "hbf/channel.hpp"
#include "hbf/random.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hbf
{
    void SystemConfig::validate() const
    {
        if (n_tx_antennas < 1 || n_rx_antennas < 1 || n_tx_rf_chains < 1 || n_rx_rf_chains < 1 || n_streams < 1)
            throw std::invalid_argument("system: antenna, RF-chain and stream counts must be positive");
        if (n_streams > n_tx_rf_chains || n_tx_rf_chains > n_tx_antennas)
            throw std::invalid_argument("system: require n_streams <= n_tx_rf_chains <= n_tx_antennas");
        if (n_streams > n_rx_rf_chains || n_rx_rf_chains > n_rx_antennas)
            throw std::invalid_argument("system: require n_streams <= n_rx_rf_chains <= n_rx_antennas");
        if (!(transmit_power > 0.0) || !std::isfinite(transmit_power))
            throw std::invalid_argument("system: transmit_power must be positive");
        if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
            throw std::invalid_argument("system: noise_variance must be positive");
        if (!(imperfection >= 0.0 && imperfection <= 1.0))
            throw std::invalid_argument("system: imperfection must lie in [0, 1]");
    }

    SystemConfig SystemConfig::with_snr_db(double snr_db) const
    {
        SystemConfig s = *this;
        s.noise_variance = 1.0;
        s.transmit_power = std::pow(10.0, snr_db / 10.0);
        return s;
    }

    SystemConfig SystemConfig::with_beta_sq(double beta_sq) const
    {
        if (!(beta_sq >= 0.0 && beta_sq <= 1.0))
            throw std::invalid_argument("system: beta^2 must lie in [0, 1]");
        SystemConfig s = *this;
        s.imperfection = std::sqrt(beta_sq);
        return s;
    }

    void ChannelConfig::validate() const
    {
        if (n_clusters < 1 || rays_per_cluster < 1)
            throw std::invalid_argument("channel: n_clusters and rays_per_cluster must be positive");
        if (cluster_power.size() != static_cast<std::size_t>(n_clusters))
            throw std::invalid_argument("channel: cluster_power must have n_clusters entries");
        for (double p : cluster_power)
            if (!(p > 0.0))
                throw std::invalid_argument("channel: cluster powers must be positive");
        if (!(antenna_spacing > 0.0))
            throw std::invalid_argument("channel: antenna_spacing must be positive");
        if (!(angle_spread_deg >= 0.0))
            throw std::invalid_argument("channel: angle_spread_deg must be non-negative");
    }

    ChannelConfig ChannelConfig::uniform(int n_clusters, int rays_per_cluster, double power)
    {
        ChannelConfig c;
        c.n_clusters = n_clusters;
        c.rays_per_cluster = rays_per_cluster;
        c.cluster_power.assign(static_cast<std::size_t>(std::max(n_clusters, 0)), power);
        return c;
    }

    ComplexVector array_response(int n_antennas, double spacing_over_wavelength, double angle)
    {
        if (n_antennas < 1)
            throw std::invalid_argument("array_response: n_antennas must be >= 1");
        const double phase_step = 2.0 * M_PI * spacing_over_wavelength * std::sin(angle);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_antennas));
        ComplexVector a(n_antennas);
        for (int k = 0; k < n_antennas; ++k)
            a(k) = std::polar(scale, static_cast<double>(k) * phase_step);
        return a;
    }

    namespace
    {
        // Mirror into [-pi/2, pi/2].
        double fold_angle(double x)
        {
            const double half = M_PI / 2.0;
            for (int guard = 0; guard < 64 && (x > half || x < -half); ++guard)
                x = x > half ? M_PI - x : -M_PI - x;
            return std::clamp(x, -half, half);
        }

        double laplacian(Rng &rng, double stddev)
        {
            if (stddev == 0.0)
                return 0.0;
            const double b = stddev / std::sqrt(2.0);
            std::uniform_real_distribution<double> u(-0.5, 0.5);
            double x = u(rng);
            while (std::abs(x) >= 0.5)
                x = u(rng);
            return -b * (x < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(x));
        }
    } // namespace

    PathSet draw_paths(const ChannelConfig &ch, Rng &rng)
    {
        ch.validate();
        const double spread = ch.angle_spread_deg * M_PI / 180.0;
        std::uniform_real_distribution<double> centre(-M_PI / 2.0, M_PI / 2.0);

        PathSet ps;
        ps.n_clusters = ch.n_clusters;
        ps.rays_per_cluster = ch.rays_per_cluster;
        ps.paths.reserve(static_cast<std::size_t>(ch.n_clusters * ch.rays_per_cluster));
        for (int i = 0; i < ch.n_clusters; ++i)
        {
            const double aoa_c = centre(rng);
            const double aod_c = centre(rng);
            for (int j = 0; j < ch.rays_per_cluster; ++j)
            {
                Path p;
                p.aoa = fold_angle(aoa_c + laplacian(rng, spread));
                p.aod = fold_angle(aod_c + laplacian(rng, spread));
                p.gain = complex_gaussian(rng, ch.cluster_power[static_cast<std::size_t>(i)]);
                ps.paths.push_back(p);
            }
        }
        return ps;
    }

    ComplexMatrix assemble_channel(const PathSet &paths, int n_rx, int n_tx, double spacing_over_wavelength)
    {
        const double n_paths = static_cast<double>(paths.paths.size());
        if (n_paths == 0)
            throw std::invalid_argument("assemble_channel: empty path set");
        const double scale = std::sqrt(static_cast<double>(n_tx) * static_cast<double>(n_rx) / n_paths);

        ComplexMatrix h = ComplexMatrix::Zero(n_rx, n_tx);
        for (const Path &p : paths.paths)
        {
            const ComplexVector ar = array_response(n_rx, spacing_over_wavelength, p.aoa);
            const ComplexVector at = array_response(n_tx, spacing_over_wavelength, p.aod);
            h.noalias() += (p.gain * ar) * at.adjoint();
        }
        return scale * h;
    }

    ChannelRealization generate_channel(const SystemConfig &sys, const ChannelConfig &ch, std::uint64_t seed)
    {
        sys.validate();
        const double beta = sys.imperfection;
        if (beta >= 1.0)
            throw std::invalid_argument("estimate undefined at beta=1");

        Rng rng(seed);
        ChannelRealization out;
        out.imperfection = beta;
        out.paths = draw_paths(ch, rng);
        out.true_channel = assemble_channel(out.paths, sys.n_rx_antennas, sys.n_tx_antennas, ch.antenna_spacing);
        out.error = complex_gaussian_matrix(rng, sys.n_rx_antennas, sys.n_tx_antennas);
        if (beta == 0.0)
            out.estimated_channel = out.true_channel;
        else
            out.estimated_channel = (out.true_channel - beta * out.error) / std::sqrt(1.0 - beta * beta);
        return out;
    }

    namespace
    {
        void write_matrix(std::ostream &os, const char *name, const ComplexMatrix &m)
        {
            os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
            for (Eigen::Index i = 0; i < m.rows(); ++i)
            {
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                    os << (j ? " " : "") << m(i, j).real() << ' ' << m(i, j).imag();
                os << '\n';
            }
        }

        void expect_token(std::istream &is, const std::string &want)
        {
            std::string tok;
            if (!(is >> tok) || tok != want)
                throw std::runtime_error("channel dump: expected '" + want + "', found '" + tok + "'");
        }

        ComplexMatrix read_matrix(std::istream &is, const std::string &name)
        {
            expect_token(is, "matrix");
            expect_token(is, name);
            Eigen::Index rows = 0, cols = 0;
            if (!(is >> rows >> cols) || rows < 0 || cols < 0)
                throw std::runtime_error("channel dump: bad shape for " + name);
            ComplexMatrix m(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i)
                for (Eigen::Index j = 0; j < cols; ++j)
                {
                    double re = 0, im = 0;
                    if (!(is >> re >> im))
                        throw std::runtime_error("channel dump: truncated matrix " + name);
                    m(i, j) = {re, im};
                }
            return m;
        }
    } // namespace

    void write_channel(std::ostream &os, const ChannelRealization &c)
    {
        const auto flags = os.flags();
        const auto prec = os.precision();
        os << std::setprecision(17);
        os << "hbf-channel " << channel_dump_version << '\n';
        os << "imperfection " << c.imperfection << '\n';
        write_matrix(os, "true_channel", c.true_channel);
        write_matrix(os, "estimated_channel", c.estimated_channel);
        write_matrix(os, "error", c.error);
        os << "paths " << c.paths.n_clusters << ' ' << c.paths.rays_per_cluster << '\n';
        for (const Path &p : c.paths.paths)
            os << p.gain.real() << ' ' << p.gain.imag() << ' ' << p.aoa << ' ' << p.aod << '\n';
        os.flags(flags);
        os.precision(prec);
    }

    ChannelRealization read_channel(std::istream &is)
    {
        expect_token(is, "hbf-channel");
        int version = 0;
        if (!(is >> version) || version != channel_dump_version)
            throw std::runtime_error("channel dump: unsupported version " + std::to_string(version));
        ChannelRealization c;
        expect_token(is, "imperfection");
        is >> c.imperfection;
        c.true_channel = read_matrix(is, "true_channel");
        c.estimated_channel = read_matrix(is, "estimated_channel");
        c.error = read_matrix(is, "error");
        expect_token(is, "paths");
        if (!(is >> c.paths.n_clusters >> c.paths.rays_per_cluster))
            throw std::runtime_error("channel dump: bad path header");
        const auto n = static_cast<std::size_t>(c.paths.n_clusters) * static_cast<std::size_t>(c.paths.rays_per_cluster);
        c.paths.paths.resize(n);
        for (Path &p : c.paths.paths)
        {
            double gr = 0, gi = 0;
            if (!(is >> gr >> gi >> p.aoa >> p.aod))
                throw std::runtime_error("channel dump: truncated path list");
            p.gain = {gr, gi};
        }
        return c;
    }
} // namespace hbf
