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

#ifndef HBF_CHANNEL_HPP
#define HBF_CHANNEL_HPP

#include "hbf/matrix.hpp"
#include "hbf/random.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hbf
{
    // Antenna, RF-chain and stream counts plus the link budget of one point-to-point link.
    // transmit_power and noise_variance are linear; imperfection is the CSI error level beta.
    struct SystemConfig
    {
        int n_tx_antennas = 128;
        int n_rx_antennas = 32;
        int n_tx_rf_chains = 6;
        int n_rx_rf_chains = 6;
        int n_streams = 6;
        double transmit_power = 1.0;
        double noise_variance = 1.0;
        double imperfection = 0.0;

        void validate() const; // throws std::invalid_argument
        double snr() const { return transmit_power / noise_variance; }
        double beta_sq() const { return imperfection * imperfection; }

        // Fixes noise_variance = 1 and sets transmit_power = 10^(snr_db/10).
        SystemConfig with_snr_db(double snr_db) const;
        SystemConfig with_beta_sq(double beta_sq) const;
    };

    struct ChannelConfig
    {
        int n_clusters = 8;
        int rays_per_cluster = 10;
        std::vector<double> cluster_power = std::vector<double>(8, 1.0);
        double antenna_spacing = 0.5;      // d / lambda
        double angle_spread_deg = 10.0;    // std. deviation of the Laplacian ray offsets; 0 gives point clusters

        void validate() const;
        static ChannelConfig uniform(int n_clusters, int rays_per_cluster, double power = 1.0);
    };

    struct Path
    {
        cdouble gain;
        double aoa; // radians, [-pi/2, pi/2]
        double aod;
    };

    struct PathSet
    {
        int n_clusters = 0;
        int rays_per_cluster = 0;
        std::vector<Path> paths; // cluster-major: index = i * rays_per_cluster + j
    };

    struct ChannelRealization
    {
        ComplexMatrix true_channel;      // H, n_rx x n_tx
        ComplexMatrix estimated_channel; // H~, known at the base station
        ComplexMatrix error;             // Delta H, i.i.d. CN(0, 1)
        double imperfection = 0.0;
        PathSet paths;
    };

    // Unit-norm ULA steering vector: entry k is exp(j k 2 pi d sin(angle)) / sqrt(n).
    ComplexVector array_response(int n_antennas, double spacing_over_wavelength, double angle);

    // Clustered multipath channel only (no estimate); usable for any beta.
    ComplexMatrix assemble_channel(const PathSet &paths, int n_rx, int n_tx, double spacing_over_wavelength);
    PathSet draw_paths(const ChannelConfig &ch, Rng &rng);

    // Draws H from the clustered model, then Delta H, then solves H = sqrt(1-b^2) H~ + b Delta H for H~.
    // Deterministic in seed. Throws std::invalid_argument("estimate undefined at beta=1") for beta == 1.
    ChannelRealization generate_channel(const SystemConfig &sys, const ChannelConfig &ch, std::uint64_t seed);

    // Text dump, versioned. Layout:
    //   hbf-channel 1
    //   imperfection <beta>
    //   matrix <name> <rows> <cols>      followed by <rows> lines of "re im re im ..."
    //   (true_channel, estimated_channel, error in that order)
    //   paths <n_clusters> <rays_per_cluster>   followed by one "gain_re gain_im aoa aod" line per path
    // Doubles are printed with 17 significant digits so a dump round-trips bit-exactly.
    inline constexpr int channel_dump_version = 1;
    void write_channel(std::ostream &os, const ChannelRealization &c);
    ChannelRealization read_channel(std::istream &is);
} // namespace hbf

#endif
