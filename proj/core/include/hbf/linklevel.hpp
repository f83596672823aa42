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

#ifndef HBF_LINKLEVEL_HPP
#define HBF_LINKLEVEL_HPP

#include "hbf/channel.hpp"
#include "hbf/metrics.hpp"

#include <cstdint>
#include <vector>

namespace hbf
{
    struct BerConfig
    {
        int symbols_per_stream = 0; // 0 -> 10 * n_tx
        std::uint64_t seed = 1;
        int block_symbols = 1024;   // symbol vectors processed per batch

        int resolved_symbols(const SystemConfig &sys) const
        {
            return symbols_per_stream > 0 ? symbols_per_stream : 10 * sys.n_tx_antennas;
        }
    };

    // Gray-mapped unit-energy QPSK: (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2).
    std::vector<cdouble> qpsk_modulate(const std::vector<std::uint8_t> &bits);
    // Minimum-distance slicing back to bits.
    std::vector<std::uint8_t> qpsk_demodulate(const std::vector<cdouble> &symbols);

    struct BerResult
    {
        std::uint64_t bit_errors = 0; // outage streams contribute half of their bits
        std::uint64_t bits = 0;
        int outage_streams = 0;

        double ber() const { return bits ? static_cast<double>(bit_errors) / static_cast<double>(bits) : 0.0; }
    };

    // QPSK over y = W^H H V x + W^H n with the true channel h, per-stream equalisation by diag(W^H H V)
    // and hard slicing. Streams whose diagonal gain is exactly zero are declared in outage.
    BerResult simulate_ber(const ComplexMatrix &h, const HybridWeights &w, const SystemConfig &sys,
                           const BerConfig &cfg);
} // namespace hbf

#endif
