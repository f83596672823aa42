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

#include "hbf/linklevel.hpp"
#include "hbf/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hbf
{
    std::vector<cdouble> qpsk_modulate(const std::vector<std::uint8_t> &bits)
    {
        if (bits.size() % 2 != 0)
            throw std::invalid_argument("qpsk_modulate: odd number of bits");
        const double a = 1.0 / std::sqrt(2.0);
        std::vector<cdouble> out(bits.size() / 2);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = {a * (1.0 - 2.0 * (bits[2 * i] & 1)), a * (1.0 - 2.0 * (bits[2 * i + 1] & 1))};
        return out;
    }

    std::vector<std::uint8_t> qpsk_demodulate(const std::vector<cdouble> &symbols)
    {
        std::vector<std::uint8_t> bits(2 * symbols.size());
        for (std::size_t i = 0; i < symbols.size(); ++i)
        {
            bits[2 * i] = symbols[i].real() < 0.0 ? 1 : 0;
            bits[2 * i + 1] = symbols[i].imag() < 0.0 ? 1 : 0;
        }
        return bits;
    }

    BerResult simulate_ber(const ComplexMatrix &h, const HybridWeights &w, const SystemConfig &sys,
                           const BerConfig &cfg)
    {
        const ComplexMatrix v = w.precoder();
        const ComplexMatrix comb = w.combiner();
        if (v.rows() != h.cols() || comb.rows() != h.rows() || v.cols() != comb.cols())
            throw std::invalid_argument("simulate_ber: weight shapes do not match the channel");
        const int n_sym = cfg.resolved_symbols(sys);
        if (n_sym < 1 || cfg.block_symbols < 1)
            throw std::invalid_argument("simulate_ber: symbol counts must be positive");

        const Eigen::Index ns = v.cols();
        const ComplexMatrix g = comb.adjoint() * h * v;
        const ComplexMatrix wh = comb.adjoint();

        BerResult res;
        res.bits = 2ull * static_cast<std::uint64_t>(ns) * static_cast<std::uint64_t>(n_sym);
        std::vector<bool> outage(static_cast<std::size_t>(ns), false);
        for (Eigen::Index k = 0; k < ns; ++k)
            if (g(k, k) == cdouble{0.0, 0.0})
            {
                outage[static_cast<std::size_t>(k)] = true;
                ++res.outage_streams;
                res.bit_errors += static_cast<std::uint64_t>(n_sym); // half of 2 * n_sym bits
            }

        Rng rng(cfg.seed);
        std::bernoulli_distribution coin(0.5);
        const double a = 1.0 / std::sqrt(2.0);

        for (int done = 0; done < n_sym; done += cfg.block_symbols)
        {
            const int block = std::min(cfg.block_symbols, n_sym - done);
            Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> bits(2 * ns, block);
            ComplexMatrix x(ns, block);
            for (int t = 0; t < block; ++t)
                for (Eigen::Index k = 0; k < ns; ++k)
                {
                    const std::uint8_t b0 = coin(rng) ? 1 : 0;
                    const std::uint8_t b1 = coin(rng) ? 1 : 0;
                    bits(2 * k, t) = b0;
                    bits(2 * k + 1, t) = b1;
                    x(k, t) = {a * (1.0 - 2.0 * b0), a * (1.0 - 2.0 * b1)};
                }
            const ComplexMatrix noise = complex_gaussian_matrix(rng, h.rows(), block, sys.noise_variance);
            const ComplexMatrix y = g * x + wh * noise;

            for (Eigen::Index k = 0; k < ns; ++k)
            {
                if (outage[static_cast<std::size_t>(k)])
                    continue;
                const cdouble gk = g(k, k);
                for (int t = 0; t < block; ++t)
                {
                    const cdouble z = y(k, t) / gk;
                    res.bit_errors += static_cast<std::uint64_t>((z.real() < 0.0) != (bits(2 * k, t) == 1));
                    res.bit_errors += static_cast<std::uint64_t>((z.imag() < 0.0) != (bits(2 * k + 1, t) == 1));
                }
            }
        }
        return res;
    }
} // namespace hbf
