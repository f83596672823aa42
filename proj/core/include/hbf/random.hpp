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

#ifndef HBF_RANDOM_HPP
#define HBF_RANDOM_HPP

#include "hbf/matrix.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace hbf
{
    using Rng = std::mt19937_64;

    // splitmix64 finaliser; used to derive independent child seeds from a master seed.
    constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept
    {
        std::uint64_t s = mix_seed(master);
        for (std::uint64_t p : path)
            s = mix_seed(s ^ mix_seed(p + 0x632BE59BD9B4E019ull));
        return s;
    }

    // Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    inline cdouble complex_gaussian(Rng &rng, double variance = 1.0)
    {
        std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
        const double re = n(rng);
        const double im = n(rng);
        return {re, im};
    }

    inline ComplexMatrix complex_gaussian_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols,
                                                 double variance = 1.0)
    {
        ComplexMatrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
                m(i, j) = complex_gaussian(rng, variance);
        return m;
    }

    inline ComplexMatrix random_phase_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols)
    {
        std::uniform_real_distribution<double> u(-M_PI, M_PI);
        ComplexMatrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
                m(i, j) = std::polar(1.0, u(rng));
        return m;
    }
} // namespace hbf

#endif
