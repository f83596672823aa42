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

#include "hbf/experiment.hpp"
#include "hbf/manifold.hpp"
#include "hbf/metrics.hpp"
#include "hbf/neuralnet.hpp"
#include "hbf/random.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

// A fast subset of the invariant suite, runnable from the CLI on any machine.

namespace hbf
{
    namespace
    {
        SystemConfig small_system(double snr_db, double beta)
        {
            SystemConfig s;
            s.n_tx_antennas = 8;
            s.n_rx_antennas = 4;
            s.n_tx_rf_chains = 2;
            s.n_rx_rf_chains = 2;
            s.n_streams = 2;
            s = s.with_snr_db(snr_db);
            s.imperfection = beta;
            return s;
        }

        HybridWeights random_weights(const SystemConfig &sys, const ComplexMatrix &h, Rng &rng)
        {
            HybridWeights w;
            w.v_rf = random_phase_matrix(rng, sys.n_tx_antennas, sys.n_tx_rf_chains);
            w.v_bb = project_power(w.v_rf, complex_gaussian_matrix(rng, sys.n_tx_rf_chains, sys.n_streams),
                                   sys.transmit_power);
            w.w_rf = random_phase_matrix(rng, sys.n_rx_antennas, sys.n_rx_rf_chains);
            w.w_bb = mmse_digital_combiner(h, w.v_rf, w.v_bb, w.w_rf, sys);
            return w;
        }

        bool jensen(std::uint64_t seed)
        {
            Rng rng(seed);
            for (int inst = 0; inst < 5; ++inst)
            {
                const SystemConfig sys = small_system(10.0, 0.3);
                const ComplexMatrix h_est = complex_gaussian_matrix(rng, 4, 8);
                const HybridWeights w = random_weights(sys, h_est, rng);
                const double bound = rate_upper_bound(h_est, w, sys);
                const int draws = 2000;
                double sum = 0, sum_sq = 0;
                for (int d = 0; d < draws; ++d)
                {
                    const ComplexMatrix h = std::sqrt(1 - 0.09) * h_est + 0.3 * complex_gaussian_matrix(rng, 4, 8);
                    const double r = spectral_efficiency(h, w, sys.noise_variance);
                    sum += r;
                    sum_sq += r * r;
                }
                const double mean = sum / draws;
                const double se = std::sqrt(std::max(0.0, sum_sq / draws - mean * mean) / draws);
                if (mean > bound + 3 * se)
                    return false;
            }
            return true;
        }

        bool beta_limits(std::uint64_t seed)
        {
            Rng rng(seed);
            for (int inst = 0; inst < 50; ++inst)
            {
                SystemConfig sys = small_system(5.0, 0.0);
                const ComplexMatrix h = complex_gaussian_matrix(rng, 4, 8);
                const HybridWeights w = random_weights(sys, h, rng);
                if (std::abs(rate_upper_bound(h, w, sys) - spectral_efficiency(h, w, sys.noise_variance)) > 1e-9)
                    return false;
                sys.imperfection = 1.0;
                const double closed = sys.n_streams * std::log2(1.0 + sys.snr());
                if (std::abs(rate_upper_bound(h, w, sys) - closed) > 1e-9)
                    return false;
            }
            return true;
        }

        bool projections(std::uint64_t seed)
        {
            Rng rng(seed);
            for (int inst = 0; inst < 100; ++inst)
            {
                const ComplexMatrix v_rf = project_unit_modulus(complex_gaussian_matrix(rng, 16, 4));
                const ComplexMatrix v_bb = project_power(v_rf, complex_gaussian_matrix(rng, 4, 2), 3.7);
                if (std::abs((v_rf * v_bb).squaredNorm() / 3.7 - 1.0) > 1e-12 || unit_modulus_error(v_rf) > 1e-12)
                    return false;
            }
            return true;
        }

        bool gradients(std::uint64_t seed)
        {
            Rng rng(seed);
            const nn::Network net(nn::mlp_specs(6, {10, 8}, 5), rng);
            RealMatrix x = RealMatrix::Random(6, 3);
            const RealMatrix c = RealMatrix::Random(5, 3);
            const auto cache = nn::forward(net, x);
            const auto g = nn::backward(net, cache, c);
            const double h = 1e-6;
            for (Eigen::Index i = 0; i < x.size(); ++i)
            {
                RealMatrix xp = x, xm = x;
                xp.data()[i] += h;
                xm.data()[i] -= h;
                const double fd =
                    ((nn::predict(net, xp).cwiseProduct(c)).sum() - (nn::predict(net, xm).cwiseProduct(c)).sum()) /
                    (2 * h);
                const double an = g.input_gradient.data()[i];
                if (std::abs(fd - an) > 1e-6 * std::max({std::abs(fd), std::abs(an), 1e-3}))
                    return false;
            }
            return true;
        }

        bool mmse_dominance(std::uint64_t seed)
        {
            Rng rng(seed);
            for (int inst = 0; inst < 10; ++inst)
            {
                SystemConfig sys = small_system(10.0, 0.2);
                sys.n_rx_rf_chains = 3;
                const ComplexMatrix h = complex_gaussian_matrix(rng, 4, 8);
                HybridWeights w = random_weights(sys, h, rng);
                const double best = rate_upper_bound(h, w, sys);
                const double norm = w.w_bb.norm();
                for (int k = 0; k < 20; ++k)
                {
                    HybridWeights alt = w;
                    alt.w_bb = complex_gaussian_matrix(rng, w.w_bb.rows(), w.w_bb.cols());
                    alt.w_bb *= norm / alt.w_bb.norm();
                    if (rate_upper_bound(h, alt, sys) > best + 1e-9 * std::max(1.0, best))
                        return false;
                }
            }
            return true;
        }

        bool channel_identity(std::uint64_t seed)
        {
            SystemConfig sys = small_system(0.0, 0.3);
            ChannelConfig ch = ChannelConfig::uniform(3, 4);
            const ChannelRealization c = generate_channel(sys, ch, seed);
            const ComplexMatrix back = std::sqrt(1 - 0.09) * c.estimated_channel + 0.3 * c.error;
            const ChannelRealization again = generate_channel(sys, ch, seed);
            return (back - c.true_channel).cwiseAbs().maxCoeff() < 1e-12 && again.true_channel == c.true_channel;
        }
    } // namespace

    bool run_selftest(std::ostream &os, std::uint64_t seed)
    {
        const std::pair<const char *, std::function<bool(std::uint64_t)>> checks[] = {
            {"jensen upper bound", jensen},
            {"beta=0 equality and beta=1 closed form", beta_limits},
            {"power and unit-modulus projections", projections},
            {"network input gradients vs central differences", gradients},
            {"mmse combiner dominance", mmse_dominance},
            {"channel estimate identity and determinism", channel_identity},
        };
        bool all = true;
        for (const auto &[name, fn] : checks)
        {
            bool ok = false;
            std::string detail;
            try
            {
                ok = fn(seed);
            }
            catch (const std::exception &e)
            {
                detail = std::string(" (") + e.what() + ")";
            }
            os << (ok ? "PASS " : "FAIL ") << name << detail << '\n';
            all = all && ok;
        }
        return all;
    }
} // namespace hbf
