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

// Micro-benchmarks of the hot kernels at the 128x32, six-RF-chain operating point.

#include "hbf/agent.hpp"
#include "hbf/baselines.hpp"
#include "hbf/channel.hpp"
#include "hbf/manifold.hpp"
#include "hbf/matrix.hpp"
#include "hbf/metrics.hpp"
#include "hbf/random.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace hbf;

namespace
{
    const SystemConfig sys = SystemConfig{}.with_snr_db(0.0);

    ChannelRealization channel() { return generate_channel(sys, ChannelConfig{}, 42); }

    void BM_Svd(benchmark::State &state)
    {
        const ComplexMatrix h = channel().estimated_channel;
        for (auto _ : state)
            benchmark::DoNotOptimize(svd(h));
    }
    BENCHMARK(BM_Svd)->Unit(benchmark::kMillisecond);

    void BM_RateBoundWithMmse(benchmark::State &state)
    {
        const ChannelRealization ch = channel();
        Rng rng(1);
        HybridWeights w;
        w.v_rf = random_phase_matrix(rng, sys.n_tx_antennas, sys.n_tx_rf_chains);
        w.v_bb = project_power(w.v_rf, complex_gaussian_matrix(rng, sys.n_tx_rf_chains, sys.n_streams),
                               sys.transmit_power);
        w.w_rf = random_phase_matrix(rng, sys.n_rx_antennas, sys.n_rx_rf_chains);
        for (auto _ : state)
        {
            w.w_bb = mmse_digital_combiner(ch.estimated_channel, w.v_rf, w.v_bb, w.w_rf, sys);
            benchmark::DoNotOptimize(rate_upper_bound(ch.estimated_channel, w, sys));
        }
    }
    BENCHMARK(BM_RateBoundWithMmse)->Unit(benchmark::kMicrosecond);

    void BM_ManifoldOptimization(benchmark::State &state)
    {
        const ComplexMatrix f = fd_reference_precoder(channel().estimated_channel, sys);
        for (auto _ : state)
            benchmark::DoNotOptimize(mo_analog_precoder(f, sys.n_tx_rf_chains, MoConfig{}, 7));
    }
    BENCHMARK(BM_ManifoldOptimization)->Unit(benchmark::kMillisecond);

    void BM_Omp(benchmark::State &state)
    {
        const ComplexMatrix h = channel().estimated_channel;
        for (auto _ : state)
            benchmark::DoNotOptimize(omp_hybrid_beamformer(h, sys));
    }
    BENCHMARK(BM_Omp)->Unit(benchmark::kMillisecond);

    void BM_AgentUpdate(benchmark::State &state)
    {
        const ActionLayout layout = ActionLayout::from(sys);
        AgentConfig cfg;
        Agent agent(layout, cfg, 3);
        Rng rng(5);
        std::normal_distribution<double> normal;
        auto random_vector = [&] {
            RealVector v(layout.width());
            for (Eigen::Index i = 0; i < v.size(); ++i)
                v[i] = normal(rng);
            return v;
        };
        for (int i = 0; i < cfg.batch_size; ++i)
            agent.replay().push({random_vector(), random_vector(), normal(rng), random_vector()});
        for (auto _ : state)
        {
            const std::vector<const Transition *> batch = agent.replay().sample(cfg.batch_size, agent.rng());
            benchmark::DoNotOptimize(agent.update_step(batch));
        }
    }
    BENCHMARK(BM_AgentUpdate)->Unit(benchmark::kMillisecond);
} // namespace

BENCHMARK_MAIN();
