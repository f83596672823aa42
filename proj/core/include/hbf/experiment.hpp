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

#ifndef HBF_EXPERIMENT_HPP
#define HBF_EXPERIMENT_HPP

#include "hbf/agent.hpp"
#include "hbf/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hbf
{
    struct RunOptions
    {
        std::uint64_t seed = 1;
        int threads = 1;
    };

    // One design produced by an algorithm for one channel realisation.
    struct Design
    {
        HybridWeights weights;
        double mo_ms = 0.0;      // precodernet only
        double agent_ms = 0.0;   // precodernet only
        double total_ms = 0.0;
        int iterations = 0;      // learning iterations actually run
        std::vector<double> update_iteration_ms; // per-iteration wall time of iterations that ran an update
    };

    // The PrecoderNet pipeline: MO analog precoder from the estimate, then the learning loop. Owns one agent
    // that is reused across channels unless warm_start is off.
    class PrecoderNetDesigner
    {
    public:
        PrecoderNetDesigner(const ExperimentConfig &cfg, const SystemConfig &sys, std::uint64_t seed);

        Design design(const ChannelRealization &ch, std::uint64_t channel_seed, EpisodeResult *episode = nullptr);
        Agent &agent() { return agent_; }

    private:
        ExperimentConfig cfg_;
        SystemConfig sys_;
        Agent agent_;
    };

    // MO runs against the unit-power-per-stream FD reference so its stopping threshold does not depend on SNR.
    MoResult precodernet_analog_precoder(const ComplexMatrix &h_est, const SystemConfig &sys, const MoConfig &mo,
                                         std::uint64_t seed);

    Design design_omp(const ChannelRealization &ch, const SystemConfig &sys, const OmpOptions &opt);
    Design design_fd(const ChannelRealization &ch, const SystemConfig &sys);

    struct GridPoint
    {
        double snr_db = 0.0;
        double beta_sq = 0.0;
    };
    std::vector<GridPoint> sweep_grid(const SweepConfig &s);

    struct RateRow
    {
        std::string algorithm;
        double snr_db = 0, beta_sq = 0;
        double mean_rate = 0, std_rate = 0; // spectral efficiency on the true channel
        double mean_reward = 0;             // rate upper bound on the estimate
        int n = 0;
    };

    struct BerRow
    {
        std::string algorithm;
        double snr_db = 0, beta_sq = 0;
        double ber = 0;
        std::uint64_t bits_simulated = 0;
    };

    struct TimingRow
    {
        std::string algorithm;
        double snr_db = 0, beta_sq = 0;
        double mean_ms = 0, std_ms = 0;
        double mo_ms = 0, per_iter_ms = 0, per_iter_cv = 0, mean_iterations = 0; // precodernet only
        int n = 0;
    };

    std::vector<RateRow> run_rate_sweep(const ExperimentConfig &cfg, const RunOptions &opt);
    std::vector<BerRow> run_ber_sweep(const ExperimentConfig &cfg, const RunOptions &opt);
    std::vector<TimingRow> run_timing(const ExperimentConfig &cfg, const RunOptions &opt);

    struct TrainOutcome
    {
        EpisodeResult episode;
        double rate_true = 0.0; // spectral efficiency of the best weights on H
        double fd_rate = 0.0;   // FD-SVD on H~ evaluated on H
        double omp_rate = 0.0;
        double mo_final_objective = 0.0;
    };

    // Single channel (first grid point, first channel), with the reward trace.
    TrainOutcome run_train(const ExperimentConfig &cfg, const RunOptions &opt, Agent *agent_out = nullptr);

    // CSV writers. First line: "# hbf <kind> config_hash=0x... seed=N", then the column header.
    void write_rate_csv(std::ostream &os, const std::vector<RateRow> &rows, const ExperimentConfig &cfg,
                        std::uint64_t seed);
    void write_ber_csv(std::ostream &os, const std::vector<BerRow> &rows, const ExperimentConfig &cfg,
                       std::uint64_t seed);
    void write_timing_csv(std::ostream &os, const std::vector<TimingRow> &rows, const ExperimentConfig &cfg,
                          std::uint64_t seed);

    // Quick invariant checks; one PASS/FAIL line per check. Returns true when all pass.
    bool run_selftest(std::ostream &os, std::uint64_t seed);
} // namespace hbf

#endif
