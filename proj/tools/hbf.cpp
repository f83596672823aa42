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

// hbf: command-line front-end for the hybrid beamforming experiments.
//
//   hbf rate-sweep --config exp.cfg [--seed N] [--threads N] [--out rates.csv]
//   hbf ber-sweep  --config exp.cfg ...
//   hbf timing     --config exp.cfg ...
//   hbf train      --config exp.cfg [--out trace.csv] [--checkpoint agent.bin]
//   hbf selftest   [--seed N]

#include "hbf/config.hpp"
#include "hbf/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace
{
    struct Common
    {
        std::string config_path;
        std::optional<std::uint64_t> seed;
        int threads = 1;
        std::string out;
    };

    void add_common(CLI::App *cmd, Common &c, bool needs_config = true)
    {
        auto *opt = cmd->add_option("--config", c.config_path, "Experiment configuration file");
        if (needs_config)
            opt->required()->check(CLI::ExistingFile);
        cmd->add_option("--seed", c.seed, "Master seed (overrides [sweep] seed)");
        cmd->add_option("--threads", c.threads, "Worker thread cap")->check(CLI::PositiveNumber);
        cmd->add_option("--out", c.out, "Output CSV path (default: stdout)");
    }

    hbf::ExperimentConfig load(const Common &c)
    {
        hbf::ExperimentConfig cfg = hbf::ExperimentConfig::load(c.config_path);
        if (c.seed)
            cfg.sweep.seed = *c.seed;
        return cfg;
    }

    template <typename Write>
    void emit(const Common &c, Write &&write)
    {
        if (c.out.empty())
        {
            write(std::cout);
            return;
        }
        std::ofstream f(c.out, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot open output file " + c.out);
        write(f);
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Hybrid beamforming laboratory: rate/BER sweeps, timing and agent training"};
    app.require_subcommand(1);

    Common rate, ber, timing, train, self;
    std::string checkpoint;

    auto *rate_cmd = app.add_subcommand("rate-sweep", "Spectral efficiency over the SNR / beta^2 grid");
    add_common(rate_cmd, rate);
    auto *ber_cmd = app.add_subcommand("ber-sweep", "QPSK bit error rate over the SNR / beta^2 grid");
    add_common(ber_cmd, ber);
    auto *timing_cmd = app.add_subcommand("timing", "Wall-clock time per algorithm");
    add_common(timing_cmd, timing);
    auto *train_cmd = app.add_subcommand("train", "Single learning run with reward-trace dump");
    add_common(train_cmd, train);
    train_cmd->add_option("--checkpoint", checkpoint, "Write the trained agent to this file");
    auto *self_cmd = app.add_subcommand("selftest", "Run the quick invariant suite");
    add_common(self_cmd, self, false);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*rate_cmd)
        {
            const auto cfg = load(rate);
            const hbf::RunOptions opt{cfg.sweep.seed, rate.threads};
            const auto rows = hbf::run_rate_sweep(cfg, opt);
            emit(rate, [&](std::ostream &os) { hbf::write_rate_csv(os, rows, cfg, opt.seed); });
        }
        else if (*ber_cmd)
        {
            const auto cfg = load(ber);
            const hbf::RunOptions opt{cfg.sweep.seed, ber.threads};
            const auto rows = hbf::run_ber_sweep(cfg, opt);
            emit(ber, [&](std::ostream &os) { hbf::write_ber_csv(os, rows, cfg, opt.seed); });
        }
        else if (*timing_cmd)
        {
            const auto cfg = load(timing);
            const hbf::RunOptions opt{cfg.sweep.seed, timing.threads};
            const auto rows = hbf::run_timing(cfg, opt);
            emit(timing, [&](std::ostream &os) { hbf::write_timing_csv(os, rows, cfg, opt.seed); });
        }
        else if (*train_cmd)
        {
            const auto cfg = load(train);
            const hbf::RunOptions opt{cfg.sweep.seed, train.threads};
            hbf::Agent trained(hbf::ActionLayout::from(cfg.system), cfg.agent, opt.seed);
            const auto outcome = hbf::run_train(cfg, opt, &trained);
            emit(train, [&](std::ostream &os) { hbf::write_trace_csv(os, outcome.episode); });
            std::cerr << "best reward " << outcome.episode.best_reward << " at iteration "
                      << outcome.episode.best_iteration << " (initial " << outcome.episode.initial_reward << ")\n"
                      << "rate on true channel " << outcome.rate_true << ", fd " << outcome.fd_rate << ", omp "
                      << outcome.omp_rate << '\n';
            if (!checkpoint.empty())
            {
                std::ofstream f(checkpoint, std::ios::binary);
                if (!f)
                    throw std::runtime_error("cannot open checkpoint file " + checkpoint);
                trained.save(f);
            }
        }
        else if (*self_cmd)
        {
            const std::uint64_t seed = self.seed.value_or(1);
            return hbf::run_selftest(std::cout, seed) ? 0 : 1;
        }
    }
    catch (const hbf::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
