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
#include "hbf/baselines.hpp"
#include "hbf/linklevel.hpp"
#include "hbf/manifold.hpp"
#include "hbf/metrics.hpp"
#include "hbf/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace hbf
{
    namespace
    {
        enum SeedStream : std::uint64_t
        {
            channel_stream = 1,
            mo_stream = 2,
            agent_stream = 3,
            agent_reset_stream = 4,
            ber_stream = 5,
        };

        using Clock = std::chrono::steady_clock;

        double ms_since(Clock::time_point t0)
        {
            return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        }

        // Runs body(i) for i in [0, n) on up to `threads` workers. Results must be written by index.
        template <typename F>
        void parallel_for(std::size_t n, int threads, F &&body)
        {
            const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
            if (workers <= 1)
            {
                for (std::size_t i = 0; i < n; ++i)
                    body(i);
                return;
            }
            std::atomic<std::size_t> next{0};
            std::exception_ptr failure;
            std::mutex failure_mutex;
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w)
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < n; i = next++)
                    {
                        try
                        {
                            body(i);
                        }
                        catch (...)
                        {
                            std::lock_guard lock(failure_mutex);
                            if (!failure)
                                failure = std::current_exception();
                        }
                    }
                });
            for (auto &t : pool)
                t.join();
            if (failure)
                std::rethrow_exception(failure);
        }

        double mean_of(const std::vector<double> &v)
        {
            return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        }

        double std_of(const std::vector<double> &v)
        {
            if (v.size() < 2)
                return 0.0;
            const double m = mean_of(v);
            double acc = 0.0;
            for (double x : v)
                acc += (x - m) * (x - m);
            return std::sqrt(acc / static_cast<double>(v.size() - 1));
        }

        SystemConfig grid_system(const ExperimentConfig &cfg, const GridPoint &g)
        {
            return cfg.system.with_snr_db(g.snr_db).with_beta_sq(g.beta_sq);
        }

        ChannelRealization grid_channel(const ExperimentConfig &cfg, const SystemConfig &sys, std::uint64_t master,
                                        std::size_t c)
        {
            // Same physical channel at every grid point; only the estimate changes with beta.
            return generate_channel(sys, cfg.channel, derive_seed(master, {channel_stream, c}));
        }

        void write_preamble(std::ostream &os, const char *kind, const ExperimentConfig &cfg, std::uint64_t seed)
        {
            std::ostringstream h;
            h << "0x" << std::hex << std::setw(16) << std::setfill('0') << cfg.hash();
            os << "# hbf " << kind << " config_hash=" << h.str() << " seed=" << seed << '\n';
        }
    } // namespace

    MoResult precodernet_analog_precoder(const ComplexMatrix &h_est, const SystemConfig &sys, const MoConfig &mo,
                                         std::uint64_t seed)
    {
        SystemConfig unit = sys;
        unit.transmit_power = static_cast<double>(sys.n_streams);
        return mo_analog_precoder(fd_reference_precoder(h_est, unit), sys.n_tx_rf_chains, mo, seed);
    }

    PrecoderNetDesigner::PrecoderNetDesigner(const ExperimentConfig &cfg, const SystemConfig &sys, std::uint64_t seed)
        : cfg_(cfg), sys_(sys), agent_(ActionLayout::from(sys), cfg.agent, seed)
    {
    }

    Design PrecoderNetDesigner::design(const ChannelRealization &ch, std::uint64_t channel_seed, EpisodeResult *episode)
    {
        Design d;
        const auto t0 = Clock::now();
        const MoResult mo = precodernet_analog_precoder(ch.estimated_channel, sys_, cfg_.mo, channel_seed);
        d.mo_ms = ms_since(t0);

        const auto t1 = Clock::now();
        EpisodeResult ep = train_episode(sys_, ch.estimated_channel, mo.v_rf, agent_);
        d.agent_ms = ms_since(t1);
        d.total_ms = ms_since(t0);
        d.iterations = static_cast<int>(ep.trace.size());
        for (const auto &r : ep.trace)
            if (r.updated)
                d.update_iteration_ms.push_back(r.elapsed_ms);
        d.weights = ep.best;
        if (episode)
            *episode = std::move(ep);
        return d;
    }

    Design design_omp(const ChannelRealization &ch, const SystemConfig &sys, const OmpOptions &opt)
    {
        Design d;
        const auto t0 = Clock::now();
        d.weights = omp_hybrid_beamformer(ch.estimated_channel, sys, opt).weights;
        d.total_ms = ms_since(t0);
        return d;
    }

    Design design_fd(const ChannelRealization &ch, const SystemConfig &sys)
    {
        Design d;
        const auto t0 = Clock::now();
        d.weights = fd_svd_beamformer(ch.estimated_channel, sys).as_weights();
        d.total_ms = ms_since(t0);
        return d;
    }

    std::vector<GridPoint> sweep_grid(const SweepConfig &s)
    {
        std::vector<GridPoint> g;
        for (double b : s.beta_sq)
            for (double snr : s.snr_db)
                g.push_back({snr, b});
        return g;
    }

    namespace
    {
        // Designs every configured algorithm for every channel of one grid point, in order.
        template <typename Visit>
        void run_grid_point(const ExperimentConfig &cfg, std::uint64_t master, std::size_t gi, const GridPoint &g,
                            Visit &&visit)
        {
            const SystemConfig sys = grid_system(cfg, g);
            std::optional<PrecoderNetDesigner> pnet;
            for (std::size_t c = 0; c < static_cast<std::size_t>(cfg.sweep.n_channels); ++c)
            {
                const ChannelRealization ch = grid_channel(cfg, sys, master, c);
                for (std::size_t a = 0; a < cfg.sweep.algorithms.size(); ++a)
                {
                    const std::string &alg = cfg.sweep.algorithms[a];
                    Design d;
                    if (alg == "precodernet")
                    {
                        if (!pnet)
                            pnet.emplace(cfg, sys, derive_seed(master, {agent_stream, gi}));
                        else if (!cfg.agent.warm_start)
                            pnet->agent().reset(derive_seed(master, {agent_reset_stream, gi, c}));
                        d = pnet->design(ch, derive_seed(master, {mo_stream, c}));
                    }
                    else if (alg == "omp")
                        d = design_omp(ch, sys, cfg.omp);
                    else
                        d = design_fd(ch, sys);
                    visit(sys, ch, c, a, d);
                }
            }
        }
    } // namespace

    std::vector<RateRow> run_rate_sweep(const ExperimentConfig &cfg, const RunOptions &opt)
    {
        cfg.validate();
        const auto grid = sweep_grid(cfg.sweep);
        const std::size_t n_alg = cfg.sweep.algorithms.size();
        std::vector<RateRow> rows(grid.size() * n_alg);

        parallel_for(grid.size(), opt.threads, [&](std::size_t gi) {
            std::vector<std::vector<double>> rates(n_alg), rewards(n_alg);
            run_grid_point(cfg, opt.seed, gi, grid[gi],
                           [&](const SystemConfig &sys, const ChannelRealization &ch, std::size_t, std::size_t a,
                               const Design &d) {
                               rates[a].push_back(spectral_efficiency(ch.true_channel, d.weights, sys.noise_variance));
                               rewards[a].push_back(rate_upper_bound(ch.estimated_channel, d.weights, sys));
                           });
            for (std::size_t a = 0; a < n_alg; ++a)
            {
                RateRow &r = rows[gi * n_alg + a];
                r.algorithm = cfg.sweep.algorithms[a];
                r.snr_db = grid[gi].snr_db;
                r.beta_sq = grid[gi].beta_sq;
                r.mean_rate = mean_of(rates[a]);
                r.std_rate = std_of(rates[a]);
                r.mean_reward = mean_of(rewards[a]);
                r.n = static_cast<int>(rates[a].size());
            }
        });
        return rows;
    }

    std::vector<BerRow> run_ber_sweep(const ExperimentConfig &cfg, const RunOptions &opt)
    {
        cfg.validate();
        const auto grid = sweep_grid(cfg.sweep);
        const std::size_t n_alg = cfg.sweep.algorithms.size();
        std::vector<BerRow> rows(grid.size() * n_alg);

        parallel_for(grid.size(), opt.threads, [&](std::size_t gi) {
            std::vector<std::uint64_t> errors(n_alg, 0), bits(n_alg, 0);
            run_grid_point(cfg, opt.seed, gi, grid[gi],
                           [&](const SystemConfig &sys, const ChannelRealization &ch, std::size_t c, std::size_t a,
                               const Design &d) {
                               BerConfig bc = cfg.ber;
                               bc.seed = derive_seed(opt.seed, {ber_stream, gi, c});
                               const BerResult br = simulate_ber(ch.true_channel, d.weights, sys, bc);
                               errors[a] += br.bit_errors;
                               bits[a] += br.bits;
                           });
            for (std::size_t a = 0; a < n_alg; ++a)
            {
                BerRow &r = rows[gi * n_alg + a];
                r.algorithm = cfg.sweep.algorithms[a];
                r.snr_db = grid[gi].snr_db;
                r.beta_sq = grid[gi].beta_sq;
                r.bits_simulated = bits[a];
                r.ber = bits[a] ? static_cast<double>(errors[a]) / static_cast<double>(bits[a]) : 0.0;
            }
        });
        return rows;
    }

    std::vector<TimingRow> run_timing(const ExperimentConfig &cfg, const RunOptions &opt)
    {
        cfg.validate();
        const auto grid = sweep_grid(cfg.sweep);
        const std::size_t n_alg = cfg.sweep.algorithms.size();
        std::vector<TimingRow> rows(grid.size() * n_alg);

        // Timing runs single-threaded regardless of --threads so measurements do not contend.
        for (std::size_t gi = 0; gi < grid.size(); ++gi)
        {
            std::vector<std::vector<double>> total(n_alg), mo(n_alg), iters(n_alg);
            std::vector<std::vector<double>> per_iter(n_alg);
            run_grid_point(cfg, opt.seed, gi, grid[gi],
                           [&](const SystemConfig &, const ChannelRealization &, std::size_t, std::size_t a,
                               const Design &d) {
                               total[a].push_back(d.total_ms);
                               mo[a].push_back(d.mo_ms);
                               iters[a].push_back(static_cast<double>(d.iterations));
                               per_iter[a].insert(per_iter[a].end(), d.update_iteration_ms.begin(),
                                                  d.update_iteration_ms.end());
                           });
            for (std::size_t a = 0; a < n_alg; ++a)
            {
                TimingRow &r = rows[gi * n_alg + a];
                r.algorithm = cfg.sweep.algorithms[a];
                r.snr_db = grid[gi].snr_db;
                r.beta_sq = grid[gi].beta_sq;
                r.mean_ms = mean_of(total[a]);
                r.std_ms = std_of(total[a]);
                r.n = static_cast<int>(total[a].size());
                if (r.algorithm == "precodernet")
                {
                    r.mo_ms = mean_of(mo[a]);
                    r.per_iter_ms = mean_of(per_iter[a]);
                    r.per_iter_cv = r.per_iter_ms > 0.0 ? std_of(per_iter[a]) / r.per_iter_ms : 0.0;
                    r.mean_iterations = mean_of(iters[a]);
                }
            }
        }
        return rows;
    }

    TrainOutcome run_train(const ExperimentConfig &cfg, const RunOptions &opt, Agent *agent_out)
    {
        cfg.validate();
        const GridPoint g = sweep_grid(cfg.sweep).front();
        const SystemConfig sys = grid_system(cfg, g);
        const ChannelRealization ch = grid_channel(cfg, sys, opt.seed, 0);

        TrainOutcome out;
        Agent agent(ActionLayout::from(sys), cfg.agent, derive_seed(opt.seed, {agent_stream, 0}));
        const MoResult mo = precodernet_analog_precoder(ch.estimated_channel, sys, cfg.mo,
                                                        derive_seed(opt.seed, {mo_stream, 0}));
        out.mo_final_objective = mo.final_objective();
        out.episode = train_episode(sys, ch.estimated_channel, mo.v_rf, agent);
        out.rate_true = spectral_efficiency(ch.true_channel, out.episode.best, sys.noise_variance);
        out.fd_rate = spectral_efficiency(ch.true_channel, design_fd(ch, sys).weights, sys.noise_variance);
        out.omp_rate = spectral_efficiency(ch.true_channel, design_omp(ch, sys, cfg.omp).weights, sys.noise_variance);
        if (agent_out)
            *agent_out = std::move(agent);
        return out;
    }

    void write_rate_csv(std::ostream &os, const std::vector<RateRow> &rows, const ExperimentConfig &cfg,
                        std::uint64_t seed)
    {
        write_preamble(os, "rate-sweep", cfg, seed);
        const auto prec = os.precision(12);
        os << "algorithm,snr_db,beta_sq,mean_rate,std_rate,n,mean_reward\n";
        for (const auto &r : rows)
            os << r.algorithm << ',' << r.snr_db << ',' << r.beta_sq << ',' << r.mean_rate << ',' << r.std_rate << ','
               << r.n << ',' << r.mean_reward << '\n';
        os.precision(prec);
    }

    void write_ber_csv(std::ostream &os, const std::vector<BerRow> &rows, const ExperimentConfig &cfg,
                       std::uint64_t seed)
    {
        write_preamble(os, "ber-sweep", cfg, seed);
        const auto prec = os.precision(12);
        os << "algorithm,snr_db,beta_sq,ber,bits_simulated\n";
        for (const auto &r : rows)
            os << r.algorithm << ',' << r.snr_db << ',' << r.beta_sq << ',' << r.ber << ',' << r.bits_simulated << '\n';
        os.precision(prec);
    }

    void write_timing_csv(std::ostream &os, const std::vector<TimingRow> &rows, const ExperimentConfig &cfg,
                          std::uint64_t seed)
    {
        write_preamble(os, "timing", cfg, seed);
        const auto prec = os.precision(6);
        os << "algorithm,snr_db,beta_sq,mean_ms,std_ms,mo_ms,per_iter_ms,per_iter_cv,mean_iterations,n\n";
        for (const auto &r : rows)
        {
            os << r.algorithm << ',' << r.snr_db << ',' << r.beta_sq << ',' << r.mean_ms << ',' << r.std_ms << ',';
            if (r.algorithm == "precodernet")
                os << r.mo_ms << ',' << r.per_iter_ms << ',' << r.per_iter_cv << ',' << r.mean_iterations;
            else
                os << ",,,";
            os << ',' << r.n << '\n';
        }
        os.precision(prec);
    }
} // namespace hbf
