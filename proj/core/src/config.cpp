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

#include "hbf/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace hbf
{
    namespace
    {
        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }

        std::vector<std::string> split_list(const std::string &v)
        {
            std::vector<std::string> out;
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ','))
            {
                item = trim(item);
                if (!item.empty())
                    out.push_back(item);
            }
            return out;
        }

        struct Parser
        {
            std::string source;
            int line = 0;

            [[noreturn]] void fail(const std::string &msg) const { throw ConfigError(source, line, msg); }

            double real(const std::string &key, const std::string &v) const
            {
                double out = 0.0;
                const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
                if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
                    fail("key '" + key + "': expected a number, got '" + v + "'");
                return out;
            }

            int integer(const std::string &key, const std::string &v) const
            {
                int out = 0;
                const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
                if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
                    fail("key '" + key + "': expected an integer, got '" + v + "'");
                return out;
            }

            std::uint64_t u64(const std::string &key, const std::string &v) const
            {
                std::uint64_t out = 0;
                const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
                if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
                    fail("key '" + key + "': expected an unsigned integer, got '" + v + "'");
                return out;
            }

            bool boolean(const std::string &key, const std::string &v) const
            {
                if (v == "true" || v == "1" || v == "yes" || v == "on")
                    return true;
                if (v == "false" || v == "0" || v == "no" || v == "off")
                    return false;
                fail("key '" + key + "': expected a boolean, got '" + v + "'");
            }

            std::vector<double> reals(const std::string &key, const std::string &v) const
            {
                std::vector<double> out;
                for (const auto &item : split_list(v))
                    out.push_back(real(key, item));
                if (out.empty())
                    fail("key '" + key + "': empty list");
                return out;
            }

            std::vector<int> integers(const std::string &key, const std::string &v) const
            {
                std::vector<int> out;
                for (const auto &item : split_list(v))
                    out.push_back(integer(key, item));
                if (out.empty())
                    fail("key '" + key + "': empty list");
                return out;
            }
        };

        using Setter = std::function<void(ExperimentConfig &, const Parser &, const std::string &key,
                                          const std::string &value)>;

        const std::map<std::string, std::map<std::string, Setter>> &schema()
        {
            static const std::map<std::string, std::map<std::string, Setter>> s = {
                {"system",
                 {
                     {"n_tx_antennas", [](auto &c, auto &p, auto &k, auto &v) { c.system.n_tx_antennas = p.integer(k, v); }},
                     {"n_rx_antennas", [](auto &c, auto &p, auto &k, auto &v) { c.system.n_rx_antennas = p.integer(k, v); }},
                     {"n_tx_rf_chains", [](auto &c, auto &p, auto &k, auto &v) { c.system.n_tx_rf_chains = p.integer(k, v); }},
                     {"n_rx_rf_chains", [](auto &c, auto &p, auto &k, auto &v) { c.system.n_rx_rf_chains = p.integer(k, v); }},
                     {"n_streams", [](auto &c, auto &p, auto &k, auto &v) { c.system.n_streams = p.integer(k, v); }},
                 }},
                {"channel",
                 {
                     {"n_clusters", [](auto &c, auto &p, auto &k, auto &v) { c.channel.n_clusters = p.integer(k, v); }},
                     {"rays_per_cluster", [](auto &c, auto &p, auto &k, auto &v) { c.channel.rays_per_cluster = p.integer(k, v); }},
                     {"cluster_power", [](auto &c, auto &p, auto &k, auto &v) { c.channel.cluster_power = p.reals(k, v); }},
                     {"antenna_spacing", [](auto &c, auto &p, auto &k, auto &v) { c.channel.antenna_spacing = p.real(k, v); }},
                     {"angle_spread_deg", [](auto &c, auto &p, auto &k, auto &v) { c.channel.angle_spread_deg = p.real(k, v); }},
                 }},
                {"agent",
                 {
                     {"discount", [](auto &c, auto &p, auto &k, auto &v) { c.agent.discount = p.real(k, v); }},
                     {"tau", [](auto &c, auto &p, auto &k, auto &v) { c.agent.tau = p.real(k, v); }},
                     {"batch_size", [](auto &c, auto &p, auto &k, auto &v) { c.agent.batch_size = p.integer(k, v); }},
                     {"replay_capacity", [](auto &c, auto &p, auto &k, auto &v) { c.agent.replay_capacity = p.integer(k, v); }},
                     {"exploration_variance", [](auto &c, auto &p, auto &k, auto &v) { c.agent.exploration_variance = p.real(k, v); }},
                     {"exploration_decay", [](auto &c, auto &p, auto &k, auto &v) { c.agent.exploration_decay = p.real(k, v); }},
                     {"iterations", [](auto &c, auto &p, auto &k, auto &v) { c.agent.iterations = p.integer(k, v); }},
                     {"patience", [](auto &c, auto &p, auto &k, auto &v) { c.agent.patience = p.integer(k, v); }},
                     {"actor_step_size", [](auto &c, auto &p, auto &k, auto &v) { c.agent.actor_step_size = p.real(k, v); }},
                     {"critic_step_size", [](auto &c, auto &p, auto &k, auto &v) { c.agent.critic_step_size = p.real(k, v); }},
                     {"hidden", [](auto &c, auto &p, auto &k, auto &v) { c.agent.hidden = p.integers(k, v); }},
                     {"warm_start", [](auto &c, auto &p, auto &k, auto &v) { c.agent.warm_start = p.boolean(k, v); }},
                 }},
                {"mo",
                 {
                     {"stop_threshold", [](auto &c, auto &p, auto &k, auto &v) { c.mo.stop_threshold = p.real(k, v); }},
                     {"max_outer_iterations", [](auto &c, auto &p, auto &k, auto &v) { c.mo.max_outer_iterations = p.integer(k, v); }},
                     {"max_inner_cg_steps", [](auto &c, auto &p, auto &k, auto &v) { c.mo.max_inner_cg_steps = p.integer(k, v); }},
                     {"escape_attempts", [](auto &c, auto &p, auto &k, auto &v) { c.mo.escape_attempts = p.integer(k, v); }},
                 }},
                {"omp",
                 {
                     {"tx_dictionary_size", [](auto &c, auto &p, auto &k, auto &v) { c.omp.tx_dictionary_size = p.integer(k, v); }},
                     {"rx_dictionary_size", [](auto &c, auto &p, auto &k, auto &v) { c.omp.rx_dictionary_size = p.integer(k, v); }},
                 }},
                {"ber",
                 {
                     {"symbols_per_stream", [](auto &c, auto &p, auto &k, auto &v) { c.ber.symbols_per_stream = p.integer(k, v); }},
                     {"block_symbols", [](auto &c, auto &p, auto &k, auto &v) { c.ber.block_symbols = p.integer(k, v); }},
                 }},
                {"sweep",
                 {
                     {"snr_db", [](auto &c, auto &p, auto &k, auto &v) { c.sweep.snr_db = p.reals(k, v); }},
                     {"beta_sq", [](auto &c, auto &p, auto &k, auto &v) { c.sweep.beta_sq = p.reals(k, v); }},
                     {"n_channels", [](auto &c, auto &p, auto &k, auto &v) { c.sweep.n_channels = p.integer(k, v); }},
                     {"algorithms", [](auto &c, auto &p, auto &, auto &v) {
                          c.sweep.algorithms = split_list(v);
                          if (c.sweep.algorithms.empty())
                              p.fail("key 'algorithms': empty list");
                      }},
                     {"seed", [](auto &c, auto &p, auto &k, auto &v) { c.sweep.seed = p.u64(k, v); }},
                 }},
            };
            return s;
        }
    } // namespace

    ExperimentConfig ExperimentConfig::parse(std::istream &is, const std::string &source)
    {
        ExperimentConfig cfg;
        Parser p{source, 0};
        std::string section;
        std::set<std::string> seen;
        bool cluster_power_given = false;
        std::string raw;
        while (std::getline(is, raw))
        {
            ++p.line;
            const auto hash = raw.find('#');
            const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (text.empty())
                continue;
            if (text.front() == '[')
            {
                if (text.back() != ']')
                    p.fail("malformed section header '" + text + "'");
                section = trim(text.substr(1, text.size() - 2));
                if (!schema().count(section))
                    p.fail("unknown section [" + section + "]");
                continue;
            }
            const auto eq = text.find('=');
            if (eq == std::string::npos)
                p.fail("expected 'key = value', got '" + text + "'");
            const std::string key = trim(text.substr(0, eq));
            const std::string value = trim(text.substr(eq + 1));
            if (section.empty())
                p.fail("key '" + key + "' appears before any [section]");
            const auto &keys = schema().at(section);
            const auto it = keys.find(key);
            if (it == keys.end())
                p.fail("unknown key '" + key + "' in [" + section + "]");
            if (!seen.insert(section + "." + key).second)
                p.fail("duplicate key '" + key + "' in [" + section + "]");
            if (value.empty())
                p.fail("key '" + key + "' has no value");
            it->second(cfg, p, key, value);
            if (section == "channel" && key == "cluster_power")
                cluster_power_given = true;
        }

        // A single cluster power (or none) is broadcast over all clusters.
        auto &cp = cfg.channel.cluster_power;
        if (!cluster_power_given)
            cp.assign(static_cast<std::size_t>(std::max(cfg.channel.n_clusters, 0)), 1.0);
        else if (cp.size() == 1)
            cp.assign(static_cast<std::size_t>(std::max(cfg.channel.n_clusters, 0)), cp.front());

        try
        {
            cfg.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(source, p.line, e.what());
        }
        return cfg;
    }

    ExperimentConfig ExperimentConfig::parse_string(const std::string &text)
    {
        std::istringstream is(text);
        return parse(is, "<string>");
    }

    ExperimentConfig ExperimentConfig::load(const std::string &path)
    {
        std::ifstream f(path);
        if (!f)
            throw ConfigError(path, 0, "cannot open file");
        return parse(f, path);
    }

    void ExperimentConfig::validate() const
    {
        system.validate();
        channel.validate();
        agent.validate();
        mo.validate();
        if (omp.tx_dictionary_size < 0 || omp.rx_dictionary_size < 0)
            throw std::invalid_argument("omp: dictionary sizes must be non-negative");
        if (ber.symbols_per_stream < 0 || ber.block_symbols < 1)
            throw std::invalid_argument("ber: symbols_per_stream must be >= 0 and block_symbols >= 1");
        if (sweep.n_channels < 1)
            throw std::invalid_argument("sweep: n_channels must be positive");
        for (double b : sweep.beta_sq)
            if (!(b >= 0.0 && b < 1.0))
                throw std::invalid_argument("sweep: beta_sq values must lie in [0, 1)");
        static const std::set<std::string> known = {"precodernet", "omp", "fd"};
        for (const auto &a : sweep.algorithms)
            if (!known.count(a))
                throw std::invalid_argument("sweep: unknown algorithm '" + a + "'");
    }

    std::string ExperimentConfig::canonical() const
    {
        std::ostringstream os;
        os.precision(17);
        auto list = [&](const auto &v) {
            for (std::size_t i = 0; i < v.size(); ++i)
                os << (i ? "," : "") << v[i];
        };
        os << "[system]\n"
           << "n_tx_antennas=" << system.n_tx_antennas << "\nn_rx_antennas=" << system.n_rx_antennas
           << "\nn_tx_rf_chains=" << system.n_tx_rf_chains << "\nn_rx_rf_chains=" << system.n_rx_rf_chains
           << "\nn_streams=" << system.n_streams << "\n[channel]\nn_clusters=" << channel.n_clusters
           << "\nrays_per_cluster=" << channel.rays_per_cluster << "\ncluster_power=";
        list(channel.cluster_power);
        os << "\nantenna_spacing=" << channel.antenna_spacing << "\nangle_spread_deg=" << channel.angle_spread_deg
           << "\n[agent]\ndiscount=" << agent.discount << "\ntau=" << agent.tau << "\nbatch_size=" << agent.batch_size
           << "\nreplay_capacity=" << agent.replay_capacity << "\nexploration_variance=" << agent.exploration_variance
           << "\nexploration_decay=" << agent.exploration_decay << "\niterations=" << agent.iterations
           << "\npatience=" << agent.patience << "\nactor_step_size=" << agent.actor_step_size
           << "\ncritic_step_size=" << agent.critic_step_size << "\nhidden=";
        list(agent.hidden);
        os << "\nwarm_start=" << (agent.warm_start ? "true" : "false") << "\n[mo]\nstop_threshold=" << mo.stop_threshold
           << "\nmax_outer_iterations=" << mo.max_outer_iterations << "\nmax_inner_cg_steps=" << mo.max_inner_cg_steps
           << "\nescape_attempts=" << mo.escape_attempts
           << "\n[omp]\ntx_dictionary_size=" << omp.tx_dictionary_size
           << "\nrx_dictionary_size=" << omp.rx_dictionary_size << "\n[ber]\nsymbols_per_stream=" << ber.symbols_per_stream
           << "\nblock_symbols=" << ber.block_symbols << "\n[sweep]\nsnr_db=";
        list(sweep.snr_db);
        os << "\nbeta_sq=";
        list(sweep.beta_sq);
        os << "\nn_channels=" << sweep.n_channels << "\nalgorithms=";
        list(sweep.algorithms);
        os << "\nseed=" << sweep.seed << "\n";
        return os.str();
    }

    std::uint64_t fnv1a64(const std::string &text)
    {
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (unsigned char c : text)
        {
            h ^= c;
            h *= 0x100000001B3ull;
        }
        return h;
    }

    std::uint64_t ExperimentConfig::hash() const
    {
        return fnv1a64(canonical());
    }
} // namespace hbf
