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

#ifndef HBF_CONFIG_HPP
#define HBF_CONFIG_HPP

#include "hbf/agent.hpp"
#include "hbf/baselines.hpp"
#include "hbf/channel.hpp"
#include "hbf/linklevel.hpp"
#include "hbf/manifold.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace hbf
{
    class ConfigError : public std::runtime_error
    {
    public:
        ConfigError(const std::string &source, int line, const std::string &message)
            : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line)
        {
        }
        int line() const { return line_; }

    private:
        int line_;
    };

    struct SweepConfig
    {
        std::vector<double> snr_db = {0.0};
        std::vector<double> beta_sq = {0.0};
        int n_channels = 10;
        std::vector<std::string> algorithms = {"precodernet", "omp", "fd"};
        std::uint64_t seed = 1;
    };

    // Everything an experiment needs. Files are flat "key = value" lines grouped under
    // [system] [channel] [agent] [mo] [omp] [ber] [sweep]; '#' starts a comment; list values are
    // comma separated. Unknown sections or keys are errors.
    struct ExperimentConfig
    {
        SystemConfig system;
        ChannelConfig channel;
        AgentConfig agent;
        MoConfig mo;
        OmpOptions omp;
        BerConfig ber;
        SweepConfig sweep;

        static ExperimentConfig parse(std::istream &is, const std::string &source = "<config>");
        static ExperimentConfig parse_string(const std::string &text);
        static ExperimentConfig load(const std::string &path);

        void validate() const;
        // Every resolved key in a fixed order; the hash is FNV-1a 64 of this text.
        std::string canonical() const;
        std::uint64_t hash() const;
    };

    std::uint64_t fnv1a64(const std::string &text);
} // namespace hbf

#endif
