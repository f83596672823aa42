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

#include <catch_amalgamated.hpp>

#include "hbf/baselines.hpp"
#include "hbf/linklevel.hpp"
#include "oracles.hpp"

#include <cmath>
#include <set>

using namespace hbf;

namespace
{
    SystemConfig system_of(int nt, int nr, int ns, double snr_db)
    {
        SystemConfig s;
        s.n_tx_antennas = nt;
        s.n_rx_antennas = nr;
        s.n_tx_rf_chains = s.n_rx_rf_chains = s.n_streams = ns;
        return s.with_snr_db(snr_db);
    }
} // namespace

TEST_CASE("qpsk mapping", "[linklevel][qpsk]")
{
    const double r = 1.0 / std::sqrt(2.0);
    const auto s = qpsk_modulate({0, 0, 0, 1, 1, 0, 1, 1});
    REQUIRE(s.size() == 4);
    CHECK(std::abs(s[0] - cdouble(r, r)) < 1e-15);
    CHECK(std::abs(s[1] - cdouble(r, -r)) < 1e-15);
    CHECK(std::abs(s[2] - cdouble(-r, r)) < 1e-15);
    CHECK(std::abs(s[3] - cdouble(-r, -r)) < 1e-15);
    double power = 0.0;
    std::set<std::pair<double, double>> distinct;
    for (const cdouble &x : s)
    {
        power += std::norm(x);
        distinct.insert({x.real(), x.imag()});
    }
    CHECK(power / 4.0 == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(distinct.size() == 4);
    CHECK_THROWS_AS(qpsk_modulate({0, 1, 1}), std::invalid_argument);
}

TEST_CASE("qpsk round trip without noise", "[linklevel][qpsk][property]")
{
    Rng rng(1);
    std::bernoulli_distribution coin;
    std::vector<std::uint8_t> bits(10000);
    for (auto &b : bits)
        b = coin(rng) ? 1 : 0;
    CHECK(qpsk_demodulate(qpsk_modulate(bits)) == bits);
}

TEST_CASE("negligible noise gives zero errors", "[linklevel][ber]")
{
    SystemConfig sys = system_of(16, 8, 2, 0.0);
    sys.noise_variance = 1e-12;
    const ChannelRealization ch = generate_channel(sys, ChannelConfig{}, 4);
    const HybridWeights w = fd_svd_beamformer(ch.true_channel, sys).as_weights();
    BerConfig cfg;
    cfg.symbols_per_stream = 5000;
    const BerResult r = simulate_ber(ch.true_channel, w, sys, cfg);
    CHECK(r.bit_errors == 0);
    CHECK(r.bits == 2u * 2u * 5000u);
}

TEST_CASE("no signal means guessing", "[linklevel][ber]")
{
    const SystemConfig sys = system_of(16, 8, 2, 10.0);
    const ChannelRealization ch = generate_channel(sys, ChannelConfig{}, 5);
    HybridWeights w = fd_svd_beamformer(ch.true_channel, sys).as_weights();
    w.v_bb.setZero();
    const BerResult r = simulate_ber(ch.true_channel, w, sys, BerConfig{});
    CHECK(r.outage_streams == 2);
    CHECK(r.ber() == Catch::Approx(0.5));
}

TEST_CASE("rank-one link matches the closed-form QPSK error rate", "[linklevel][ber][statistical]")
{
    Rng rng(6);
    const ComplexMatrix h = complex_gaussian_matrix(rng, 4, 1) * complex_gaussian_matrix(rng, 1, 8) / 4.0;
    const double s1 = svd(h).s(0);
    for (double snr_db : {-5.0, 0.0, 3.0})
    {
        const SystemConfig sys = system_of(8, 4, 1, snr_db);
        const HybridWeights w = fd_svd_beamformer(h, sys).as_weights();
        BerConfig cfg;
        cfg.symbols_per_stream = 200000;
        cfg.seed = 77;
        const BerResult r = simulate_ber(h, w, sys, cfg);
        const double p = oracle::q_function(std::sqrt(sys.transmit_power * s1 * s1 / sys.noise_variance));
        const double se = std::sqrt(p * (1 - p) / static_cast<double>(r.bits));
        CHECK(std::abs(r.ber() - p) < 3.0 * se);
    }
}

TEST_CASE("ber is deterministic, bounded and falls with snr", "[linklevel][ber][property]")
{
    double prev = 1.0;
    for (double snr_db : {-10.0, 0.0, 10.0})
    {
        const SystemConfig sys = system_of(16, 8, 2, snr_db);
        const ChannelRealization ch = generate_channel(sys, ChannelConfig{}, 8);
        const HybridWeights w = fd_svd_beamformer(ch.true_channel, sys).as_weights();
        BerConfig cfg;
        cfg.symbols_per_stream = 25000; // 1e5 bits
        const BerResult a = simulate_ber(ch.true_channel, w, sys, cfg);
        const BerResult b = simulate_ber(ch.true_channel, w, sys, cfg);
        CHECK(a.bit_errors == b.bit_errors);
        CHECK(a.ber() >= 0.0);
        CHECK(a.ber() <= 0.5 + 5.0 * std::sqrt(0.25 / static_cast<double>(a.bits)));
        // Strict while there are still errors to remove.
        if (prev > 0.0)
            CHECK(a.ber() < prev);
        else
            CHECK(a.ber() == 0.0);
        prev = a.ber();
    }
}

TEST_CASE("default symbol count follows the array size", "[linklevel]")
{
    CHECK(BerConfig{}.resolved_symbols(system_of(128, 32, 6, 0.0)) == 1280);
}
