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

#include "hbf/agent.hpp"
#include "hbf/channel.hpp"
#include "hbf/manifold.hpp"
#include "hbf/metrics.hpp"

#include <cmath>
#include <sstream>

using namespace hbf;

namespace
{
    RealMatrix random_matrix(Rng &rng, Eigen::Index r, Eigen::Index c)
    {
        std::normal_distribution<double> n;
        RealMatrix m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = n(rng);
        return m;
    }

    AgentConfig small_agent()
    {
        AgentConfig c;
        c.hidden = {16, 12};
        c.batch_size = 8;
        c.replay_capacity = 64;
        return c;
    }

    SystemConfig small_system()
    {
        SystemConfig s;
        s.n_tx_antennas = 8;
        s.n_rx_antennas = 4;
        s.n_tx_rf_chains = s.n_rx_rf_chains = s.n_streams = 2;
        s = s.with_snr_db(10.0);
        return s;
    }

    Transition random_transition(Rng &rng, int k)
    {
        return Transition{random_matrix(rng, k, 1), random_matrix(rng, k, 1),
                          std::normal_distribution<double>()(rng), random_matrix(rng, k, 1)};
    }

    double parameter_distance(const nn::Network &a, const nn::Network &b)
    {
        double acc = 0.0;
        for (std::size_t l = 0; l < a.depth(); ++l)
            acc += (a.layer(l).weight - b.layer(l).weight).squaredNorm() +
                   (a.layer(l).bias - b.layer(l).bias).squaredNorm();
        return std::sqrt(acc);
    }
} // namespace

TEST_CASE("vectorize the smallest state", "[agent][codec]")
{
    const ComplexMatrix v = ComplexMatrix::Constant(1, 1, {1.0, 2.0});
    const ComplexMatrix w = ComplexMatrix::Constant(1, 1, {3.0, 4.0});
    const RealVector s = vectorize_state(v, w);
    REQUIRE(s.size() == 4);
    CHECK(s(0) == 1.0);
    CHECK(s(1) == 2.0);
    CHECK(s(2) == 3.0);
    CHECK(s(3) == 4.0);

    const auto [vb, wr] = devectorize_action(s, ActionLayout{1, 1, 1, 1});
    CHECK(vb(0, 0) == cdouble(1.0, 2.0));
    CHECK(wr(0, 0) == cdouble(3.0, 4.0));
}

TEST_CASE("zero matrices give a zero state of width K", "[agent][codec]")
{
    const ActionLayout l{3, 2, 5, 3};
    const RealVector s = vectorize_state(ComplexMatrix::Zero(3, 2), ComplexMatrix::Zero(5, 3));
    CHECK(s.size() == l.width());
    CHECK(s.isZero());
}

TEST_CASE("full-size action width", "[agent][codec]")
{
    CHECK(ActionLayout::from(SystemConfig{}).width() == 456);
}

TEST_CASE("codec is column-major", "[agent][codec]")
{
    ComplexMatrix v(2, 2);
    v << cdouble(1, 0), cdouble(2, 0), cdouble(3, 0), cdouble(4, 0);
    const RealVector s = vectorize_state(v, ComplexMatrix::Zero(1, 1));
    // vec([1 2; 3 4]) = [1 3 2 4]
    CHECK(s(0) == 1.0);
    CHECK(s(1) == 3.0);
    CHECK(s(2) == 2.0);
    CHECK(s(3) == 4.0);
}

TEST_CASE("codec round-trips", "[agent][codec][property]")
{
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial)
    {
        const ActionLayout l{1 + trial % 4, 1 + trial % 3, 2 + trial % 7, 1 + trial % 5};
        const ComplexMatrix v = complex_gaussian_matrix(rng, l.n_tx_rf, l.n_streams);
        const ComplexMatrix w = complex_gaussian_matrix(rng, l.n_rx, l.n_rx_rf);
        const auto [v2, w2] = devectorize_action(vectorize_state(v, w), l);
        CHECK(v2 == v);
        CHECK(w2 == w);

        const RealVector x = random_matrix(rng, l.width(), 1);
        const auto [a, b] = devectorize_action(x, l);
        CHECK(vectorize_state(a, b) == x);
    }
    CHECK_THROWS_AS(devectorize_action(RealVector::Zero(5), ActionLayout{1, 1, 1, 1}), std::invalid_argument);
}

TEST_CASE("acting without exploration is the actor forward pass", "[agent][act]")
{
    Rng rng(2);
    const ActionLayout l{2, 2, 4, 2};
    Agent agent(l, small_agent(), 3);
    const RealVector s = random_matrix(rng, l.width(), 1);
    CHECK(agent.act(s, false) == nn::predict(agent.actor(), s));
    agent.set_exploration_variance(0.0);
    CHECK(agent.act(s, true) == nn::predict(agent.actor(), s));
}

TEST_CASE("exploration noise has the configured variance", "[agent][act][statistical]")
{
    const ActionLayout l{1, 1, 1, 1};
    Agent agent(l, small_agent(), 4);
    const RealVector s = RealVector::Zero(l.width());
    const RealVector mean = agent.act(s, false);
    const int draws = 100000;
    RealVector acc = RealVector::Zero(l.width()), acc2 = RealVector::Zero(l.width());
    for (int i = 0; i < draws; ++i)
    {
        const RealVector d = agent.act(s, true) - mean;
        acc += d;
        acc2 += d.cwiseProduct(d);
    }
    for (Eigen::Index k = 0; k < l.width(); ++k)
    {
        const double m = acc(k) / draws;
        const double var = acc2(k) / draws - m * m;
        CHECK(std::abs(var - 0.1) < 0.03 * 0.1);
    }
}

TEST_CASE("critic target examples", "[agent][target]")
{
    Rng rng(5);
    const ActionLayout l{1, 1, 2, 1};
    AgentConfig cfg = small_agent();
    cfg.discount = 0.95;
    Agent agent(l, cfg, 6);
    // Force C' to output exactly 2.
    nn::Network &ct = agent.mutable_critic_target();
    ct.mutable_layer(ct.depth() - 1).weight.setZero();
    ct.mutable_layer(ct.depth() - 1).bias(0) = 2.0;
    CHECK(agent.critic_target(1.0, random_matrix(rng, l.width(), 1)) == Catch::Approx(2.9).epsilon(1e-15));

    AgentConfig myopic = small_agent();
    myopic.discount = 1.0;
    Agent b(l, myopic, 7);
    // gamma -> 0 is outside (0, 1]; emulate it with a zero target critic.
    nn::Network &bt = b.mutable_critic_target();
    for (std::size_t i = 0; i < bt.depth(); ++i)
    {
        bt.mutable_layer(i).weight.setZero();
        bt.mutable_layer(i).bias.setZero();
    }
    CHECK(b.critic_target(0.75, random_matrix(rng, l.width(), 1)) == 0.75);
}

TEST_CASE("critic target equals hand-chained target networks", "[agent][target]")
{
    Rng rng(8);
    const ActionLayout l{2, 1, 3, 2};
    Agent agent(l, small_agent(), 9);
    // Make the targets differ from the evaluate networks.
    nn::soft_update(agent.mutable_actor_target(), nn::Network(nn::mlp_specs(l.width(), {16, 12}, l.width()), rng), 0.5);
    const RealVector s = random_matrix(rng, l.width(), 1);
    const RealVector a = nn::predict(agent.actor_target(), s);
    RealVector sa(2 * l.width());
    sa << s, a;
    const double expected = 0.3 + 0.95 * nn::predict(agent.critic_target_network(), sa)(0);
    CHECK(std::abs(agent.critic_target(0.3, s) - expected) < 1e-12);
}

TEST_CASE("critic fixed point has zero loss and gradient", "[agent][update]")
{
    Rng rng(10);
    const ActionLayout l{1, 2, 3, 1};
    Agent agent(l, small_agent(), 11);
    const RealMatrix s = random_matrix(rng, l.width(), 16);
    const RealMatrix a = random_matrix(rng, l.width(), 16);
    RealMatrix sa(2 * l.width(), 16);
    sa << s, a;
    const RealVector y = nn::predict(agent.critic(), sa).row(0).transpose();
    const CriticFit fit = agent.critic_loss_and_gradient(s, a, y);
    CHECK(fit.loss == 0.0);
    CHECK(fit.gradients.squared_norm() == 0.0);
}

TEST_CASE("actor climbs a frozen quadratic critic", "[agent][update]")
{
    // Q(s, a) = -||a||^2, so dQ/da = -2a and the optimum is a = 0.
    Rng rng(12);
    const ActionLayout l{2, 2, 3, 2};
    Agent agent(l, small_agent(), 13);
    // Bias the actor output away from zero so there is something to remove.
    nn::Network &actor = agent.mutable_actor();
    actor.mutable_layer(actor.depth() - 1).bias.setConstant(1.0);
    const RealMatrix states = random_matrix(rng, l.width(), 32);
    const RealVector before = nn::predict(agent.actor(), states).colwise().norm().transpose();
    for (int step = 0; step < 20; ++step)
        agent.policy_improvement_step(states, [](const RealMatrix &a) { return RealMatrix(-2.0 * a); });
    const RealVector after = nn::predict(agent.actor(), states).colwise().norm().transpose();
    for (Eigen::Index j = 0; j < states.cols(); ++j)
        CHECK(after(j) < before(j));
}

TEST_CASE("tau zero leaves the target networks unchanged", "[agent][update]")
{
    Rng rng(14);
    const ActionLayout l{1, 1, 2, 1};
    Agent agent(l, small_agent(), 15);
    std::vector<Transition> batch;
    for (int i = 0; i < 8; ++i)
        batch.push_back(random_transition(rng, l.width()));
    std::vector<const Transition *> ptrs;
    for (const auto &t : batch)
        ptrs.push_back(&t);
    const nn::Network at = agent.actor_target(), ct = agent.critic_target_network();
    agent.update_step(ptrs, 0.0);
    CHECK(parameter_distance(agent.actor_target(), at) == 0.0);
    CHECK(parameter_distance(agent.critic_target_network(), ct) == 0.0);
    CHECK(parameter_distance(agent.actor(), at) > 0.0);
}

TEST_CASE("target drift is bounded by tau", "[agent][update][property]")
{
    Rng rng(16);
    const ActionLayout l{1, 2, 3, 1};
    AgentConfig cfg = small_agent();
    cfg.tau = 0.05;
    Agent agent(l, cfg, 17);
    std::vector<Transition> store;
    for (int i = 0; i < 8; ++i)
        store.push_back(random_transition(rng, l.width()));
    std::vector<const Transition *> ptrs;
    for (const auto &t : store)
        ptrs.push_back(&t);
    for (int round = 0; round < 10; ++round)
    {
        const nn::Network prev_a = agent.actor_target(), prev_c = agent.critic_target_network();
        agent.update_step(ptrs);
        CHECK(parameter_distance(agent.actor_target(), prev_a) <=
              cfg.tau * parameter_distance(agent.actor(), prev_a) * (1 + 1e-12));
        CHECK(parameter_distance(agent.critic_target_network(), prev_c) <=
              cfg.tau * parameter_distance(agent.critic(), prev_c) * (1 + 1e-12));
    }
}

TEST_CASE("targets start as exact copies", "[agent]")
{
    const Agent agent(ActionLayout{2, 2, 4, 2}, small_agent(), 18);
    CHECK(parameter_distance(agent.actor(), agent.actor_target()) == 0.0);
    CHECK(parameter_distance(agent.critic(), agent.critic_target_network()) == 0.0);
    CHECK(agent.critic().input_width() == 2 * agent.width());
    CHECK(agent.critic().output_width() == 1);
}

TEST_CASE("replay buffer evicts the oldest transitions", "[agent][replay][property]")
{
    Rng rng(19);
    for (std::size_t cap : {1u, 3u, 10u})
    {
        ReplayBuffer buf(cap);
        for (int k = 0; k < 25; ++k)
        {
            Transition t{RealVector::Zero(1), RealVector::Zero(1), static_cast<double>(k), RealVector::Zero(1)};
            buf.push(std::move(t));
            CHECK(buf.size() <= cap);
        }
        // 25 insertions into capacity cap: the oldest 25 - cap are gone.
        CHECK(buf.size() == cap);
        CHECK(buf.total_inserted() == 25u);
        for (std::size_t i = 0; i < cap; ++i)
            CHECK(buf.at(i).reward == static_cast<double>(25 - cap + i));
        for (const Transition *t : buf.sample(100, rng))
            CHECK(t->reward >= static_cast<double>(25 - cap));
    }
    ReplayBuffer empty(4);
    CHECK_THROWS(empty.sample(1, rng));
    CHECK_THROWS(ReplayBuffer(0));
}

TEST_CASE("agent config validation", "[agent]")
{
    AgentConfig c;
    c.batch_size = 10;
    c.replay_capacity = 5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = AgentConfig{};
    c.tau = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = AgentConfig{};
    c.discount = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK_NOTHROW(AgentConfig{}.validate());
}

TEST_CASE("action projection realises the constraints", "[agent][projection]")
{
    Rng rng(20);
    const SystemConfig sys = small_system();
    const ActionLayout l = ActionLayout::from(sys);
    const ComplexMatrix v_rf = random_phase_matrix(rng, sys.n_tx_antennas, sys.n_tx_rf_chains);
    const ActionProjection proj(l, v_rf, sys.transmit_power);
    const RealMatrix raw = random_matrix(rng, l.width(), 5);
    const RealMatrix out = proj.apply(raw);
    for (Eigen::Index j = 0; j < raw.cols(); ++j)
    {
        const auto [v_bb, w_rf] = devectorize_action(out.col(j), l);
        CHECK(std::abs((v_rf * v_bb).squaredNorm() - sys.transmit_power) < 1e-12 * sys.transmit_power);
        CHECK(unit_modulus_error(w_rf) < 1e-15);
        // Same map as the episode uses.
        const auto [rv, rw] = devectorize_action(raw.col(j), l);
        CHECK((v_bb - project_power(v_rf, rv, sys.transmit_power)).norm() < 1e-14);
        CHECK((w_rf - project_unit_modulus(rw)).norm() < 1e-15);
    }
}

TEST_CASE("action projection pullback matches finite differences", "[agent][projection]")
{
    Rng rng(21);
    const SystemConfig sys = small_system();
    const ActionLayout l = ActionLayout::from(sys);
    const ActionProjection proj(l, random_phase_matrix(rng, sys.n_tx_antennas, sys.n_tx_rf_chains),
                                sys.transmit_power);
    const RealMatrix raw = random_matrix(rng, l.width(), 1);
    const RealMatrix g = random_matrix(rng, l.width(), 1);
    const RealMatrix analytic = proj.pullback(raw, g);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < raw.size(); ++i)
    {
        RealMatrix up = raw, down = raw;
        up(i) += h;
        down(i) -= h;
        const double numeric = ((proj.apply(up) - proj.apply(down)).array() * g.array()).sum() / (2 * h);
        CHECK(std::abs(analytic(i) - numeric) < 1e-7 * std::max(1.0, std::abs(numeric)));
    }
}

namespace
{
    struct EpisodeFixture
    {
        SystemConfig sys = small_system();
        ChannelRealization ch = generate_channel(sys, ChannelConfig{}, 31);
        ComplexMatrix v_rf =
            mo_analog_precoder(fd_reference_precoder(ch.estimated_channel, sys), sys.n_tx_rf_chains, MoConfig{}, 32).v_rf;
    };
} // namespace

TEST_CASE("a one-iteration episode stores one transition and does not update", "[agent][episode]")
{
    EpisodeFixture f;
    Agent agent(ActionLayout::from(f.sys), small_agent(), 33);
    EpisodeOptions opt;
    opt.iterations = 1;
    const EpisodeResult r = train_episode(f.sys, f.ch.estimated_channel, f.v_rf, agent, opt);
    CHECK(agent.replay().size() == 1);
    REQUIRE(r.trace.size() == 1);
    CHECK_FALSE(r.trace[0].updated);
    CHECK(std::isnan(r.trace[0].critic_loss));
}

TEST_CASE("every logged reward is the bound of its logged weights", "[agent][episode][property]")
{
    EpisodeFixture f;
    AgentConfig cfg = small_agent();
    cfg.patience = 0;
    Agent agent(ActionLayout::from(f.sys), cfg, 34);
    EpisodeOptions opt;
    opt.iterations = 40;
    opt.record_weights = true;
    const EpisodeResult r = train_episode(f.sys, f.ch.estimated_channel, f.v_rf, agent, opt);
    REQUIRE(r.weights.size() == r.trace.size());
    for (std::size_t i = 0; i < r.trace.size(); ++i)
    {
        const HybridWeights &w = r.weights[i];
        CHECK(std::abs(r.trace[i].reward - rate_upper_bound(f.ch.estimated_channel, w, f.sys)) < 1e-12);
        CHECK(unit_modulus_error(w.w_rf) < 1e-12);
        CHECK(std::abs(w.transmit_power() - f.sys.transmit_power) < 1e-12 * f.sys.transmit_power);
        CHECK(w.v_rf == f.v_rf);
    }
    // Updates begin once the buffer holds a minibatch.
    CHECK_FALSE(r.trace[cfg.batch_size - 2].updated);
    CHECK(r.trace[cfg.batch_size - 1].updated);
    // The next state is the realised action of the previous step.
    const Transition &last = agent.replay().at(agent.replay().size() - 1);
    CHECK(last.action == last.next_state);
    CHECK(last.action == vectorize_state(r.weights.back().v_bb, r.weights.back().w_rf));
    CHECK(r.best_reward >= r.initial_reward);
}

TEST_CASE("episodes are reproducible from the seed", "[agent][episode][property]")
{
    EpisodeFixture f;
    AgentConfig cfg = small_agent();
    EpisodeOptions opt;
    opt.iterations = 30;
    for (double noise : {0.0, 0.1})
    {
        cfg.exploration_variance = noise;
        Agent a(ActionLayout::from(f.sys), cfg, 35), b(ActionLayout::from(f.sys), cfg, 35);
        const EpisodeResult ra = train_episode(f.sys, f.ch.estimated_channel, f.v_rf, a, opt);
        const EpisodeResult rb = train_episode(f.sys, f.ch.estimated_channel, f.v_rf, b, opt);
        REQUIRE(ra.trace.size() == rb.trace.size());
        for (std::size_t i = 0; i < ra.trace.size(); ++i)
            CHECK(ra.trace[i].reward == rb.trace[i].reward);
    }
}

TEST_CASE("patience stops a stalled episode", "[agent][episode]")
{
    EpisodeFixture f;
    AgentConfig cfg = small_agent();
    cfg.patience = 5;
    cfg.exploration_variance = 0.0;
    cfg.batch_size = cfg.replay_capacity; // never updates, so the action sequence settles quickly
    Agent agent(ActionLayout::from(f.sys), cfg, 36);
    EpisodeOptions opt;
    opt.iterations = 200;
    const EpisodeResult r = train_episode(f.sys, f.ch.estimated_channel, f.v_rf, agent, opt);
    CHECK(static_cast<int>(r.trace.size()) < 200);
    CHECK(static_cast<int>(r.trace.size()) - r.best_iteration == cfg.patience);
}

TEST_CASE("agent checkpoint round-trips", "[agent][io]")
{
    Rng rng(37);
    const ActionLayout l{2, 1, 3, 2};
    AgentConfig cfg = small_agent();
    cfg.discount = 0.9;
    Agent agent(l, cfg, 38);
    std::vector<Transition> store;
    for (int i = 0; i < 8; ++i)
        store.push_back(random_transition(rng, l.width()));
    std::vector<const Transition *> ptrs;
    for (const auto &t : store)
        ptrs.push_back(&t);
    agent.update_step(ptrs);

    std::stringstream ss;
    agent.save(ss);
    const Agent back = Agent::load(ss, 1);
    CHECK(back.layout() == l);
    CHECK(back.config().discount == 0.9);
    CHECK(back.config().hidden == cfg.hidden);
    CHECK(parameter_distance(back.actor(), agent.actor()) == 0.0);
    CHECK(parameter_distance(back.actor_target(), agent.actor_target()) == 0.0);
    CHECK(parameter_distance(back.critic(), agent.critic()) == 0.0);
    CHECK(parameter_distance(back.critic_target_network(), agent.critic_target_network()) == 0.0);

    std::stringstream bad("HBFXXX");
    CHECK_THROWS(Agent::load(bad, 1));
}

TEST_CASE("reset gives a cold agent", "[agent]")
{
    Rng rng(39);
    const ActionLayout l{1, 1, 2, 1};
    Agent agent(l, small_agent(), 40);
    const nn::Network first = agent.actor();
    agent.replay().push(random_transition(rng, l.width()));
    agent.set_current_state(RealVector::Zero(l.width()));
    agent.reset(40);
    CHECK(agent.replay().size() == 0);
    CHECK_FALSE(agent.current_state().has_value());
    CHECK(parameter_distance(agent.actor(), first) == 0.0);
}
