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

#include "hbf/agent.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hbf
{
    void AgentConfig::validate() const
    {
        if (!(discount > 0.0 && discount <= 1.0))
            throw std::invalid_argument("agent: discount must lie in (0, 1]");
        if (!(tau > 0.0 && tau < 1.0))
            throw std::invalid_argument("agent: tau must lie in (0, 1)");
        if (batch_size < 1 || replay_capacity < 1)
            throw std::invalid_argument("agent: batch_size and replay_capacity must be positive");
        if (batch_size > replay_capacity)
            throw std::invalid_argument("agent: batch_size must not exceed replay_capacity");
        if (!(exploration_variance >= 0.0))
            throw std::invalid_argument("agent: exploration_variance must be non-negative");
        if (!(exploration_decay > 0.0 && exploration_decay <= 1.0))
            throw std::invalid_argument("agent: exploration_decay must lie in (0, 1]");
        if (iterations < 1 || patience < 0)
            throw std::invalid_argument("agent: iterations must be positive and patience non-negative");
        if (!(actor_step_size > 0.0) || !(critic_step_size > 0.0))
            throw std::invalid_argument("agent: step sizes must be positive");
        for (int h : hidden)
            if (h < 1)
                throw std::invalid_argument("agent: hidden widths must be positive");
    }

    ActionLayout ActionLayout::from(const SystemConfig &sys)
    {
        return {sys.n_tx_rf_chains, sys.n_streams, sys.n_rx_antennas, sys.n_rx_rf_chains};
    }

    RealVector vectorize_state(const ComplexMatrix &v_bb, const ComplexMatrix &w_rf)
    {
        const Eigen::Index nv = v_bb.size();
        const Eigen::Index nw = w_rf.size();
        RealVector s(2 * (nv + nw));
        // Eigen storage is column-major, so data() order is vec().
        for (Eigen::Index i = 0; i < nv; ++i)
        {
            s(i) = v_bb.data()[i].real();
            s(nv + i) = v_bb.data()[i].imag();
        }
        for (Eigen::Index i = 0; i < nw; ++i)
        {
            s(2 * nv + i) = w_rf.data()[i].real();
            s(2 * nv + nw + i) = w_rf.data()[i].imag();
        }
        return s;
    }

    std::pair<ComplexMatrix, ComplexMatrix> devectorize_action(const RealVector &a, const ActionLayout &layout)
    {
        if (a.size() != layout.width())
            throw std::invalid_argument("devectorize_action: width " + std::to_string(a.size()) + ", expected " +
                                        std::to_string(layout.width()));
        ComplexMatrix v_bb(layout.n_tx_rf, layout.n_streams);
        ComplexMatrix w_rf(layout.n_rx, layout.n_rx_rf);
        const Eigen::Index nv = v_bb.size();
        const Eigen::Index nw = w_rf.size();
        for (Eigen::Index i = 0; i < nv; ++i)
            v_bb.data()[i] = {a(i), a(nv + i)};
        for (Eigen::Index i = 0; i < nw; ++i)
            w_rf.data()[i] = {a(2 * nv + i), a(2 * nv + nw + i)};
        return {std::move(v_bb), std::move(w_rf)};
    }

    // ------------------------------------------------------------ projection

    ActionProjection::ActionProjection(const ActionLayout &layout, const ComplexMatrix &v_rf, double power)
        : layout_(layout), gram_(v_rf.adjoint() * v_rf), power_(power)
    {
        if (v_rf.cols() != layout.n_tx_rf)
            throw std::invalid_argument("action projection: V_RF has " + std::to_string(v_rf.cols()) +
                                        " columns, layout expects " + std::to_string(layout.n_tx_rf));
        if (!(power > 0.0))
            throw std::invalid_argument("action projection: power must be positive");
    }

    RealMatrix ActionProjection::apply(const RealMatrix &raw) const
    {
        if (raw.rows() != layout_.width())
            throw std::invalid_argument("action projection: width mismatch");
        RealMatrix out(raw.rows(), raw.cols());
        for (Eigen::Index j = 0; j < raw.cols(); ++j)
        {
            auto [v_bb, w_rf] = devectorize_action(raw.col(j), layout_);
            const double f = (v_bb.adjoint() * gram_ * v_bb).trace().real();
            if (!(f > 0.0))
                throw std::domain_error("degenerate precoder");
            v_bb *= std::sqrt(power_ / f);
            for (Eigen::Index i = 0; i < w_rf.size(); ++i)
            {
                const double r = std::abs(w_rf.data()[i]);
                w_rf.data()[i] = r > 0.0 ? w_rf.data()[i] / r : cdouble(1.0);
            }
            out.col(j) = vectorize_state(v_bb, w_rf);
        }
        return out;
    }

    RealMatrix ActionProjection::pullback(const RealMatrix &raw, const RealMatrix &grad) const
    {
        if (raw.rows() != layout_.width() || grad.rows() != raw.rows() || grad.cols() != raw.cols())
            throw std::invalid_argument("action projection: shape mismatch");
        RealMatrix out(raw.rows(), raw.cols());
        for (Eigen::Index j = 0; j < raw.cols(); ++j)
        {
            const auto [u, w] = devectorize_action(raw.col(j), layout_);
            auto [gu, gw] = devectorize_action(grad.col(j), layout_);
            // V_BB = c U with c = sqrt(P / f), f = tr(U^H G U):
            // J^T g = c g - (c / f) <U, g> G U, <.,.> the real inner product.
            const ComplexMatrix gram_u = gram_ * u;
            const double f = (u.adjoint() * gram_u).trace().real();
            if (!(f > 0.0))
                throw std::domain_error("degenerate precoder");
            const double c = std::sqrt(power_ / f);
            const double ug = (u.adjoint() * gu).trace().real();
            gu = c * gu - (c / f) * ug * gram_u;
            // z = w / |w|: J^T g = (g - <z, g> z) / |w|; zero entries have no defined direction.
            for (Eigen::Index i = 0; i < w.size(); ++i)
            {
                const double r = std::abs(w.data()[i]);
                if (r == 0.0)
                {
                    gw.data()[i] = 0.0;
                    continue;
                }
                const cdouble z = w.data()[i] / r;
                const cdouble g = gw.data()[i];
                const double zg = z.real() * g.real() + z.imag() * g.imag();
                gw.data()[i] = (g - zg * z) / r;
            }
            out.col(j) = vectorize_state(gu, gw);
        }
        return out;
    }

    // ---------------------------------------------------------------- replay

    ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity)
    {
        if (capacity == 0)
            throw std::invalid_argument("replay buffer: capacity must be positive");
        items_.reserve(capacity);
    }

    void ReplayBuffer::push(Transition t)
    {
        ++inserted_;
        if (items_.size() < capacity_)
        {
            items_.push_back(std::move(t));
            return;
        }
        items_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }

    void ReplayBuffer::clear()
    {
        items_.clear();
        head_ = 0;
        inserted_ = 0;
    }

    const Transition &ReplayBuffer::at(std::size_t i) const
    {
        if (i >= items_.size())
            throw std::out_of_range("replay buffer index");
        return items_[(head_ + i) % items_.size()];
    }

    std::vector<const Transition *> ReplayBuffer::sample(std::size_t n, Rng &rng) const
    {
        if (items_.empty())
            throw std::logic_error("replay buffer: cannot sample from an empty buffer");
        std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
        std::vector<const Transition *> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(&items_[pick(rng)]);
        return out;
    }

    // ----------------------------------------------------------------- agent

    Agent::Agent(const ActionLayout &layout, const AgentConfig &cfg, std::uint64_t seed)
        : layout_(layout), cfg_(cfg), rng_(seed), replay_(static_cast<std::size_t>(cfg.replay_capacity)),
          noise_variance_(cfg.exploration_variance)
    {
        cfg_.validate();
        if (layout.width() <= 0)
            throw std::invalid_argument("agent: empty action layout");
        reset(seed);
    }

    void Agent::reset(std::uint64_t seed)
    {
        rng_.seed(seed);
        const int k = layout_.width();
        actor_ = nn::Network(nn::mlp_specs(k, cfg_.hidden, k), rng_);
        critic_ = nn::Network(nn::mlp_specs(2 * k, cfg_.hidden, 1), rng_);
        actor_target_ = actor_;
        critic_target_ = critic_;
        actor_adam_ = nn::AdamState::for_network(actor_, cfg_.actor_step_size);
        critic_adam_ = nn::AdamState::for_network(critic_, cfg_.critic_step_size);
        replay_.clear();
        noise_variance_ = cfg_.exploration_variance;
        state_.reset();
    }

    RealVector Agent::act(const RealVector &state, bool explore)
    {
        if (state.size() != width())
            throw std::invalid_argument("act: state width mismatch");
        RealVector a = nn::predict(actor_, state);
        if (explore && noise_variance_ > 0.0)
        {
            std::normal_distribution<double> n(0.0, std::sqrt(noise_variance_));
            for (Eigen::Index i = 0; i < a.size(); ++i)
                a(i) += n(rng_);
        }
        return a;
    }

    RealMatrix Agent::critic_input(const RealMatrix &states, const RealMatrix &actions) const
    {
        RealMatrix x(states.rows() + actions.rows(), states.cols());
        x.topRows(states.rows()) = states;
        x.bottomRows(actions.rows()) = actions;
        return x;
    }

    double Agent::critic_target(double reward, const RealVector &next_state) const
    {
        RealVector r(1);
        r(0) = reward;
        return critic_targets(r, RealMatrix(next_state))(0);
    }

    RealVector Agent::critic_targets(const RealVector &rewards, const RealMatrix &next_states) const
    {
        RealMatrix next_actions = nn::predict(actor_target_, next_states);
        if (projection_)
            next_actions = projection_->apply(next_actions);
        const RealMatrix q_next = nn::predict(critic_target_, critic_input(next_states, next_actions));
        return rewards + cfg_.discount * q_next.row(0).transpose();
    }

    CriticFit Agent::critic_loss_and_gradient(const RealMatrix &states, const RealMatrix &actions,
                                              const RealVector &targets) const
    {
        const double n = static_cast<double>(states.cols());
        const nn::ForwardCache cache = nn::forward(critic_, critic_input(states, actions));
        CriticFit fit;
        fit.q = cache.output();
        const RealMatrix err = fit.q - targets.transpose();
        fit.loss = err.squaredNorm() / n;
        fit.gradients = nn::backward(critic_, cache, (2.0 / n) * err).params;
        return fit;
    }

    void Agent::policy_improvement_step(const RealMatrix &states,
                                        const std::function<RealMatrix(const RealMatrix &)> &action_gradient)
    {
        const double n = static_cast<double>(states.cols());
        const nn::ForwardCache cache = nn::forward(actor_, states);
        const RealMatrix dq_da = action_gradient(cache.output());
        if (dq_da.rows() != cache.output().rows() || dq_da.cols() != cache.output().cols())
            throw std::invalid_argument("policy_improvement_step: action gradient shape mismatch");
        // Descent on -mean Q.
        const nn::BackwardResult g = nn::backward(actor_, cache, (-1.0 / n) * dq_da);
        nn::adam_step(actor_, g.params, actor_adam_);
    }

    UpdateDiagnostics Agent::update_step(std::span<const Transition *const> batch)
    {
        return update_step(batch, cfg_.tau);
    }

    UpdateDiagnostics Agent::update_step(std::span<const Transition *const> batch, double tau)
    {
        if (batch.empty())
            throw std::invalid_argument("update_step: empty minibatch");
        const int k = width();
        const auto n = static_cast<Eigen::Index>(batch.size());
        RealMatrix s(k, n), a(k, n), s_next(k, n);
        RealVector r(n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const Transition &t = *batch[static_cast<std::size_t>(i)];
            s.col(i) = t.state;
            a.col(i) = t.action;
            s_next.col(i) = t.next_state;
            r(i) = t.reward;
        }

        const RealVector y = critic_targets(r, s_next);
        CriticFit fit = critic_loss_and_gradient(s, a, y);
        nn::adam_step(critic_, fit.gradients, critic_adam_);

        policy_improvement_step(s, [&](const RealMatrix &actions) {
            const RealMatrix realised = projection_ ? projection_->apply(actions) : actions;
            const nn::ForwardCache c = nn::forward(critic_, critic_input(s, realised));
            const nn::BackwardResult g = nn::backward(critic_, c, RealMatrix::Ones(1, actions.cols()));
            const RealMatrix dq = g.input_gradient.bottomRows(k);
            return projection_ ? projection_->pullback(actions, dq) : dq;
        });

        if (tau > 0.0)
        {
            nn::soft_update(actor_target_, actor_, tau);
            nn::soft_update(critic_target_, critic_, tau);
        }
        return {fit.loss, fit.q.mean()};
    }

    // ------------------------------------------------------------ checkpoint

    namespace
    {
        constexpr char agent_magic[6] = {'H', 'B', 'F', 'A', 'G', 'T'};
        constexpr std::uint32_t agent_version = 1;

        std::string config_text(const AgentConfig &c, const ActionLayout &l)
        {
            std::ostringstream os;
            os.precision(17);
            os << "discount=" << c.discount << '\n'
               << "tau=" << c.tau << '\n'
               << "batch_size=" << c.batch_size << '\n'
               << "replay_capacity=" << c.replay_capacity << '\n'
               << "exploration_variance=" << c.exploration_variance << '\n'
               << "exploration_decay=" << c.exploration_decay << '\n'
               << "iterations=" << c.iterations << '\n'
               << "patience=" << c.patience << '\n'
               << "actor_step_size=" << c.actor_step_size << '\n'
               << "critic_step_size=" << c.critic_step_size << '\n'
               << "warm_start=" << (c.warm_start ? 1 : 0) << '\n'
               << "hidden=";
            for (std::size_t i = 0; i < c.hidden.size(); ++i)
                os << (i ? "," : "") << c.hidden[i];
            os << '\n'
               << "layout=" << l.n_tx_rf << ',' << l.n_streams << ',' << l.n_rx << ',' << l.n_rx_rf << '\n';
            return os.str();
        }

        std::vector<int> int_list(const std::string &v)
        {
            std::vector<int> out;
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty())
                    out.push_back(std::stoi(item));
            return out;
        }
    } // namespace

    void Agent::save(std::ostream &os) const
    {
        os.write(agent_magic, sizeof agent_magic);
        const std::string text = config_text(cfg_, layout_);
        const auto len = static_cast<std::uint32_t>(text.size());
        os.write(reinterpret_cast<const char *>(&agent_version), sizeof agent_version);
        os.write(reinterpret_cast<const char *>(&len), sizeof len);
        os.write(text.data(), static_cast<std::streamsize>(text.size()));
        nn::write_network(os, actor_);
        nn::write_network(os, actor_target_);
        nn::write_network(os, critic_);
        nn::write_network(os, critic_target_);
        if (!os)
            throw std::runtime_error("agent checkpoint: write failed");
    }

    Agent Agent::load(std::istream &is, std::uint64_t seed)
    {
        char magic[sizeof agent_magic];
        std::uint32_t version = 0, len = 0;
        if (!is.read(magic, sizeof magic) || std::memcmp(magic, agent_magic, sizeof magic) != 0)
            throw std::runtime_error("agent checkpoint: bad magic");
        if (!is.read(reinterpret_cast<char *>(&version), sizeof version) || version != agent_version)
            throw std::runtime_error("agent checkpoint: unsupported version");
        if (!is.read(reinterpret_cast<char *>(&len), sizeof len))
            throw std::runtime_error("agent checkpoint: truncated header");
        std::string text(len, '\0');
        if (!is.read(text.data(), len))
            throw std::runtime_error("agent checkpoint: truncated config block");

        AgentConfig cfg;
        ActionLayout layout;
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line))
        {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                continue;
            const std::string key = line.substr(0, eq);
            const std::string val = line.substr(eq + 1);
            if (key == "discount") cfg.discount = std::stod(val);
            else if (key == "tau") cfg.tau = std::stod(val);
            else if (key == "batch_size") cfg.batch_size = std::stoi(val);
            else if (key == "replay_capacity") cfg.replay_capacity = std::stoi(val);
            else if (key == "exploration_variance") cfg.exploration_variance = std::stod(val);
            else if (key == "exploration_decay") cfg.exploration_decay = std::stod(val);
            else if (key == "iterations") cfg.iterations = std::stoi(val);
            else if (key == "patience") cfg.patience = std::stoi(val);
            else if (key == "actor_step_size") cfg.actor_step_size = std::stod(val);
            else if (key == "critic_step_size") cfg.critic_step_size = std::stod(val);
            else if (key == "warm_start") cfg.warm_start = val == "1";
            else if (key == "hidden") cfg.hidden = int_list(val);
            else if (key == "layout")
            {
                const auto v = int_list(val);
                if (v.size() != 4)
                    throw std::runtime_error("agent checkpoint: bad layout");
                layout = {v[0], v[1], v[2], v[3]};
            }
            else
                throw std::runtime_error("agent checkpoint: unknown key '" + key + "'");
        }

        Agent agent(layout, cfg, seed);
        agent.actor_ = nn::read_network(is);
        agent.actor_target_ = nn::read_network(is);
        agent.critic_ = nn::read_network(is);
        agent.critic_target_ = nn::read_network(is);
        if (agent.actor_.specs() != agent.actor_target_.specs() || agent.critic_.specs() != agent.critic_target_.specs() ||
            agent.actor_.input_width() != layout.width() || agent.critic_.input_width() != 2 * layout.width())
            throw std::runtime_error("agent checkpoint: network shapes do not match the layout");
        agent.actor_adam_ = nn::AdamState::for_network(agent.actor_, cfg.actor_step_size);
        agent.critic_adam_ = nn::AdamState::for_network(agent.critic_, cfg.critic_step_size);
        return agent;
    }

    // --------------------------------------------------------------- episode

    HybridWeights realize_action(const RealVector &action, const ComplexMatrix &h_est, const ComplexMatrix &v_rf,
                                 const SystemConfig &sys, const ActionLayout &layout)
    {
        auto [v_bb_raw, w_rf_raw] = devectorize_action(action, layout);
        HybridWeights w;
        w.v_rf = v_rf;
        w.w_rf = project_unit_modulus(w_rf_raw);
        w.v_bb = project_power(v_rf, v_bb_raw, sys.transmit_power);
        w.w_bb = mmse_digital_combiner(h_est, w.v_rf, w.v_bb, w.w_rf, sys);
        return w;
    }

    RealVector random_initial_state(const ComplexMatrix &v_rf, const SystemConfig &sys, Rng &rng)
    {
        const ComplexMatrix v_bb = complex_gaussian_matrix(rng, sys.n_tx_rf_chains, sys.n_streams);
        const ComplexMatrix w_rf = random_phase_matrix(rng, sys.n_rx_antennas, sys.n_rx_rf_chains);
        return vectorize_state(project_power(v_rf, v_bb, sys.transmit_power), w_rf);
    }

    EpisodeResult train_episode(const SystemConfig &sys, const ComplexMatrix &h_est, const ComplexMatrix &v_rf,
                                Agent &agent, const EpisodeOptions &opt)
    {
        sys.validate();
        const ActionLayout layout = ActionLayout::from(sys);
        if (!(layout == agent.layout()))
            throw std::invalid_argument("train_episode: agent layout does not match the system config");
        if (v_rf.rows() != sys.n_tx_antennas || v_rf.cols() != sys.n_tx_rf_chains)
            throw std::invalid_argument("train_episode: V_RF shape does not match the system config");

        const AgentConfig &cfg = agent.config();
        const int iterations = opt.iterations > 0 ? opt.iterations : cfg.iterations;
        const auto batch = static_cast<std::size_t>(cfg.batch_size);

        if (!agent.current_state() || !cfg.warm_start)
            agent.set_current_state(random_initial_state(v_rf, sys, agent.rng()));
        RealVector state = *agent.current_state();
        agent.set_projection(ActionProjection(layout, v_rf, sys.transmit_power));

        EpisodeResult res;
        res.best = realize_action(state, h_est, v_rf, sys, layout);
        res.initial_reward = rate_upper_bound(h_est, res.best, sys);
        res.best_reward = res.initial_reward;
        res.best_iteration = 0;

        for (int t = 1; t <= iterations; ++t)
        {
            const auto started = std::chrono::steady_clock::now();
            const RealVector raw = agent.act(state, true);
            HybridWeights w = realize_action(raw, h_est, v_rf, sys, layout);
            const double reward = rate_upper_bound(h_est, w, sys);
            RealVector next = vectorize_state(w.v_bb, w.w_rf);

            // The stored action is the realised (projected) one, so s(t+1) == a(t).
            agent.replay().push(Transition{state, next, reward, next});

            IterationRecord rec;
            rec.iteration = t;
            rec.reward = reward;
            rec.critic_loss = std::numeric_limits<double>::quiet_NaN();
            rec.mean_q = std::numeric_limits<double>::quiet_NaN();
            if (agent.replay().size() >= batch)
            {
                const auto sample = agent.replay().sample(batch, agent.rng());
                const UpdateDiagnostics d = agent.update_step(sample);
                rec.critic_loss = d.critic_loss;
                rec.mean_q = d.mean_q;
                rec.updated = true;
            }
            rec.elapsed_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
            res.trace.push_back(rec);

            if (reward > res.best_reward)
            {
                res.best_reward = reward;
                res.best_iteration = t;
                res.best = w;
            }
            if (opt.record_weights)
                res.weights.push_back(std::move(w));

            state = std::move(next);
            agent.set_exploration_variance(agent.exploration_variance() * cfg.exploration_decay);
            if (cfg.patience > 0 && t - res.best_iteration >= cfg.patience)
                break;
        }
        agent.set_current_state(state);
        return res;
    }

    void write_trace_csv(std::ostream &os, const EpisodeResult &r)
    {
        const auto prec = os.precision(17);
        os << "iteration,reward,critic_loss,mean_q\n";
        for (const IterationRecord &rec : r.trace)
        {
            os << rec.iteration << ',' << rec.reward << ',';
            if (std::isnan(rec.critic_loss))
                os << ',';
            else
                os << rec.critic_loss << ',';
            if (!std::isnan(rec.mean_q))
                os << rec.mean_q;
            os << '\n';
        }
        os.precision(prec);
    }
} // namespace hbf
