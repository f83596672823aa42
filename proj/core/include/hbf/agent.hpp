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

#ifndef HBF_AGENT_HPP
#define HBF_AGENT_HPP

#include "hbf/channel.hpp"
#include "hbf/metrics.hpp"
#include "hbf/neuralnet.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace hbf
{
    struct AgentConfig
    {
        double discount = 0.95;            // gamma
        double tau = 0.001;                // soft target update rate
        int batch_size = 64;               // N
        int replay_capacity = 5000;        // N_D
        double exploration_variance = 0.1; // covariance scale of the additive Gaussian action noise
        double exploration_decay = 1.0;    // per-iteration multiplier on the variance; 1 disables decay
        int iterations = 500;              // T
        int patience = 100;                // stop after this many iterations without a new best; 0 disables
        double actor_step_size = 1e-3;
        double critic_step_size = 1e-3;
        std::vector<int> hidden = {300, 200};
        bool warm_start = true; // keep networks, buffer and state across channel realisations

        void validate() const;
    };

    // Shapes of the two learned matrices: V_BB (n_tx_rf x n_streams) and W_RF (n_rx x n_rx_rf).
    struct ActionLayout
    {
        int n_tx_rf = 0;
        int n_streams = 0;
        int n_rx = 0;
        int n_rx_rf = 0;

        static ActionLayout from(const SystemConfig &sys);
        // K = 2 (n_tx_rf n_streams + n_rx n_rx_rf)
        int width() const { return 2 * (n_tx_rf * n_streams + n_rx * n_rx_rf); }
        bool operator==(const ActionLayout &) const = default;
    };

    // [Re vec(V_BB); Im vec(V_BB); Re vec(W_RF); Im vec(W_RF)], vec() column-major.
    RealVector vectorize_state(const ComplexMatrix &v_bb, const ComplexMatrix &w_rf);

    // Inverse of vectorize_state: returns (V_BB, W_RF) before any projection.
    std::pair<ComplexMatrix, ComplexMatrix> devectorize_action(const RealVector &a, const ActionLayout &layout);

    // The map from a raw action vector to the realised one: unit-modulus W_RF entries and V_BB scaled to
    // ||V_RF V_BB||_F^2 = P. Also provides the transposed Jacobian so policy gradients can pass through it.
    class ActionProjection
    {
    public:
        ActionProjection(const ActionLayout &layout, const ComplexMatrix &v_rf, double power);

        const ActionLayout &layout() const { return layout_; }

        // Column-wise on K x N matrices.
        RealMatrix apply(const RealMatrix &raw) const;
        // J(raw)^T grad, column-wise.
        RealMatrix pullback(const RealMatrix &raw, const RealMatrix &grad) const;

    private:
        ActionLayout layout_;
        ComplexMatrix gram_; // V_RF^H V_RF
        double power_;
    };

    struct Transition
    {
        RealVector state;
        RealVector action;
        double reward = 0.0;
        RealVector next_state;
    };

    // Bounded FIFO; the oldest transition is evicted once capacity is reached.
    class ReplayBuffer
    {
    public:
        explicit ReplayBuffer(std::size_t capacity);

        void push(Transition t);
        std::size_t size() const { return items_.size(); }
        std::size_t capacity() const { return capacity_; }
        std::uint64_t total_inserted() const { return inserted_; }
        void clear();

        // i = 0 is the oldest retained transition.
        const Transition &at(std::size_t i) const;

        // n uniform draws with replacement.
        std::vector<const Transition *> sample(std::size_t n, Rng &rng) const;

    private:
        std::size_t capacity_;
        std::vector<Transition> items_;
        std::size_t head_ = 0; // index of the oldest item once full
        std::uint64_t inserted_ = 0;
    };

    struct UpdateDiagnostics
    {
        double critic_loss = 0.0; // before the critic step
        double mean_q = 0.0;      // mean critic value of the sampled state-action pairs
    };

    struct CriticFit
    {
        double loss = 0.0;
        RealMatrix q; // 1 x N
        nn::ParamGradients gradients;
    };

    // DDPG agent: actor A, critic C and their target copies A', C'.
    class Agent
    {
    public:
        Agent(const ActionLayout &layout, const AgentConfig &cfg, std::uint64_t seed);

        const AgentConfig &config() const { return cfg_; }
        const ActionLayout &layout() const { return layout_; }
        int width() const { return layout_.width(); }

        // A(s), plus N(0, sigma^2 I) noise when explore is set.
        RealVector act(const RealVector &state, bool explore);

        // When set, the policy is proj(A(s)): targets use proj(A'(s')) and the actor gradient is pulled back
        // through the projection. The critic then only ever sees realised actions.
        void set_projection(std::optional<ActionProjection> p) { projection_ = std::move(p); }
        const std::optional<ActionProjection> &projection() const { return projection_; }

        // y = r + gamma * C'(s', A'(s'))
        double critic_target(double reward, const RealVector &next_state) const;
        RealVector critic_targets(const RealVector &rewards, const RealMatrix &next_states) const;

        // Mean squared error of C(s, a) against fixed targets and its parameter gradient.
        CriticFit critic_loss_and_gradient(const RealMatrix &states, const RealMatrix &actions,
                                           const RealVector &targets) const;

        // One Adam ascent step of the actor along dQ/da evaluated at a = A(s), averaged over the batch.
        // action_gradient maps the (K x N) actions A(S) to dQ/da.
        void policy_improvement_step(const RealMatrix &states,
                                     const std::function<RealMatrix(const RealMatrix &)> &action_gradient);

        // Critic regression, actor step through the critic, then soft updates with tau (tau == 0 skips them).
        UpdateDiagnostics update_step(std::span<const Transition *const> batch);
        UpdateDiagnostics update_step(std::span<const Transition *const> batch, double tau);

        ReplayBuffer &replay() { return replay_; }
        const ReplayBuffer &replay() const { return replay_; }
        Rng &rng() { return rng_; }

        const nn::Network &actor() const { return actor_; }
        const nn::Network &actor_target() const { return actor_target_; }
        const nn::Network &critic() const { return critic_; }
        const nn::Network &critic_target_network() const { return critic_target_; }
        nn::Network &mutable_actor() { return actor_; }
        nn::Network &mutable_critic() { return critic_; }
        nn::Network &mutable_actor_target() { return actor_target_; }
        nn::Network &mutable_critic_target() { return critic_target_; }

        double exploration_variance() const { return noise_variance_; }
        void set_exploration_variance(double v) { noise_variance_ = v; }

        const std::optional<RealVector> &current_state() const { return state_; }
        void set_current_state(RealVector s) { state_ = std::move(s); }
        // Cold start: fresh networks, empty buffer, no carried state.
        void reset(std::uint64_t seed);

        void save(std::ostream &os) const;
        static Agent load(std::istream &is, std::uint64_t seed);

    private:
        RealMatrix critic_input(const RealMatrix &states, const RealMatrix &actions) const;

        ActionLayout layout_;
        AgentConfig cfg_;
        Rng rng_;
        nn::Network actor_, actor_target_, critic_, critic_target_;
        nn::AdamState actor_adam_, critic_adam_;
        ReplayBuffer replay_;
        double noise_variance_;
        std::optional<RealVector> state_;
        std::optional<ActionProjection> projection_;
    };

    struct IterationRecord
    {
        int iteration = 0;
        double reward = 0.0;
        double critic_loss = 0.0; // NaN when no update ran
        double mean_q = 0.0;      // NaN when no update ran
        bool updated = false;
        double elapsed_ms = 0.0;  // wall time of the whole iteration
    };

    struct EpisodeResult
    {
        HybridWeights best;
        double best_reward = 0.0;
        int best_iteration = 0; // 0 = the initial state
        double initial_reward = 0.0;
        std::vector<IterationRecord> trace;
        std::vector<HybridWeights> weights; // per trace entry, when requested
    };

    struct EpisodeOptions
    {
        int iterations = 0; // 0 -> agent config
        bool record_weights = false;
    };

    // Builds the weights realised by a state/action vector: unit-modulus W_RF, power-projected V_BB,
    // MMSE W_BB.
    HybridWeights realize_action(const RealVector &action, const ComplexMatrix &h_est, const ComplexMatrix &v_rf,
                                 const SystemConfig &sys, const ActionLayout &layout);

    // Random initial state: CN(0,1) V_BB and random-phase W_RF, projected.
    RealVector random_initial_state(const ComplexMatrix &v_rf, const SystemConfig &sys, Rng &rng);

    // The learning loop for one channel estimate with a fixed analog precoder.
    EpisodeResult train_episode(const SystemConfig &sys, const ComplexMatrix &h_est, const ComplexMatrix &v_rf,
                                Agent &agent, const EpisodeOptions &opt = {});

    // iteration,reward,critic_loss,mean_q
    void write_trace_csv(std::ostream &os, const EpisodeResult &r);
} // namespace hbf

#endif
