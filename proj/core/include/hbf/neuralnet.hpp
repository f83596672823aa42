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

#ifndef HBF_NEURALNET_HPP
#define HBF_NEURALNET_HPP

#include "hbf/matrix.hpp"
#include "hbf/random.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace hbf::nn
{
    enum class Activation : std::uint8_t
    {
        relu = 0,
        linear = 1,
    };

    struct LayerSpec
    {
        int input_width = 0;
        int output_width = 0;
        Activation activation = Activation::relu;

        bool operator==(const LayerSpec &) const = default;
    };

    // ReLU hidden layers of the given widths followed by a linear output layer.
    std::vector<LayerSpec> mlp_specs(int input_width, const std::vector<int> &hidden, int output_width);

    struct DenseLayer
    {
        RealMatrix weight; // output_width x input_width
        RealVector bias;
        Activation activation = Activation::relu;
    };

    // Dense feed-forward network. Every mutation bumps revision(), which lets backward() reject caches
    // produced before the parameters changed.
    class Network
    {
    public:
        Network() = default;
        // Glorot-uniform weights, zero biases.
        Network(const std::vector<LayerSpec> &specs, Rng &rng);
        Network(const Network &other);
        Network &operator=(const Network &other);
        Network(Network &&) noexcept = default;
        Network &operator=(Network &&) noexcept = default;

        static Network zeros(const std::vector<LayerSpec> &specs);

        std::size_t depth() const { return layers_.size(); }
        int input_width() const;
        int output_width() const;
        std::size_t parameter_count() const;
        std::vector<LayerSpec> specs() const;

        const DenseLayer &layer(std::size_t i) const { return layers_.at(i); }
        DenseLayer &mutable_layer(std::size_t i);

        std::uint64_t identity() const { return id_; }
        std::uint64_t revision() const { return revision_; }
        void touch() { ++revision_; }

    private:
        explicit Network(std::vector<DenseLayer> layers);
        static std::uint64_t next_id();

        std::vector<DenseLayer> layers_;
        std::uint64_t id_ = next_id();
        std::uint64_t revision_ = 0;
    };

    // Inputs and post-activation outputs of every layer for one batch (one sample per column).
    struct ForwardCache
    {
        std::uint64_t network_id = 0;
        std::uint64_t network_revision = 0;
        std::vector<RealMatrix> activations; // activations[0] = input, activations.back() = output

        const RealMatrix &output() const { return activations.back(); }
    };

    ForwardCache forward(const Network &net, const RealMatrix &inputs);
    RealMatrix predict(const Network &net, const RealMatrix &inputs);
    RealVector predict(const Network &net, const RealVector &input);

    struct ParamGradients
    {
        std::vector<RealMatrix> weight;
        std::vector<RealVector> bias;

        static ParamGradients zeros_like(const Network &net);
        double squared_norm() const;
    };

    struct BackwardResult
    {
        ParamGradients params;
        RealMatrix input_gradient; // input_width x batch
    };

    // Reverse-mode gradients of sum_over_batch <output_gradient, output>. Throws std::logic_error on a stale
    // or foreign cache.
    BackwardResult backward(const Network &net, const ForwardCache &cache, const RealMatrix &output_gradient);

    struct AdamState
    {
        std::vector<RealMatrix> m_weight, v_weight;
        std::vector<RealVector> m_bias, v_bias;
        std::int64_t step = 0;
        double step_size = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;

        static AdamState for_network(const Network &net, double step_size = 1e-3);
    };

    // One bias-corrected Adam descent step.
    void adam_step(Network &net, const ParamGradients &grads, AdamState &state);

    // target <- tau * source + (1 - tau) * target
    void soft_update(Network &target, const Network &source, double tau);

    // Flat little-endian checkpoint: magic "HBFNET", u32 version, u32 layer count, then per layer
    // u32 in, u32 out, u8 activation, row-major weights and the bias as f64.
    inline constexpr std::uint32_t checkpoint_version = 1;
    void write_network(std::ostream &os, const Network &net);
    Network read_network(std::istream &is);
} // namespace hbf::nn

#endif
