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

#include "hbf/neuralnet.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hbf::nn
{
    std::vector<LayerSpec> mlp_specs(int input_width, const std::vector<int> &hidden, int output_width)
    {
        std::vector<LayerSpec> specs;
        int in = input_width;
        for (int h : hidden)
        {
            specs.push_back({in, h, Activation::relu});
            in = h;
        }
        specs.push_back({in, output_width, Activation::linear});
        return specs;
    }

    namespace
    {
        void check_specs(const std::vector<LayerSpec> &specs)
        {
            if (specs.empty())
                throw std::invalid_argument("network: need at least one layer");
            for (std::size_t i = 0; i < specs.size(); ++i)
            {
                if (specs[i].input_width < 1 || specs[i].output_width < 1)
                    throw std::invalid_argument("network: layer widths must be positive");
                if (i > 0 && specs[i].input_width != specs[i - 1].output_width)
                    throw std::invalid_argument("network: layer " + std::to_string(i) +
                                                " input width does not match previous output");
            }
        }

        void apply_activation(RealMatrix &z, Activation a)
        {
            if (a == Activation::relu)
                z = z.cwiseMax(0.0);
        }
    } // namespace

    std::uint64_t Network::next_id()
    {
        static std::atomic<std::uint64_t> counter{1};
        return counter.fetch_add(1, std::memory_order_relaxed);
    }

    Network::Network(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {}

    Network::Network(const std::vector<LayerSpec> &specs, Rng &rng)
    {
        check_specs(specs);
        for (const LayerSpec &s : specs)
        {
            const double limit = std::sqrt(6.0 / static_cast<double>(s.input_width + s.output_width));
            std::uniform_real_distribution<double> u(-limit, limit);
            DenseLayer l;
            l.weight.resize(s.output_width, s.input_width);
            for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
                    l.weight(r, c) = u(rng);
            l.bias = RealVector::Zero(s.output_width);
            l.activation = s.activation;
            layers_.push_back(std::move(l));
        }
    }

    Network::Network(const Network &other) : layers_(other.layers_), revision_(0) {}

    Network &Network::operator=(const Network &other)
    {
        if (this != &other)
        {
            layers_ = other.layers_;
            ++revision_;
        }
        return *this;
    }

    Network Network::zeros(const std::vector<LayerSpec> &specs)
    {
        check_specs(specs);
        std::vector<DenseLayer> layers;
        for (const LayerSpec &s : specs)
            layers.push_back({RealMatrix::Zero(s.output_width, s.input_width), RealVector::Zero(s.output_width),
                              s.activation});
        return Network(std::move(layers));
    }

    int Network::input_width() const
    {
        return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
    }

    int Network::output_width() const
    {
        return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
    }

    std::size_t Network::parameter_count() const
    {
        std::size_t n = 0;
        for (const DenseLayer &l : layers_)
            n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
        return n;
    }

    std::vector<LayerSpec> Network::specs() const
    {
        std::vector<LayerSpec> s;
        for (const DenseLayer &l : layers_)
            s.push_back({static_cast<int>(l.weight.cols()), static_cast<int>(l.weight.rows()), l.activation});
        return s;
    }

    DenseLayer &Network::mutable_layer(std::size_t i)
    {
        ++revision_;
        return layers_.at(i);
    }

    ForwardCache forward(const Network &net, const RealMatrix &inputs)
    {
        if (net.depth() == 0)
            throw std::invalid_argument("forward: empty network");
        if (inputs.rows() != net.input_width())
            throw std::invalid_argument("forward: input width " + std::to_string(inputs.rows()) +
                                        " does not match network input width " +
                                        std::to_string(net.input_width()));
        ForwardCache cache;
        cache.network_id = net.identity();
        cache.network_revision = net.revision();
        cache.activations.reserve(net.depth() + 1);
        cache.activations.push_back(inputs);
        for (std::size_t i = 0; i < net.depth(); ++i)
        {
            const DenseLayer &l = net.layer(i);
            RealMatrix z = l.weight * cache.activations.back();
            z.colwise() += l.bias;
            apply_activation(z, l.activation);
            cache.activations.push_back(std::move(z));
        }
        return cache;
    }

    RealMatrix predict(const Network &net, const RealMatrix &inputs)
    {
        if (inputs.rows() != net.input_width())
            throw std::invalid_argument("predict: input width mismatch");
        RealMatrix a = inputs;
        for (std::size_t i = 0; i < net.depth(); ++i)
        {
            const DenseLayer &l = net.layer(i);
            RealMatrix z = l.weight * a;
            z.colwise() += l.bias;
            apply_activation(z, l.activation);
            a = std::move(z);
        }
        return a;
    }

    RealVector predict(const Network &net, const RealVector &input)
    {
        return predict(net, RealMatrix(input)).col(0);
    }

    ParamGradients ParamGradients::zeros_like(const Network &net)
    {
        ParamGradients g;
        for (std::size_t i = 0; i < net.depth(); ++i)
        {
            g.weight.push_back(RealMatrix::Zero(net.layer(i).weight.rows(), net.layer(i).weight.cols()));
            g.bias.push_back(RealVector::Zero(net.layer(i).bias.size()));
        }
        return g;
    }

    double ParamGradients::squared_norm() const
    {
        double s = 0.0;
        for (const auto &w : weight)
            s += w.squaredNorm();
        for (const auto &b : bias)
            s += b.squaredNorm();
        return s;
    }

    BackwardResult backward(const Network &net, const ForwardCache &cache, const RealMatrix &output_gradient)
    {
        if (cache.network_id != net.identity() || cache.network_revision != net.revision() ||
            cache.activations.size() != net.depth() + 1)
            throw std::logic_error("backward: stale or foreign forward cache");
        const RealMatrix &out = cache.output();
        if (output_gradient.rows() != out.rows() || output_gradient.cols() != out.cols())
            throw std::invalid_argument("backward: output gradient shape mismatch");

        BackwardResult res;
        res.params.weight.resize(net.depth());
        res.params.bias.resize(net.depth());

        RealMatrix delta = output_gradient;
        for (std::size_t k = net.depth(); k-- > 0;)
        {
            const DenseLayer &l = net.layer(k);
            if (l.activation == Activation::relu)
                delta = (cache.activations[k + 1].array() > 0.0).select(delta, 0.0);
            res.params.weight[k].noalias() = delta * cache.activations[k].transpose();
            res.params.bias[k] = delta.rowwise().sum();
            RealMatrix prev = l.weight.transpose() * delta;
            delta = std::move(prev);
        }
        res.input_gradient = std::move(delta);
        return res;
    }

    AdamState AdamState::for_network(const Network &net, double step_size)
    {
        AdamState s;
        s.step_size = step_size;
        for (std::size_t i = 0; i < net.depth(); ++i)
        {
            const auto &l = net.layer(i);
            s.m_weight.push_back(RealMatrix::Zero(l.weight.rows(), l.weight.cols()));
            s.v_weight.push_back(RealMatrix::Zero(l.weight.rows(), l.weight.cols()));
            s.m_bias.push_back(RealVector::Zero(l.bias.size()));
            s.v_bias.push_back(RealVector::Zero(l.bias.size()));
        }
        return s;
    }

    namespace
    {
        template <typename P, typename G>
        void adam_update(P &param, const G &grad, P &m, P &v, double b1, double b2, double lr_t, double eps_t)
        {
            m = b1 * m + (1.0 - b1) * grad;
            v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
            param.array() -= lr_t * m.array() / (v.array().sqrt() + eps_t);
        }
    } // namespace

    void adam_step(Network &net, const ParamGradients &grads, AdamState &state)
    {
        if (grads.weight.size() != net.depth() || state.m_weight.size() != net.depth())
            throw std::invalid_argument("adam_step: layer count mismatch");
        ++state.step;
        const double t = static_cast<double>(state.step);
        const double c1 = 1.0 - std::pow(state.beta1, t);
        const double c2 = 1.0 - std::pow(state.beta2, t);
        // lr * m_hat / (sqrt(v_hat) + eps) == (lr sqrt(c2) / c1) * m / (sqrt(v) + eps sqrt(c2))
        const double lr_t = state.step_size * std::sqrt(c2) / c1;
        const double eps_t = state.epsilon * std::sqrt(c2);
        for (std::size_t i = 0; i < net.depth(); ++i)
        {
            DenseLayer &l = net.mutable_layer(i);
            if (grads.weight[i].rows() != l.weight.rows() || grads.weight[i].cols() != l.weight.cols() ||
                grads.bias[i].size() != l.bias.size())
                throw std::invalid_argument("adam_step: gradient shape mismatch at layer " + std::to_string(i));
            adam_update(l.weight, grads.weight[i], state.m_weight[i], state.v_weight[i], state.beta1, state.beta2,
                        lr_t, eps_t);
            adam_update(l.bias, grads.bias[i], state.m_bias[i], state.v_bias[i], state.beta1, state.beta2, lr_t,
                        eps_t);
        }
    }

    void soft_update(Network &target, const Network &source, double tau)
    {
        if (target.specs() != source.specs())
            throw std::invalid_argument("soft_update: network shapes differ");
        if (!(tau > 0.0 && tau <= 1.0))
            throw std::invalid_argument("soft_update: tau must lie in (0, 1]");
        for (std::size_t i = 0; i < target.depth(); ++i)
        {
            DenseLayer &t = target.mutable_layer(i);
            const DenseLayer &s = source.layer(i);
            if (tau == 1.0)
            {
                t.weight = s.weight;
                t.bias = s.bias;
            }
            else
            {
                t.weight = tau * s.weight + (1.0 - tau) * t.weight;
                t.bias = tau * s.bias + (1.0 - tau) * t.bias;
            }
        }
    }

    namespace
    {
        constexpr char checkpoint_magic[6] = {'H', 'B', 'F', 'N', 'E', 'T'};

        template <typename T>
        void put(std::ostream &os, T v)
        {
            os.write(reinterpret_cast<const char *>(&v), sizeof v);
        }

        template <typename T>
        T get(std::istream &is)
        {
            T v{};
            if (!is.read(reinterpret_cast<char *>(&v), sizeof v))
                throw std::runtime_error("network checkpoint: truncated stream");
            return v;
        }
    } // namespace

    void write_network(std::ostream &os, const Network &net)
    {
        os.write(checkpoint_magic, sizeof checkpoint_magic);
        put<std::uint32_t>(os, checkpoint_version);
        put<std::uint32_t>(os, static_cast<std::uint32_t>(net.depth()));
        for (std::size_t i = 0; i < net.depth(); ++i)
        {
            const DenseLayer &l = net.layer(i);
            put<std::uint32_t>(os, static_cast<std::uint32_t>(l.weight.cols()));
            put<std::uint32_t>(os, static_cast<std::uint32_t>(l.weight.rows()));
            put<std::uint8_t>(os, static_cast<std::uint8_t>(l.activation));
            for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
                    put<double>(os, l.weight(r, c));
            for (Eigen::Index r = 0; r < l.bias.size(); ++r)
                put<double>(os, l.bias(r));
        }
        if (!os)
            throw std::runtime_error("network checkpoint: write failed");
    }

    Network read_network(std::istream &is)
    {
        char magic[sizeof checkpoint_magic];
        if (!is.read(magic, sizeof magic) || std::memcmp(magic, checkpoint_magic, sizeof magic) != 0)
            throw std::runtime_error("network checkpoint: bad magic");
        const auto version = get<std::uint32_t>(is);
        if (version != checkpoint_version)
            throw std::runtime_error("network checkpoint: unsupported version " + std::to_string(version));
        const auto n = get<std::uint32_t>(is);
        std::vector<LayerSpec> specs;
        std::vector<std::pair<RealMatrix, RealVector>> values;
        for (std::uint32_t i = 0; i < n; ++i)
        {
            LayerSpec s;
            s.input_width = static_cast<int>(get<std::uint32_t>(is));
            s.output_width = static_cast<int>(get<std::uint32_t>(is));
            const auto act = get<std::uint8_t>(is);
            if (act > 1)
                throw std::runtime_error("network checkpoint: unknown activation code");
            s.activation = static_cast<Activation>(act);
            RealMatrix w(s.output_width, s.input_width);
            for (Eigen::Index r = 0; r < w.rows(); ++r)
                for (Eigen::Index c = 0; c < w.cols(); ++c)
                    w(r, c) = get<double>(is);
            RealVector b(s.output_width);
            for (Eigen::Index r = 0; r < b.size(); ++r)
                b(r) = get<double>(is);
            specs.push_back(s);
            values.emplace_back(std::move(w), std::move(b));
        }
        Network net = Network::zeros(specs);
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            DenseLayer &l = net.mutable_layer(i);
            l.weight = std::move(values[i].first);
            l.bias = std::move(values[i].second);
        }
        return net;
    }
} // namespace hbf::nn
