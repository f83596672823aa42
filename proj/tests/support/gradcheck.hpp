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

// Central-difference gradient checks for the dense networks. The scalar probed is <g, net(x)> summed over
// the batch for a fixed random g, which exercises every output unit at once.

#ifndef HBF_TEST_GRADCHECK_HPP
#define HBF_TEST_GRADCHECK_HPP

#include "hbf/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace gradcheck
{
    using hbf::RealMatrix;
    using hbf::nn::Network;

    struct Report
    {
        double max_relative_error = 0.0;
        int checked = 0;
    };

    // |a - b| / max(|a|, |b|, floor); the floor keeps entries that are zero up to round-off from
    // dominating the ratio.
    inline double relative_error(double a, double b, double floor = 1e-4)
    {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
    }

    // <g, net(x)> evaluated independently of the library's forward pass, in extended precision. In double, central
    // differences at h = 1e-6 carry round-off near eps * |probe| / h, which swamps small partials.
    inline long double probe(const Network &net, const RealMatrix &x, const RealMatrix &g)
    {
        using Wide = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
        Wide a = x.cast<long double>();
        for (std::size_t l = 0; l < net.depth(); ++l)
        {
            const hbf::nn::DenseLayer &layer = net.layer(l);
            const Wide w = layer.weight.cast<long double>();
            Wide z = w * a;
            z.colwise() += layer.bias.cast<long double>();
            if (layer.activation == hbf::nn::Activation::relu)
                z = z.cwiseMax(0.0L);
            a = std::move(z);
        }
        long double sum = 0.0L;
        for (Eigen::Index i = 0; i < a.size(); ++i)
            sum += a.data()[i] * static_cast<long double>(g.data()[i]);
        return sum;
    }

    // Checks `samples` randomly chosen parameters per layer (weights and biases) and `input_samples` randomly chosen
    // input entries (every entry when negative).
    inline Report check(Network net, const RealMatrix &x, std::uint64_t seed, int samples = 64, double h = 1e-6,
                        int input_samples = -1)
    {
        hbf::Rng rng(seed);
        std::normal_distribution<double> normal;
        RealMatrix g(net.output_width(), x.cols());
        for (Eigen::Index i = 0; i < g.size(); ++i)
            g.data()[i] = normal(rng);

        const hbf::nn::ForwardCache cache = hbf::nn::forward(net, x);
        const hbf::nn::BackwardResult b = hbf::nn::backward(net, cache, g);

        Report rep;
        auto record = [&](double analytic, double numeric) {
            rep.max_relative_error = std::max(rep.max_relative_error, relative_error(analytic, numeric));
            ++rep.checked;
        };

        for (std::size_t l = 0; l < net.depth(); ++l)
        {
            const Eigen::Index rows = net.layer(l).weight.rows();
            const Eigen::Index cols = net.layer(l).weight.cols();
            std::uniform_int_distribution<Eigen::Index> pick_r(0, rows - 1), pick_c(0, cols - 1);
            for (int s = 0; s < samples; ++s)
            {
                const Eigen::Index r = pick_r(rng), c = pick_c(rng);
                double &w = net.mutable_layer(l).weight(r, c);
                const double keep = w;
                const double plus = keep + h, minus = keep - h; // realised step may differ from 2h by rounding
                w = plus;
                const long double up = probe(net, x, g);
                net.mutable_layer(l).weight(r, c) = minus;
                const long double down = probe(net, x, g);
                net.mutable_layer(l).weight(r, c) = keep;
                record(b.params.weight[l](r, c), static_cast<double>((up - down) / (plus - minus)));

                const Eigen::Index rb = pick_r(rng);
                double &bias = net.mutable_layer(l).bias(rb);
                const double keep_b = bias;
                const double plus_b = keep_b + h, minus_b = keep_b - h;
                bias = plus_b;
                const long double up_b = probe(net, x, g);
                net.mutable_layer(l).bias(rb) = minus_b;
                const long double down_b = probe(net, x, g);
                net.mutable_layer(l).bias(rb) = keep_b;
                record(b.params.bias[l](rb), static_cast<double>((up_b - down_b) / (plus_b - minus_b)));
            }
        }

        std::vector<Eigen::Index> inputs(static_cast<std::size_t>(x.size()));
        std::iota(inputs.begin(), inputs.end(), Eigen::Index{0});
        if (input_samples >= 0 && static_cast<std::size_t>(input_samples) < inputs.size())
        {
            std::shuffle(inputs.begin(), inputs.end(), rng);
            inputs.resize(static_cast<std::size_t>(input_samples));
        }
        for (const Eigen::Index i : inputs)
        {
            RealMatrix xp = x, xm = x;
            xp.data()[i] += h;
            xm.data()[i] -= h;
            const long double step = static_cast<long double>(xp.data()[i]) - xm.data()[i];
            record(b.input_gradient.data()[i], static_cast<double>((probe(net, xp, g) - probe(net, xm, g)) / step));
        }
        return rep;
    }
} // namespace gradcheck

#endif
