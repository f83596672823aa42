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

#include "hbf/baselines.hpp"
#include "hbf/manifold.hpp"

#include <cmath>
#include <stdexcept>

namespace hbf
{
    HybridWeights FullDigital::as_weights() const
    {
        const Eigen::Index ns = v.cols();
        return HybridWeights{v, ComplexMatrix::Identity(ns, ns), w, ComplexMatrix::Identity(ns, ns)};
    }

    FullDigital fd_svd_beamformer(const ComplexMatrix &h_est, const SystemConfig &sys)
    {
        sys.validate();
        if (h_est.rows() != sys.n_rx_antennas || h_est.cols() != sys.n_tx_antennas)
            throw std::invalid_argument("fd_svd_beamformer: channel shape does not match system config");
        const Svd d = svd(h_est);
        const Eigen::Index ns = sys.n_streams;
        FullDigital fd;
        fd.v = std::sqrt(sys.transmit_power / static_cast<double>(ns)) * d.v.leftCols(ns);
        fd.w = d.u.leftCols(ns);
        return fd;
    }

    ComplexMatrix steering_dictionary(int n_antennas, int size, double spacing_over_wavelength)
    {
        if (size < 1)
            throw std::invalid_argument("steering_dictionary: size must be positive");
        ComplexMatrix d(n_antennas, size);
        const double scale = std::sqrt(static_cast<double>(n_antennas));
        for (int k = 0; k < size; ++k)
        {
            const double s = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(size);
            d.col(k) = scale * array_response(n_antennas, spacing_over_wavelength, std::asin(s));
        }
        return d;
    }

    OmpSelection omp_select(const ComplexMatrix &target, const ComplexMatrix &dictionary, int n_rf)
    {
        if (dictionary.rows() != target.rows())
            throw std::invalid_argument("omp_select: dictionary and target row counts differ");
        if (n_rf < 1 || n_rf > dictionary.cols())
            throw std::invalid_argument("omp_select: need 1 <= n_rf <= dictionary size");

        OmpSelection out;
        out.analog.resize(target.rows(), 0);
        std::vector<bool> used(static_cast<std::size_t>(dictionary.cols()), false);
        ComplexMatrix residual = target;
        out.residual_trace.push_back(target.norm());

        for (int r = 0; r < n_rf; ++r)
        {
            const ComplexMatrix corr = dictionary.adjoint() * residual;
            const Eigen::VectorXd score = corr.rowwise().squaredNorm();
            Eigen::Index best = -1;
            for (Eigen::Index k = 0; k < dictionary.cols(); ++k)
                if (!used[static_cast<std::size_t>(k)] && (best < 0 || score(k) > score(best)))
                    best = k;
            used[static_cast<std::size_t>(best)] = true;
            out.selected.push_back(best);

            out.analog.conservativeResize(Eigen::NoChange, r + 1);
            out.analog.col(r) = dictionary.col(best);
            out.digital = manifold_detail::least_squares_digital(out.analog, target);
            residual = target - out.analog * out.digital;
            out.residual_trace.push_back(residual.norm());
        }
        return out;
    }

    OmpResult omp_hybrid_beamformer(const ComplexMatrix &h_est, const SystemConfig &sys, const OmpOptions &opt)
    {
        const FullDigital fd = fd_svd_beamformer(h_est, sys);
        const int tx_size = opt.tx_dictionary_size > 0 ? opt.tx_dictionary_size : 2 * sys.n_tx_antennas;
        const int rx_size = opt.rx_dictionary_size > 0 ? opt.rx_dictionary_size : 2 * sys.n_rx_antennas;
        if (tx_size < sys.n_tx_rf_chains || rx_size < sys.n_rx_rf_chains)
            throw std::invalid_argument("omp_hybrid_beamformer: dictionary smaller than the RF-chain count");

        OmpResult res;
        res.transmit = omp_select(fd.v, steering_dictionary(sys.n_tx_antennas, tx_size, opt.antenna_spacing),
                                  sys.n_tx_rf_chains);
        res.receive = omp_select(fd.w, steering_dictionary(sys.n_rx_antennas, rx_size, opt.antenna_spacing),
                                 sys.n_rx_rf_chains);

        HybridWeights &w = res.weights;
        w.v_rf = res.transmit.analog;
        w.v_bb = project_power(w.v_rf, res.transmit.digital, sys.transmit_power);
        w.w_rf = res.receive.analog;
        w.w_bb = mmse_digital_combiner(h_est, w.v_rf, w.v_bb, w.w_rf, sys);
        return res;
    }
} // namespace hbf
