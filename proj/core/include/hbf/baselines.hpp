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

#ifndef HBF_BASELINES_HPP
#define HBF_BASELINES_HPP

#include "hbf/channel.hpp"
#include "hbf/metrics.hpp"

#include <vector>

namespace hbf
{
    // Full-digital reference: right/left singular vectors of the estimate, equal power per stream.
    struct FullDigital
    {
        ComplexMatrix v; // n_tx x n_streams, ||V||_F^2 = P
        ComplexMatrix w; // n_rx x n_streams, orthonormal columns

        // Same beamformer viewed as HybridWeights (V_RF = V, V_BB = I, W_RF = W, W_BB = I) so the
        // rate and BER evaluators apply unchanged. The analog blocks are not unit modulus.
        HybridWeights as_weights() const;
    };

    FullDigital fd_svd_beamformer(const ComplexMatrix &h_est, const SystemConfig &sys);

    // Columns are array responses on a uniform sin(angle) grid over [-1, 1), scaled to unit-modulus entries.
    ComplexMatrix steering_dictionary(int n_antennas, int size, double spacing_over_wavelength);

    struct OmpSelection
    {
        std::vector<Eigen::Index> selected; // dictionary columns, in selection order
        ComplexMatrix analog;               // dictionary columns, n x n_rf
        ComplexMatrix digital;              // least-squares fit of the target on analog
        std::vector<double> residual_trace; // ||target - analog * digital||_F after each selection (entry 0: ||target||)
    };

    // Greedy orthogonal matching pursuit of `target` over the dictionary columns. Already selected columns
    // are never picked again.
    OmpSelection omp_select(const ComplexMatrix &target, const ComplexMatrix &dictionary, int n_rf);

    struct OmpOptions
    {
        int tx_dictionary_size = 0; // 0 -> 2 n_tx
        int rx_dictionary_size = 0; // 0 -> 2 n_rx
        double antenna_spacing = 0.5;
    };

    struct OmpResult
    {
        HybridWeights weights;
        OmpSelection transmit;
        OmpSelection receive;
    };

    // Transmit side: OMP against the FD precoder, then the power projection. Receive side: OMP against the
    // FD combiner for W_RF, then W_BB from the imperfect-CSI MMSE combiner.
    OmpResult omp_hybrid_beamformer(const ComplexMatrix &h_est, const SystemConfig &sys, const OmpOptions &opt = {});
} // namespace hbf

#endif
