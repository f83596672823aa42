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

#ifndef HBF_METRICS_HPP
#define HBF_METRICS_HPP

#include "hbf/channel.hpp"
#include "hbf/matrix.hpp"

#include <cstddef>

namespace hbf
{
    // The four hybrid matrices. Constraints (unit-modulus analog entries, total power)
    // are enforced by the projections below, not by this type.
    struct HybridWeights
    {
        ComplexMatrix v_rf; // n_tx x n_tx_rf, unit modulus
        ComplexMatrix v_bb; // n_tx_rf x n_streams
        ComplexMatrix w_rf; // n_rx x n_rx_rf, unit modulus
        ComplexMatrix w_bb; // n_rx_rf x n_streams

        ComplexMatrix precoder() const { return v_rf * v_bb; }
        ComplexMatrix combiner() const { return w_rf * w_bb; }
        double transmit_power() const { return precoder().squaredNorm(); }
    };

    // Thrown when W = W_RF W_BB has deficient column rank and the noise covariance is singular.
    class RankDeficientCombiner : public NumericalError
    {
    public:
        RankDeficientCombiner() : NumericalError("combiner column rank deficient") {}
    };

    // log2 det(I + Cn^-1 W^H H V V^H H^H W), Cn = sigma^2 W^H W.
    double spectral_efficiency(const ComplexMatrix &h, const HybridWeights &w, double noise_variance);

    // Jensen upper bound on the average rate over the estimation error:
    // log2 det[(1 + b^2 P / sigma^2) I + (1 - b^2) Cn^-1 W^H H~ V V^H H~^H W].
    // This is also the agent's reward.
    double rate_upper_bound(const ComplexMatrix &h_est, const HybridWeights &w, const SystemConfig &sys);

    // MMSE digital combiner for fixed V_RF, V_BB, W_RF under the imperfect-CSI model:
    //   W_BB = sqrt(1 - b^2) (W_RF^H Psi W_RF)^-1 W_RF^H H~ V,
    //   Psi  = (1 - b^2) H~ V V^H H~^H + (b^2 P + sigma^2) I.
    // Throws NotPositiveDefinite when W_RF^H Psi W_RF is singular (degenerate analog combiner).
    ComplexMatrix mmse_digital_combiner(const ComplexMatrix &h_est, const ComplexMatrix &v_rf,
                                        const ComplexMatrix &v_bb, const ComplexMatrix &w_rf,
                                        const SystemConfig &sys);

    // Scales V_BB so that ||V_RF V_BB||_F^2 == power. Throws std::invalid_argument("degenerate precoder")
    // when the product is zero.
    ComplexMatrix project_power(const ComplexMatrix &v_rf, const ComplexMatrix &v_bb, double power);

    // Entry-wise z / |z|. Zero entries become 1 (phase 0); their count is written to zero_entries
    // when given and a warning is printed to stderr.
    ComplexMatrix project_unit_modulus(const ComplexMatrix &m, std::size_t *zero_entries = nullptr);

    // Maximum deviation of |m_ij| from 1.
    double unit_modulus_error(const ComplexMatrix &m);
} // namespace hbf

#endif
