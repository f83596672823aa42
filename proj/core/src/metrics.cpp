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

#include "hbf/metrics.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace hbf
{
    namespace
    {
        void check_shapes(const ComplexMatrix &h, const HybridWeights &w)
        {
            const bool ok = w.v_rf.rows() == h.cols() && w.v_bb.rows() == w.v_rf.cols() &&
                            w.w_rf.rows() == h.rows() && w.w_bb.rows() == w.w_rf.cols() &&
                            w.v_bb.cols() == w.w_bb.cols();
            if (!ok)
                throw std::invalid_argument("hybrid weights: shapes do not chain (H " + shape_string(h) + ", V_RF " +
                                            shape_string(w.v_rf) + ", V_BB " + shape_string(w.v_bb) + ", W_RF " +
                                            shape_string(w.w_rf) + ", W_BB " + shape_string(w.w_bb) + ")");
        }

        // L^-1 W^H H V with Cn / sigma^2 = W^H W = L L^H, so that Cn^-1 W^H H V V^H H^H W is similar to
        // (1/sigma^2) M M^H.
        ComplexMatrix whitened_gain(const ComplexMatrix &h, const HybridWeights &w)
        {
            const ComplexMatrix comb = w.combiner();
            const ComplexMatrix gram = hermitian_part(comb.adjoint() * comb);
            ComplexMatrix l;
            try
            {
                l = cholesky_lower(gram);
            }
            catch (const NotPositiveDefinite &)
            {
                throw RankDeficientCombiner();
            }
            const ComplexMatrix g = comb.adjoint() * (h * w.precoder());
            return l.triangularView<Eigen::Lower>().solve(g);
        }
    } // namespace

    double spectral_efficiency(const ComplexMatrix &h, const HybridWeights &w, double noise_variance)
    {
        check_shapes(h, w);
        if (!(noise_variance > 0.0))
            throw std::invalid_argument("spectral_efficiency: noise variance must be positive");
        const ComplexMatrix m = whitened_gain(h, w);
        const Eigen::Index ns = m.rows();
        const ComplexMatrix inner =
            ComplexMatrix::Identity(ns, ns) + hermitian_part(m * m.adjoint()) / noise_variance;
        return logdet_hermitian_pd(inner);
    }

    double rate_upper_bound(const ComplexMatrix &h_est, const HybridWeights &w, const SystemConfig &sys)
    {
        check_shapes(h_est, w);
        const double b2 = sys.beta_sq();
        const ComplexMatrix m = whitened_gain(h_est, w);
        const Eigen::Index ns = m.rows();
        const double floor = 1.0 + b2 * sys.transmit_power / sys.noise_variance;
        const ComplexMatrix inner = floor * ComplexMatrix::Identity(ns, ns) +
                                    ((1.0 - b2) / sys.noise_variance) * hermitian_part(m * m.adjoint());
        return logdet_hermitian_pd(inner);
    }

    ComplexMatrix mmse_digital_combiner(const ComplexMatrix &h_est, const ComplexMatrix &v_rf,
                                        const ComplexMatrix &v_bb, const ComplexMatrix &w_rf,
                                        const SystemConfig &sys)
    {
        if (v_rf.rows() != h_est.cols() || v_bb.rows() != v_rf.cols() || w_rf.rows() != h_est.rows())
            throw std::invalid_argument("mmse_digital_combiner: incompatible shapes");
        const double b2 = sys.beta_sq();
        // W_RF^H Psi W_RF = (1-b^2) T T^H + (b^2 P + sigma^2) W_RF^H W_RF with T = W_RF^H H~ V;
        // avoids forming the n_rx x n_rx matrix Psi.
        const ComplexMatrix t = w_rf.adjoint() * (h_est * (v_rf * v_bb));
        const ComplexMatrix inner =
            hermitian_part((1.0 - b2) * (t * t.adjoint()) +
                           (b2 * sys.transmit_power + sys.noise_variance) * (w_rf.adjoint() * w_rf));
        return std::sqrt(1.0 - b2) * hermitian_solve(inner, t);
    }

    ComplexMatrix project_power(const ComplexMatrix &v_rf, const ComplexMatrix &v_bb, double power)
    {
        if (v_rf.cols() != v_bb.rows())
            throw std::invalid_argument("project_power: incompatible shapes");
        if (!(power > 0.0))
            throw std::invalid_argument("project_power: power must be positive");
        const double current = (v_rf * v_bb).squaredNorm();
        if (!(current > 0.0) || !std::isfinite(current))
            throw std::invalid_argument("degenerate precoder");
        const double c = std::sqrt(power / current);
        if (std::abs(c - 1.0) <= 2.0 * std::numeric_limits<double>::epsilon())
            return v_bb;
        return c * v_bb;
    }

    ComplexMatrix project_unit_modulus(const ComplexMatrix &m, std::size_t *zero_entries)
    {
        ComplexMatrix out(m.rows(), m.cols());
        std::size_t zeros = 0;
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i)
            {
                const double r = std::abs(m(i, j));
                if (r == 0.0)
                {
                    out(i, j) = 1.0;
                    ++zeros;
                }
                else
                    out(i, j) = m(i, j) / r;
            }
        if (zeros > 0)
            std::cerr << "warning: project_unit_modulus replaced " << zeros << " zero entries with phase 0\n";
        if (zero_entries)
            *zero_entries = zeros;
        return out;
    }

    double unit_modulus_error(const ComplexMatrix &m)
    {
        if (m.size() == 0)
            return 0.0;
        return (m.cwiseAbs().array() - 1.0).abs().maxCoeff();
    }
} // namespace hbf
