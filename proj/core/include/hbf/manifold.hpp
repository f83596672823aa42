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

#ifndef HBF_MANIFOLD_HPP
#define HBF_MANIFOLD_HPP

#include "hbf/channel.hpp"
#include "hbf/matrix.hpp"

#include <cstdint>
#include <vector>

namespace hbf
{
    struct MoConfig
    {
        double stop_threshold = 1e-2; // absolute decrease of the objective between outer iterations
        int max_outer_iterations = 100;
        int max_inner_cg_steps = 50;
        // After convergence above stop_threshold, redraw the phases of the least-used RF chain and keep the
        // result if it lowers the objective. Escapes column-collapse stationary points; 0 disables.
        int escape_attempts = 20;

        void validate() const;
    };

    struct MoResult
    {
        ComplexMatrix v_rf;
        std::vector<double> objective_trace; // ||F - V_RF X||_F^2 after every outer iteration (entry 0: initial point)
        int outer_iterations = 0;
        int escapes = 0; // accepted escape attempts
        bool hit_iteration_cap = false;

        double final_objective() const { return objective_trace.back(); }
    };

    // First n_streams right singular vectors of h_est, each scaled by sqrt(P / n_streams).
    ComplexMatrix fd_reference_precoder(const ComplexMatrix &h_est, const SystemConfig &sys);

    // Alternating minimisation of ||F - V_RF X||_F^2: Riemannian conjugate gradient over the unit-modulus
    // entries of V_RF, least squares for X. Only V_RF is returned.
    MoResult mo_analog_precoder(const ComplexMatrix &f_opt, int n_rf, const MoConfig &cfg, std::uint64_t seed);

    namespace manifold_detail
    {
        // Exposed for tests.
        ComplexMatrix least_squares_digital(const ComplexMatrix &v_rf, const ComplexMatrix &f_opt);
        ComplexMatrix euclidean_gradient(const ComplexMatrix &f_opt, const ComplexMatrix &v_rf,
                                         const ComplexMatrix &x);
        // g - Re(g o conj(V)) o V
        ComplexMatrix tangent_projection(const ComplexMatrix &point, const ComplexMatrix &g);
    } // namespace manifold_detail
} // namespace hbf

#endif
