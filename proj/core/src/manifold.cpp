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

#include "hbf/manifold.hpp"
#include "hbf/metrics.hpp"
#include "hbf/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hbf
{
    void MoConfig::validate() const
    {
        if (!(stop_threshold > 0.0))
            throw std::invalid_argument("mo: stop_threshold must be positive");
        if (max_outer_iterations < 1 || max_inner_cg_steps < 1)
            throw std::invalid_argument("mo: iteration caps must be positive");
        if (escape_attempts < 0)
            throw std::invalid_argument("mo: escape_attempts must be non-negative");
    }

    ComplexMatrix fd_reference_precoder(const ComplexMatrix &h_est, const SystemConfig &sys)
    {
        if (h_est.cols() != sys.n_tx_antennas || h_est.rows() != sys.n_rx_antennas)
            throw std::invalid_argument("fd_reference_precoder: channel shape does not match system config");
        const Svd d = svd(h_est);
        const Eigen::Index ns = sys.n_streams;
        if (d.v.cols() < ns)
            throw std::invalid_argument("fd_reference_precoder: n_streams exceeds min(n_rx, n_tx)");
        return std::sqrt(sys.transmit_power / static_cast<double>(ns)) * d.v.leftCols(ns);
    }

    namespace manifold_detail
    {
        ComplexMatrix least_squares_digital(const ComplexMatrix &v_rf, const ComplexMatrix &f_opt)
        {
            return v_rf.completeOrthogonalDecomposition().solve(f_opt);
        }

        ComplexMatrix euclidean_gradient(const ComplexMatrix &f_opt, const ComplexMatrix &v_rf,
                                         const ComplexMatrix &x)
        {
            return -2.0 * (f_opt - v_rf * x) * x.adjoint();
        }

        ComplexMatrix tangent_projection(const ComplexMatrix &point, const ComplexMatrix &g)
        {
            const Eigen::ArrayXXd radial = (g.array() * point.array().conjugate()).real();
            return (g.array() - radial.cast<cdouble>() * point.array()).matrix();
        }
    } // namespace manifold_detail

    namespace
    {
        using namespace manifold_detail;

        double objective(const ComplexMatrix &f, const ComplexMatrix &v, const ComplexMatrix &x)
        {
            return (f - v * x).squaredNorm();
        }

        double real_inner(const ComplexMatrix &a, const ComplexMatrix &b)
        {
            return (a.array().conjugate() * b.array()).real().sum();
        }

        // Objective with X at its least-squares optimum for v; x receives that optimum.
        double reduced_objective(const ComplexMatrix &f, const ComplexMatrix &v, ComplexMatrix &x)
        {
            x = least_squares_digital(v, f);
            return objective(f, v, x);
        }

        // Riemannian CG on V. X is refit by least squares at every trial point, so the partial gradient in X
        // vanishes and the V-gradient at the refit X is the gradient of the reduced objective.
        ComplexMatrix cg_phase_step(const ComplexMatrix &f, ComplexMatrix v, int max_steps)
        {
            constexpr double armijo_c = 1e-4;
            constexpr int max_backtracks = 40;

            ComplexMatrix x;
            double value = reduced_objective(f, v, x);
            ComplexMatrix grad = tangent_projection(v, euclidean_gradient(f, v, x));
            ComplexMatrix dir = -grad;
            double grad_sq = grad.squaredNorm();

            // Lipschitz estimate of the Euclidean gradient for fixed X: 2 ||X X^H||_2 <= 2 ||X||_F^2.
            double step = 1.0 / std::max(2.0 * x.squaredNorm(), 1e-300);

            for (int k = 0; k < max_steps; ++k)
            {
                if (grad_sq <= 1e-28 * std::max(1.0, value))
                    break;
                double slope = real_inner(grad, dir);
                if (slope >= 0.0)
                {
                    dir = -grad;
                    slope = -grad_sq;
                }

                double t = step;
                ComplexMatrix trial, trial_x;
                double trial_value = value;
                bool accepted = false;
                for (int b = 0; b < max_backtracks; ++b)
                {
                    trial = project_unit_modulus(v + t * dir);
                    trial_value = reduced_objective(f, trial, trial_x);
                    if (trial_value <= value + armijo_c * t * slope)
                    {
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
                if (!accepted || trial_value >= value)
                    break;

                const double decrease = value - trial_value;
                v = std::move(trial);
                x = std::move(trial_x);
                value = trial_value;
                step = 2.0 * t;

                ComplexMatrix new_grad = tangent_projection(v, euclidean_gradient(f, v, x));
                const double new_sq = new_grad.squaredNorm();
                const double beta = std::max(0.0, new_sq / grad_sq); // Fletcher-Reeves
                dir = -new_grad + beta * tangent_projection(v, dir);
                grad = std::move(new_grad);
                grad_sq = new_sq;

                if (decrease <= 1e-15 * std::max(1.0, value))
                    break;
            }
            return v;
        }
    } // namespace

    MoResult mo_analog_precoder(const ComplexMatrix &f_opt, int n_rf, const MoConfig &cfg, std::uint64_t seed)
    {
        cfg.validate();
        if (n_rf < f_opt.cols())
            throw std::invalid_argument("mo_analog_precoder: n_rf must be >= n_streams");
        if (n_rf > f_opt.rows())
            throw std::invalid_argument("mo_analog_precoder: n_rf must be <= n_tx");

        Rng rng(seed);
        MoResult r;
        ComplexMatrix v = random_phase_matrix(rng, f_opt.rows(), n_rf);
        ComplexMatrix x = least_squares_digital(v, f_opt);
        double value = objective(f_opt, v, x);
        r.objective_trace.push_back(value);

        r.hit_iteration_cap = true;
        int escapes_left = cfg.escape_attempts;
        int rejected = 0; // consecutive rejected escapes; selects the next-weakest chain
        const ComplexMatrix basis =
            f_opt.householderQr().householderQ() * ComplexMatrix::Identity(f_opt.rows(), f_opt.cols());
        for (int it = 0; it < cfg.max_outer_iterations; ++it)
        {
            ComplexMatrix v_next = cg_phase_step(f_opt, v, cfg.max_inner_cg_steps);
            ComplexMatrix x_next = least_squares_digital(v_next, f_opt);
            double next = objective(f_opt, v_next, x_next);
            // The least-squares refit is optimal for v_next, so this only guards round-off.
            if (next > value)
            {
                v_next = v;
                x_next = x;
                next = value;
            }
            double decrease = value - next;

            while (decrease < cfg.stop_threshold && next >= cfg.stop_threshold && escapes_left > 0)
            {
                --escapes_left;
                // Chains ranked by how much of their energy lies in span(F), weakest first.
                const Eigen::RowVectorXd overlap = (basis.adjoint() * v_next).colwise().squaredNorm();
                std::vector<Eigen::Index> order(static_cast<std::size_t>(overlap.size()));
                std::iota(order.begin(), order.end(), Eigen::Index{0});
                std::stable_sort(order.begin(), order.end(),
                                 [&](Eigen::Index a, Eigen::Index b) { return overlap[a] < overlap[b]; });
                const Eigen::Index weakest = order[static_cast<std::size_t>(rejected) % order.size()];
                ComplexMatrix trial = v_next;
                // Part of span(F) the remaining chains do not reach; steer a random phase vector towards it with
                // phase-only power iterations.
                ComplexMatrix others(trial.rows(), trial.cols() - 1);
                for (Eigen::Index c = 0, k = 0; c < trial.cols(); ++c)
                    if (c != weakest)
                        others.col(k++) = trial.col(c);
                const ComplexMatrix missing =
                    others.cols() == 0 ? basis : ComplexMatrix(basis - others * least_squares_digital(others, basis));
                ComplexMatrix w = random_phase_matrix(rng, trial.rows(), 1);
                for (int p = 0; p < 50; ++p)
                    w = project_unit_modulus(missing * (missing.adjoint() * w));
                trial.col(weakest) = w;
                trial = cg_phase_step(f_opt, trial, cfg.max_inner_cg_steps);
                ComplexMatrix trial_x = least_squares_digital(trial, f_opt);
                const double trial_value = objective(f_opt, trial, trial_x);
                if (trial_value >= next)
                    ++rejected;
                else
                {
                    v_next = std::move(trial);
                    x_next = std::move(trial_x);
                    next = trial_value;
                    decrease = value - next;
                    ++r.escapes;
                    rejected = 0;
                }
            }

            v = std::move(v_next);
            x = std::move(x_next);
            value = next;
            r.objective_trace.push_back(value);
            r.outer_iterations = it + 1;
            if (decrease < cfg.stop_threshold)
            {
                r.hit_iteration_cap = false;
                break;
            }
        }
        r.v_rf = project_unit_modulus(v);
        return r;
    }
} // namespace hbf
