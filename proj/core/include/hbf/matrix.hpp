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

#ifndef HBF_MATRIX_HPP
#define HBF_MATRIX_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace hbf
{
    using cdouble = std::complex<double>;
    using ComplexMatrix = Eigen::MatrixXcd;
    using ComplexVector = Eigen::VectorXcd;
    using RealMatrix = Eigen::MatrixXd;
    using RealVector = Eigen::VectorXd;

    // Raised when a numerical routine cannot produce a valid result (non-convergence,
    // indefinite input, rank deficiency). Shape and argument errors use std::invalid_argument.
    class NumericalError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class NotPositiveDefinite : public NumericalError
    {
    public:
        using NumericalError::NumericalError;
    };

    // Maximum absolute asymmetry tolerated by the Hermitian checks, relative to max(1, max|m_ij|).
    inline constexpr double hermitian_tolerance = 1e-10;

    struct Svd
    {
        ComplexMatrix u;      // rows(m) x min(rows, cols), orthonormal columns
        RealVector s;         // descending, non-negative
        ComplexMatrix v;      // cols(m) x min(rows, cols), orthonormal columns
    };

    // Thin SVD, m = U diag(s) V^H. Throws NumericalError on non-finite input or when the
    // two-sided Jacobi sweeps fail to converge within svd_max_sweeps.
    inline constexpr int svd_max_sweeps = 100;
    Svd svd(const ComplexMatrix &m);

    // Largest |m_ij - conj(m_ji)|.
    double hermitian_asymmetry(const ComplexMatrix &m);
    bool is_hermitian(const ComplexMatrix &m, double tol = hermitian_tolerance);

    // (m + m^H) / 2
    ComplexMatrix hermitian_part(const ComplexMatrix &m);

    // Lower Cholesky factor L with m = L L^H. A pivot is rejected as non-positive when it
    // falls below n * eps * max|m_ii|, so numerically singular inputs are reported too.
    ComplexMatrix cholesky_lower(const ComplexMatrix &m);

    // log2 det(m) for Hermitian positive definite m, from the Cholesky diagonal.
    double logdet_hermitian_pd(const ComplexMatrix &m);

    // Solves a x = b for Hermitian positive definite a.
    ComplexMatrix hermitian_solve(const ComplexMatrix &a, const ComplexMatrix &b);

    double frobenius_norm_sq(const ComplexMatrix &m);

    std::string shape_string(const ComplexMatrix &m);
} // namespace hbf

#endif
