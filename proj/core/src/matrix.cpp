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

#include "hbf/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

namespace hbf
{
    namespace
    {
        // One-sided (Hestenes) Jacobi on a tall matrix, rows >= cols.
        Svd jacobi_svd_tall(const ComplexMatrix &m)
        {
            const Eigen::Index rows = m.rows();
            const Eigen::Index cols = m.cols();
            ComplexMatrix a = m;
            ComplexMatrix v = ComplexMatrix::Identity(cols, cols);
            const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(rows);

            bool converged = false;
            for (int sweep = 0; sweep < svd_max_sweeps && !converged; ++sweep)
            {
                converged = true;
                for (Eigen::Index p = 0; p + 1 < cols; ++p)
                    for (Eigen::Index q = p + 1; q < cols; ++q)
                    {
                        const double alpha = a.col(p).squaredNorm();
                        const double beta = a.col(q).squaredNorm();
                        const cdouble gamma = a.col(p).dot(a.col(q)); // a_p^H a_q
                        const double g = std::abs(gamma);
                        if (g == 0.0 || g <= tol * std::sqrt(alpha * beta))
                            continue;
                        converged = false;

                        const cdouble phase = std::conj(gamma) / g; // e^{-j phi}
                        const double zeta = (beta - alpha) / (2.0 * g);
                        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                        const double c = 1.0 / std::sqrt(1.0 + t * t);
                        const double s = c * t;

                        const ComplexVector ap = a.col(p);
                        const ComplexVector bq = a.col(q) * phase;
                        a.col(p) = c * ap - s * bq;
                        a.col(q) = s * ap + c * bq;

                        const ComplexVector vp = v.col(p);
                        const ComplexVector vq = v.col(q) * phase;
                        v.col(p) = c * vp - s * vq;
                        v.col(q) = s * vp + c * vq;
                    }
            }
            if (!converged)
                throw NumericalError("svd: Jacobi sweeps did not converge within " + std::to_string(svd_max_sweeps) +
                                     " sweeps");

            RealVector norms(cols);
            for (Eigen::Index j = 0; j < cols; ++j)
                norms(j) = a.col(j).norm();

            std::vector<Eigen::Index> order(static_cast<std::size_t>(cols));
            std::iota(order.begin(), order.end(), Eigen::Index{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](Eigen::Index x, Eigen::Index y) { return norms(x) > norms(y); });

            Svd out;
            out.u.resize(rows, cols);
            out.s.resize(cols);
            out.v.resize(cols, cols);
            std::vector<bool> filled(static_cast<std::size_t>(cols), false);
            for (Eigen::Index k = 0; k < cols; ++k)
            {
                const Eigen::Index j = order[static_cast<std::size_t>(k)];
                out.s(k) = norms(j);
                out.v.col(k) = v.col(j);
                if (norms(j) > 0.0 && std::isnormal(norms(j)))
                {
                    out.u.col(k) = a.col(j) / norms(j);
                    filled[static_cast<std::size_t>(k)] = true;
                }
            }

            // Zero singular values: complete U to an orthonormal set.
            Eigen::Index basis = 0;
            for (Eigen::Index k = 0; k < cols; ++k)
            {
                if (filled[static_cast<std::size_t>(k)])
                    continue;
                out.s(k) = 0.0;
                for (; basis < rows; ++basis)
                {
                    ComplexVector e = ComplexVector::Unit(rows, basis);
                    for (int pass = 0; pass < 2; ++pass)
                        for (Eigen::Index i = 0; i < cols; ++i)
                            if (filled[static_cast<std::size_t>(i)])
                                e -= out.u.col(i) * out.u.col(i).dot(e);
                    const double n = e.norm();
                    if (n > 0.5)
                    {
                        out.u.col(k) = e / n;
                        filled[static_cast<std::size_t>(k)] = true;
                        ++basis;
                        break;
                    }
                }
            }
            return out;
        }
    } // namespace

    Svd svd(const ComplexMatrix &m)
    {
        if (m.size() == 0)
            throw std::invalid_argument("svd: empty matrix");
        if (!m.allFinite())
            throw NumericalError("svd: matrix has non-finite entries");

        if (m.rows() >= m.cols())
            return jacobi_svd_tall(m);

        Svd t = jacobi_svd_tall(m.adjoint());
        return Svd{std::move(t.v), std::move(t.s), std::move(t.u)};
    }

    double hermitian_asymmetry(const ComplexMatrix &m)
    {
        if (m.rows() != m.cols())
            throw std::invalid_argument("hermitian_asymmetry: matrix is not square (" + shape_string(m) + ")");
        return (m - m.adjoint()).cwiseAbs().maxCoeff();
    }

    bool is_hermitian(const ComplexMatrix &m, double tol)
    {
        if (m.rows() != m.cols())
            return false;
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        return hermitian_asymmetry(m) <= tol * scale;
    }

    ComplexMatrix hermitian_part(const ComplexMatrix &m)
    {
        return 0.5 * (m + m.adjoint());
    }

    ComplexMatrix cholesky_lower(const ComplexMatrix &m)
    {
        if (m.rows() != m.cols() || m.size() == 0)
            throw std::invalid_argument("cholesky: expected a non-empty square matrix, got " + shape_string(m));
        if (!is_hermitian(m))
            throw std::invalid_argument("cholesky: matrix is not Hermitian (asymmetry " +
                                        std::to_string(hermitian_asymmetry(m)) + ")");

        const Eigen::Index n = m.rows();
        const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
                             m.diagonal().real().cwiseAbs().maxCoeff();

        ComplexMatrix l = ComplexMatrix::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
        {
            double d = m(j, j).real();
            for (Eigen::Index k = 0; k < j; ++k)
                d -= std::norm(l(j, k));
            if (!(d > floor))
                throw NotPositiveDefinite("not positive definite: pivot " + std::to_string(j) + " is " +
                                          std::to_string(d));
            const double ljj = std::sqrt(d);
            l(j, j) = ljj;
            for (Eigen::Index i = j + 1; i < n; ++i)
            {
                cdouble acc = m(i, j);
                for (Eigen::Index k = 0; k < j; ++k)
                    acc -= l(i, k) * std::conj(l(j, k));
                l(i, j) = acc / ljj;
            }
        }
        return l;
    }

    double logdet_hermitian_pd(const ComplexMatrix &m)
    {
        const ComplexMatrix l = cholesky_lower(m);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < l.rows(); ++i)
            acc += std::log2(l(i, i).real());
        return 2.0 * acc;
    }

    ComplexMatrix hermitian_solve(const ComplexMatrix &a, const ComplexMatrix &b)
    {
        if (a.rows() != b.rows())
            throw std::invalid_argument("hermitian_solve: incompatible shapes " + shape_string(a) + " and " +
                                        shape_string(b));
        const ComplexMatrix l = cholesky_lower(a);
        const auto lower = l.triangularView<Eigen::Lower>();
        ComplexMatrix y = lower.solve(b);
        return lower.adjoint().solve(y);
    }

    double frobenius_norm_sq(const ComplexMatrix &m)
    {
        return m.squaredNorm();
    }

    std::string shape_string(const ComplexMatrix &m)
    {
        std::ostringstream os;
        os << m.rows() << "x" << m.cols();
        return os.str();
    }
} // namespace hbf
