// Copyright 2026 The fblq authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fblq::linalg {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

// Thrown when an input violates a precondition (non-Hermitian input,
// inverse of an operator with full kernel, ...).
class linalg_error : public std::runtime_error {
 public:
  explicit linalg_error(const std::string& what) : std::runtime_error(what) {}
};

// Relative tolerance below which an entry-wise deviation from hermiticity
// is accepted and symmetrized away.
inline constexpr double kHermTol = 1e-12;

// Eigenvalues with |lambda| <= kSupportTol * op_norm(A) count as exact zeros.
inline constexpr double kSupportTol = 1e-12;

struct EigenSystem {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // unitary, columns match eigenvalues
};

// Checks hermiticity within tolerance and returns the symmetrized (A + A^dag)/2.
// Throws linalg_error if the deviation exceeds the tolerance.
Matrix hermitize(const Matrix& a, double tol = kHermTol);

// Dense Hermitian eigendecomposition with ascending eigenvalues.
EigenSystem eig_hermitian(const Matrix& a);

// Schatten infinity norm of a Hermitian operator (largest |eigenvalue|).
double op_norm(const Matrix& a);

// Projector onto the span of eigenvectors of A with eigenvalue >= -zero_tol(A),
// i.e. the operator {A >= 0}.  {A >= B} is nonneg_projector(A - B) and
// {A > 0} is identity - nonneg_projector(-A).
Matrix nonneg_projector(const Matrix& a);

// Projector onto the strictly positive part, {A > 0}.
Matrix pos_projector(const Matrix& a);

// Projector onto the support of a PSD operator (eigenvalues above the
// support tolerance).
Matrix support_projector(const Matrix& a);

enum class ScalarFn { sqrt, log2, inverse };

// U f(diag) U^dag with the support convention: eigenvalues below the support
// tolerance are treated as exact zeros and map to 0 under log2 and inverse.
// sqrt/log2 of a genuinely negative eigenvalue and inverse of the zero
// operator are rejected.
Matrix matrix_fn(const Matrix& a, ScalarFn f);

// Sum of positive eigenvalues, tr[(A)_+].  Used by the Neyman-Pearson dual.
double trace_positive_part(const Matrix& a);

// Pinching by an orthogonal projector family: sum_i P_i A P_i.
Matrix pinch_with_projectors(const Matrix& a, const std::vector<Matrix>& projectors);

inline Matrix identity(int d) { return Matrix::Identity(d, d); }

// Kronecker product, left factor most significant.
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace fblq::linalg
