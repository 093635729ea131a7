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

#include "fblq/linalg.hpp"

#include <cmath>

namespace fblq::linalg {

Matrix hermitize(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) {
    throw linalg_error("hermitize: matrix is not square");
  }
  if (!a.allFinite()) {
    throw linalg_error("hermitize: non-finite entries");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double dev = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (dev > tol * scale) {
    throw linalg_error("hermitize: deviation from hermiticity " + std::to_string(dev) +
                       " exceeds tolerance " + std::to_string(tol * scale));
  }
  return 0.5 * (a + a.adjoint());
}

EigenSystem eig_hermitian(const Matrix& a) {
  const Matrix h = hermitize(a);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw linalg_error("eig_hermitian: eigensolver failed to converge");
  }
  return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

double op_norm(const Matrix& a) {
  const EigenSystem es = eig_hermitian(a);
  if (es.eigenvalues.size() == 0) return 0.0;
  return es.eigenvalues.cwiseAbs().maxCoeff();
}

namespace {

double zero_tol(const Vector& eigenvalues) {
  const double norm = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  return kSupportTol * norm;
}

}  // namespace

Matrix nonneg_projector(const Matrix& a) {
  const EigenSystem es = eig_hermitian(a);
  const double tol = zero_tol(es.eigenvalues);
  Matrix p = Matrix::Zero(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
    if (es.eigenvalues(i) >= -tol) {
      p.noalias() += es.eigenvectors.col(i) * es.eigenvectors.col(i).adjoint();
    }
  }
  return p;
}

Matrix pos_projector(const Matrix& a) {
  const EigenSystem es = eig_hermitian(a);
  const double tol = zero_tol(es.eigenvalues);
  Matrix p = Matrix::Zero(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
    if (es.eigenvalues(i) > tol) {
      p.noalias() += es.eigenvectors.col(i) * es.eigenvectors.col(i).adjoint();
    }
  }
  return p;
}

Matrix support_projector(const Matrix& a) { return pos_projector(a); }

Matrix matrix_fn(const Matrix& a, ScalarFn f) {
  const EigenSystem es = eig_hermitian(a);
  const double tol = zero_tol(es.eigenvalues);
  Vector mapped(es.eigenvalues.size());
  bool has_support = false;
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
    const double ev = es.eigenvalues(i);
    if (std::abs(ev) <= tol) {
      mapped(i) = 0.0;  // support convention
      continue;
    }
    if (ev < 0.0) {
      throw linalg_error("matrix_fn: negative eigenvalue outside support tolerance");
    }
    has_support = true;
    switch (f) {
      case ScalarFn::sqrt:
        mapped(i) = std::sqrt(ev);
        break;
      case ScalarFn::log2:
        mapped(i) = std::log2(ev);
        break;
      case ScalarFn::inverse:
        mapped(i) = 1.0 / ev;
        break;
    }
  }
  if (f == ScalarFn::inverse && !has_support) {
    throw linalg_error("matrix_fn: inverse of an operator with full kernel");
  }
  return es.eigenvectors * mapped.asDiagonal() * es.eigenvectors.adjoint();
}

double trace_positive_part(const Matrix& a) {
  const EigenSystem es = eig_hermitian(a);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
    if (es.eigenvalues(i) > 0.0) sum += es.eigenvalues(i);
  }
  return sum;
}

Matrix pinch_with_projectors(const Matrix& a, const std::vector<Matrix>& projectors) {
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (const Matrix& p : projectors) {
    out.noalias() += p * a * p;
  }
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace fblq::linalg
