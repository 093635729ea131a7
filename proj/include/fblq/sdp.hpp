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
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fblq::sdp {

using Matrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

// Dense Hermitian operator split into diagonal blocks.
struct BlockMatrix {
  std::vector<Matrix> blocks;

  static BlockMatrix zero(const std::vector<int>& dims);
  static BlockMatrix identity(const std::vector<int>& dims);
  double norm() const;  // Frobenius over all blocks
};

// Real Hilbert-Schmidt inner product sum_k Re tr(A_k^dag B_k).
double inner(const BlockMatrix& a, const BlockMatrix& b);

// Constraint coefficients are stored sparsely over blocks: only the blocks a
// constraint touches carry a matrix.
struct SparseBlockMatrix {
  std::vector<std::pair<int, Matrix>> entries;  // (block index, coefficient)
  void add(int block, Matrix coeff);
};

double inner(const SparseBlockMatrix& a, const BlockMatrix& x);

enum class Status { optimal, infeasible, unbounded, max_iterations };

std::string to_string(Status s);

struct Solution {
  BlockMatrix x;  // primal PSD iterate
  RVector y;      // dual multipliers
  BlockMatrix s;  // dual slack
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;  // |primal - dual| at termination
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  Status status = Status::max_iterations;
  int iterations = 0;
  double perturbation = 0.0;  // PSD-cone perturbation applied, 0 if none
  // For infeasible/unbounded statuses, a normalized certificate ray:
  // infeasible -> dual ray y with b.y > 0 and sum_i y_i A_i <= 0;
  // unbounded  -> primal ray X >= 0 with A(X) ~ 0 and <C,X> < 0.
  std::optional<RVector> dual_ray;
  std::optional<BlockMatrix> primal_ray;
};

// Standard-form problem: minimize <C,X> subject to <A_i,X> = b_i, X >= 0
// on a product of Hermitian PSD cones.
struct Problem {
  std::vector<int> block_dims;
  BlockMatrix objective;
  std::vector<SparseBlockMatrix> constraint_ops;
  std::vector<double> rhs;

  int add_block(int dim);
  void set_objective(int block, Matrix coeff);
  void add_constraint(SparseBlockMatrix a, double b);
  int total_dim() const;
  int num_constraints() const { return static_cast<int>(rhs.size()); }

  // Plain-text dump (dimensions, then constraint triples) for external
  // cross-checking.
  void dump(std::ostream& os) const;
};

struct SolverOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-9;
  int max_iterations = 200;
  // Added to the RHS of every corner pin when retrying after a
  // strict-feasibility failure; reported in Solution::perturbation.
  double cone_perturbation = 0.0;
};

Solution solve(const Problem& p, const SolverOptions& opts = {});

// Hermitian coordinate basis of a d-dim block in a fixed deterministic order:
// E_kk, then for k < l the pair (E_kl + E_lk) and i(E_kl - E_lk).
// <basis, X> enumerates X_kk, 2 Re X_kl, 2 Im X_kl.
std::vector<Matrix> hermitian_basis(int d);

// Embeds a small Hermitian matrix at diagonal offset `off` of a dim-d block.
Matrix embed_at(const Matrix& small, int off, int d);

// Adds the m^2 equality constraints pinning the corner of `block` at diagonal
// offset `off` to `target`.
void pin_corner(Problem& p, int block, int off, const Matrix& target);

// Fidelity / trace-norm-overlap machinery.
//
// add_overlap_block introduces a PSD block
//     M = [[ A, Y ], [ Y^dag, Lambda ]]
// whose lower corner is pinned to the positive spectrum Lambda of the fixed
// reference R (compressed to its support, restoring strict feasibility for
// singular references), together with a scalar slack v >= 0 and the
// constraint  <K, M> - v = f_target  encoding  ||sqrt(A) sqrt(R)||_1 >=
// f_target  for the variable upper corner A.  Returns the block index of M;
// the caller addresses A as the corner of M at offset 0.
struct OverlapBlock {
  int block = -1;       // index of the (var_dim + rank) PSD block
  int slack_block = -1; // index of the scalar slack, -1 when add_target=false
  int var_dim = 0;
  int rank = 0;
  Matrix objective_coeff;  // K: <K, M> = Re tr(U^dag Y), the overlap value
};

OverlapBlock add_overlap_block(Problem& p, const Matrix& reference, int var_dim,
                               std::optional<double> f_target);

// Public fidelity constraint: requires a normalized reference density
// operator (tr = 1 within 1e-10) so the generalized-fidelity term vanishes,
// and f_target in [0,1].
OverlapBlock fidelity_block(Problem& p, const Matrix& reference, double f_target);

}  // namespace fblq::sdp
