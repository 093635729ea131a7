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

#include <limits>
#include <vector>

#include "fblq/linalg.hpp"

namespace fblq::states {

using linalg::Matrix;

// Default relative eigenvalue gap below which two eigenvalues of a pinching
// reference count as one eigenspace.
inline constexpr double kClusterTol = 1e-9;

// A positive semi-definite operator with trace in (0, 1]. `normalized` is
// derived from the trace at construction.
struct DensityOperator {
  Matrix op;
  bool normalized = false;

  int dim() const { return static_cast<int>(op.rows()); }
  double trace() const { return op.trace().real(); }
};

// Validates positivity/trace invariants and returns the value type.
DensityOperator make_density(const Matrix& op);

// Classical-quantum state sum_x p_x |x><x| (x) phi_x with the classical
// register as the left (most significant) tensor factor.
struct CqState {
  struct Entry {
    double probability;
    DensityOperator conditional;  // normalized state on B
  };
  std::vector<Entry> entries;
  int dim_b = 0;

  int num_symbols() const { return static_cast<int>(entries.size()); }
  int dim() const { return num_symbols() * dim_b; }
  Matrix full_operator() const;
  DensityOperator marginal_b() const;
};

CqState make_cq_state(const std::vector<double>& probs, const std::vector<Matrix>& conditionals);

struct SpectralStats {
  int nu = 1;        // clustered distinct eigenvalue count
  double lambda = 0; // log2(lambda_max / lambda_min) in bits, +inf if singular
  int theta = 1;     // min{2 max(1, ceil(lambda)), nu}
};

// Tensor products; left factor most significant.
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
DensityOperator tensor_power(const DensityOperator& rho, int n);  // total dim <= 64

// Traces out subsystem `which` (0-based) from a state on the tensor product
// with the given factor dimensions.
Matrix partial_trace(const Matrix& m, const std::vector<int>& dims, int which);

// Reorders tensor factors: perm[k] = original index of the k-th new factor.
Matrix permute_systems(const Matrix& m, const std::vector<int>& dims,
                       const std::vector<int>& perm);

// Eigenspace projectors of sigma after clustering its spectrum.
std::vector<Matrix> eigenspace_projectors(const Matrix& sigma, double cluster_tol = kClusterTol);

// Pinching in the eigenbasis of sigma: E_sigma(rho) = sum_s P_s rho P_s.
DensityOperator pinching(const Matrix& sigma, const DensityOperator& rho,
                         double cluster_tol = kClusterTol);

// Generalized fidelity tr|sqrt(rho) sqrt(tau)| + sqrt((1-tr rho)(1-tr tau))
// for (possibly subnormalized) states.
double fidelity(const DensityOperator& rho, const DensityOperator& tau);
double purified_distance(const DensityOperator& rho, const DensityOperator& tau);
// Generalized trace distance (1/2)tr|rho-tau| + (1/2)|tr rho - tr tau|.
double trace_distance(const DensityOperator& rho, const DensityOperator& tau);

// nu / lambda / theta of a PSD operator. Singular sigma reports lambda = +inf
// and theta = nu.
SpectralStats spectral_stats(const Matrix& sigma, double cluster_tol = kClusterTol);

}  // namespace fblq::states
