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

#include <stdexcept>
#include <vector>

#include "fblq/sdp.hpp"
#include "fblq/states.hpp"

namespace fblq::one_shot {

using linalg::Matrix;
using states::DensityOperator;

// Agreement tolerance (bits) between the Neyman-Pearson fast path and the
// authoritative SDP before a hard failure is raised.
inline constexpr double kCrossCheckTol = 1e-6;

enum class Method {
  sdp,             // solve the defining program (source of truth)
  neyman_pearson,  // structured fast path, falls back to the SDP when degenerate
  cross_check,     // run both, hard-fail beyond kCrossCheckTol, report the SDP
};

class method_disagreement : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OneShotResult {
  double value = 0.0;  // bits; +-inf flags allowed
  double gap = 0.0;    // certified duality gap in bits
  Method method = Method::sdp;
  sdp::Status solver_status = sdp::Status::optimal;
  double perturbation = 0.0;
  // witnesses (empty matrices when not applicable)
  Matrix primal_q;     // dh / hh test operator
  Matrix rho_tilde;    // smoothed state of the max-entropy programs
  Matrix sigma_b;      // conditioning state (hmin / hh dual)
  Matrix dual_n;       // hh_optimized dual witness N
  double dual_eta = 0.0;
};

// Hypothesis testing relative entropy
//   2^{-Dh} = inf{ <Q,sigma> : 0 <= Q <= 1, <Q,rho> >= 1-eps }.
OneShotResult dh(const DensityOperator& rho, const Matrix& sigma, double eps,
                 Method method = Method::cross_check);

// H_h^eps(A|B)_{rho|sigma} = -D_h^eps(rho_AB || 1_A (x) sigma_B); dims = {d_A, d_B}.
OneShotResult hh_conditional(const DensityOperator& rho_ab, const std::vector<int>& dims,
                             const Matrix& sigma_b, double eps,
                             Method method = Method::cross_check);

// Optimized conditional hypothesis testing entropy through the primal
//   2^{Hh} = min ||Q_B|| s.t. 0 <= Q <= 1, <Q,rho> >= 1-eps,
// with the dual witness (N, sigma_B, eta) of the program
//   max eta(1 - eps - tr N) s.t. rho <= (1/eta) 1 (x) sigma_B + N
// attached.
OneShotResult hh_optimized(const DensityOperator& rho_ab, const std::vector<int>& dims,
                           double eps);

// Smooth relative max-entropy: min over rho_tilde ~eps~ rho of
// inf{ lambda : rho_tilde <= 2^lambda sigma }.
OneShotResult dmax_smooth(const DensityOperator& rho, const Matrix& sigma, double eps);

// Smooth min-entropy H_min^eps(A|B) = -log2 min{ tr sigma' :
// rho_tilde <= 1_A (x) sigma', rho_tilde ~eps~ rho }.
OneShotResult hmin_smooth(const DensityOperator& rho_ab, const std::vector<int>& dims,
                          double eps);

}  // namespace fblq::one_shot
