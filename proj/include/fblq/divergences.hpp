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

#include <cstdint>
#include <utility>
#include <vector>

#include "fblq/states.hpp"

namespace fblq::divergences {

using linalg::Matrix;
using states::DensityOperator;

// Two nonnegative weight vectors on a shared index set with cached
// log-likelihood ratios (bits) over the support of p.
struct ClassicalPair {
  std::vector<double> p;  // probability vector, sums to 1
  std::vector<double> q;  // nonnegative weights
  // (llr, p-mass) for every index with p > 0; llr = +inf where q = 0.
  std::vector<std::pair<double, double>> support_llr;
  bool infinite_divergence = false;

  int size() const { return static_cast<int>(p.size()); }
};

ClassicalPair make_classical_pair(std::vector<double> p, std::vector<double> q);

// D in bits, V in bits^2 (variance of the log-likelihood ratio), T in bits
// (cube root of the third absolute central moment).
struct MomentTriple {
  double d = 0.0;
  double v = 0.0;
  double t = 0.0;
  bool infinite = false;  // support violation / infinite divergence
};

// Classical moments of Z = log2 p - log2 q under p.
MomentTriple classical_moments(const ClassicalPair& pair);

// Quantum relative entropy moments. D = tr[rho(log2 rho - log2 sigma)],
// V is the centered second moment, T is taken through the Nussbaum-Szkola
// pair. Support violation sets the infinite flag.
MomentTriple quantum_moments(const DensityOperator& rho, const Matrix& sigma);

// (H(A|B), V(A|B), T) with the sign flip on D; dims = {d_A, d_B}.
MomentTriple conditional_moments(const DensityOperator& rho_ab, const std::vector<int>& dims);

// Nussbaum-Szkola distributions P(x,y) = r_x |<v_x|u_y>|^2 and
// Q(x,y) = s_y |<v_x|u_y>|^2 on the d^2 index set.
ClassicalPair nussbaum_szkola(const DensityOperator& rho, const Matrix& sigma);

// sup{ R | P{Z <= R} <= eps } for the cached llr atoms. With atoms the
// supremum is the smallest llr value whose inclusion pushes the cumulative
// mass strictly above eps. Requires 0 <= eps < 1. May return +-inf.
double ds_classical(const ClassicalPair& pair, double eps);

// Exact D_s for the n-fold i.i.d. pair when the support carries exactly two
// distinct llr values, through a numerically stable binomial CDF.
double ds_iid_exact(const ClassicalPair& pair, std::int64_t n, double eps);

// Same quantity parameterized by 1 - eps, evaluated through the binomial
// survival function so upper-tail quantiles (eps close to 1) keep full
// relative precision.
double ds_iid_exact_tail(const ClassicalPair& pair, std::int64_t n, double one_minus_eps);

struct LatticeResult {
  double value = 0.0;
  double rounding_bound = 0.0;  // n * lattice_tol
};

// Exact D_s of the n-fold pair on a rounded llr lattice (<= 6 distinct
// values) via convolution of the llr-sum distribution.
LatticeResult ds_iid_lattice(const ClassicalPair& pair, int n, double eps,
                             double lattice_tol = 1e-9);

// Regularized-incomplete-beta binomial CDF/SF with small relative error,
// valid up to n ~ 1e8.
double binomial_cdf(std::int64_t k, std::int64_t n, double p);
double binomial_sf(std::int64_t k, std::int64_t n, double p);  // 1 - cdf, stable

// Berry-Esseen sandwich on D_s of the n-fold pair:
//   nD + sqrt(nV) PhiInv(eps -+ shift), shift = C t^3 / (s^3 sqrt(n)).
// Out-of-domain arguments report -inf / +inf; V = 0 collapses to (nD, nD).
std::pair<double, double> berry_esseen_ds(const MomentTriple& m, double n, double eps,
                                          double c = 0.5);

// Quantum information spectrum relative entropy via a grid scan of
// g(R) = tr rho {rho <= 2^R sigma} plus bisection refinement. The scan takes
// the global supremum over satisfying grid points; monotonicity of g is not
// assumed.
double ds_quantum(const DensityOperator& rho, const Matrix& sigma, double eps,
                  int grid_points = 4096, int bisection_steps = 40);

double gaussian_cdf(double x);
double gaussian_quantile(double eps);  // -inf/+inf at 0/1

// nD + sqrt(nV) PhiInv(eps); sign/argument conventions are the caller's.
double second_order(double d, double v, double n, double eps);

}  // namespace fblq::divergences
