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
#include <iosfwd>
#include <utility>
#include <vector>

#include "fblq/divergences.hpp"
#include "fblq/states.hpp"

namespace fblq::blocklength {

// Per-copy invariants of an i.i.d. CQ source.
struct SourceModel {
  states::CqState rho_xb;
  double h = 0.0;       // H(X|B) in bits
  double v = 0.0;       // V(X|B) in bits^2 (variance of the llr)
  double t = 0.0;       // third-moment root of the Nussbaum-Szkola pair
  double lambda = 0.0;  // lambda(rho_B) in bits
  double c = 0.5;       // Berry-Esseen constant (closed bound)
  divergences::ClassicalPair ns;  // Nussbaum-Szkola pair of (rho_XB, 1 (x) rho_B)

  double s() const;  // sqrt(v)
  int alphabet_bits() const;
};

SourceModel make_source_model(const states::CqState& rho_xb);

// Pauli-channel eavesdropping source; cross-checks its Nussbaum-Szkola pair
// against the closed form entrywise.
SourceModel pauli_source(double p);

struct BoundPair {
  double lower = 0.0;  // bits; -inf when vacuous
  double upper = 0.0;  // bits; +inf when vacuous
  double xi_lower = 0.0;
  double xi_upper = 0.0;
};

// Finite-n compression-length window around nH (both sides absolute, bits):
//   sup/inf over xi of -sqrt(n) s PhiInv(eps +- xi) -+ log-penalty.
// Vacuous sides are reported as -inf/+inf.
BoundPair m_bounds_finite(const SourceModel& src, double n, double eps);

// Finite-n extractable-randomness window around nH.
BoundPair l_bounds_finite(const SourceModel& src, double n, double eps);

// Gaussian approximations:
//   m: nH - sqrt(nV) PhiInv(eps),   l: nH + sqrt(nV) PhiInv(eps^2).
double second_order_m(const SourceModel& src, double n, double eps);
double second_order_l(const SourceModel& src, double n, double eps);

struct CurvePoint {
  double n = 0.0;
  double lower_bits = 0.0;
  double upper_bits = 0.0;
  double lower_rate = 0.0;
  double upper_rate = 0.0;
  double second_order_rate = 0.0;
  double shannon_rate = 0.0;
  double xi_lower = 0.0;
  double xi_upper = 0.0;
  bool clamped_lower = false;
  bool clamped_upper = false;
};

enum class Task { extraction, compression };

struct BoundCurve {
  Task task = Task::extraction;
  double eps = 0.0;
  std::vector<CurvePoint> points;
};

// Exact-binomial pipeline for the Pauli preset: per n, direct and converse
// bounds through D_s of the n-fold Nussbaum-Szkola pair at upper-tail
// quantiles, xi optimized on a log grid with golden-section refinement.
// Rates are clamped to [0, log2|X|] with clamping flagged.
BoundCurve figure1_curves(double p, double eps, const std::vector<double>& n_list,
                          int threads = 0);

// General finite-blocklength bound curves for either task.
BoundCurve general_curves(const SourceModel& src, Task task, double eps,
                          const std::vector<double>& n_list, int threads = 0);

std::vector<double> log_spaced(double n_min, double n_max, int points);

void write_csv(std::ostream& os, const BoundCurve& curve);

}  // namespace fblq::blocklength
