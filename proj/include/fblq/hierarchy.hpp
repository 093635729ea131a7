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
#include <string>
#include <vector>

#include "fblq/divergences.hpp"
#include "fblq/one_shot.hpp"
#include "fblq/states.hpp"

namespace fblq::hierarchy {

using linalg::Matrix;
using states::DensityOperator;

// Pass threshold: every inequality is oriented lhs <= rhs and carries
// slack = rhs - lhs.
inline constexpr double kSlackTol = -1e-6;

struct InequalityReport {
  std::string name;  // "ds-le-dh", "b-4", ...
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs, oriented so slack >= 0 means pass
  double eps = 0.0;
  double delta = 0.0;
  double spectral_factor = 0.0;  // nu(sigma) or theta(sigma) where one enters
  std::string instance;          // descriptor: kind:dim:seed
  bool pass = false;
};

enum class InstanceKind { generic, commuting, cq, degenerate, narrow };

std::string to_string(InstanceKind k);
InstanceKind instance_kind_from_string(const std::string& s);

struct Instance {
  DensityOperator rho;
  Matrix sigma;
  InstanceKind kind = InstanceKind::generic;
  int dim = 2;
  std::uint64_t seed = 0;
  std::string descriptor() const;
};

// Deterministic, self-contained generator (splitmix64 core) so instances are
// bit-identical across platforms. generic: Haar-rotated Dirichlet spectra;
// commuting: shared eigenbasis; cq: CqState with pure conditionals on a qubit
// B and sigma = 1 (x) rho_B; degenerate: sigma with exactly repeated
// eigenvalues; narrow: sigma spectrum inside one octave so 2 ceil(lambda)
// can undercut nu.
Instance random_instance(int dim, InstanceKind kind, std::uint64_t seed);

// Information-spectrum / hypothesis-testing sandwich:
//   D_s^eps <= D_h^eps <= D_s^{eps+delta} - log delta.
std::vector<InequalityReport> verify_spectrum_sandwich(const Instance& inst, double eps,
                                                       double delta);

// The nu(sigma) relation family (reports b-4, b-3, b-1, b-2, b-7b, b-8b)
// tying D_max, D_s of the pinched pair, the Nussbaum-Szkola spectrum and D_h.
std::vector<InequalityReport> verify_nu_relations(const Instance& inst, double eps,
                                                  double delta);

// The refined theta(sigma) relation family (reports b-5, b-6, b-7, b-8)
// bounding D_h and D_max by the classical Nussbaum-Szkola spectrum.
std::vector<InequalityReport> verify_theta_relations(const Instance& inst, double eps,
                                                     double delta);

// Pinching dominance rho <= nu(sigma) E_sigma(rho).
InequalityReport verify_pinching_dominance(const Instance& inst);

// Classical-register chains H_h(A|B) >= H_h(A|XB) >= H_h(XA|B) - log|X| and
// the reverse, on a CQ-over-X state rho_XAB (A, B qubits), plus a pinching
// data-processing check.
std::vector<InequalityReport> verify_hh_props(const states::CqState& rho_x_ab, double eps);

struct SuiteEntry {
  int dim = 2;
  InstanceKind kind = InstanceKind::generic;
  std::uint64_t seed = 0;
  double eps = 0.3;
  double delta = 0.1;
};

struct Suite {
  int version = 0;
  std::vector<SuiteEntry> entries;
};

Suite load_suite(const std::string& path);

// Runs every verifier on every entry; parallel over instances, aggregation
// order fixed by entry order. threads <= 0 reads FBLQ_THREADS / hardware.
std::vector<InequalityReport> run_suite(const Suite& suite, int threads = 0);

void write_csv(std::ostream& os, const std::vector<InequalityReport>& reports);

}  // namespace fblq::hierarchy
