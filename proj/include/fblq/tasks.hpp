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

#include <vector>

#include "fblq/one_shot.hpp"
#include "fblq/states.hpp"

namespace fblq::tasks {

using linalg::Matrix;

// Seeded function family X -> Z with uniform seed weight.
struct HashFamily {
  int domain_bits = 0;  // |X| = 2^k
  int range_bits = 0;   // |Z| = 2^l
  std::vector<std::vector<int>> tables;  // tables[s][x] = z

  int domain_size() const { return 1 << domain_bits; }
  int range_size() const { return 1 << range_bits; }
  int num_seeds() const { return static_cast<int>(tables.size()); }
  double seed_probability() const { return 1.0 / num_seeds(); }
};

// Binary Toeplitz family over GF(2), exhaustively enumerated over the
// 2^{k+l-1} diagonal seeds. Two-universal with collision probability exactly
// 1/|Z| for every pair.
HashFamily toeplitz_family(int k, int l);

// max over x != x' of Pr_s[h_s(x) = h_s(x')], checked exhaustively.
double max_collision_probability(const HashFamily& family);

struct ExtractionProtocol {
  HashFamily family;
};

// Final CQ-CQ state over (Z, B, S): blocks[s][z] = p_s sum_{x in h_s^{-1}(z)} p_x phi_x.
struct ExtractionOutput {
  int range_size = 1;
  int dim_b = 1;
  std::vector<std::vector<Matrix>> blocks;  // [seed][z]
  double total_trace() const;
};

ExtractionOutput apply_extraction(const states::CqState& rho_xb,
                                  const ExtractionProtocol& protocol);

// d_sec = min_{sigma_B} P(tau_ZBS, pi_Z (x) sigma_B (x) tau_S), through the
// fidelity-maximization SDP over sigma_B.
double dsec_exact(const ExtractionOutput& tau);

struct ExtractionResult {
  int length_bits = 0;
  ExtractionProtocol protocol;
  double d_sec = 0.0;
  double hmin_smoothed = 0.0;  // H_min^{eps-eta}(X|B)
};

// Two-universal-hashing construction at the prescribed length
//   l = floor(H_min^{eps-eta}(X|B) + log eta^4 - 2),
// verified by exact evaluation of d_sec.
ExtractionResult direct_extraction(const states::CqState& rho_xb, double eps, double eta);

struct CompressionProtocol {
  HashFamily encoders;
  // povm[s][m][x]: decoder element M_x^{s,m}; zero when e_s(x) != m.
  std::vector<std::vector<std::vector<Matrix>>> povm;
};

// Pretty-good-measurement decoder built from a primal witness classical on X:
// M_x^{s,m} = G^{-1/2} Q_B^x G^{-1/2} with G = sum_{z in e_s^{-1}(m)} Q_B^z,
// inverse square roots on the support (deficiency decodes to abstain).
CompressionProtocol pgm_decoder(const Matrix& q_xb_classical, int num_symbols, int dim_b,
                                const HashFamily& encoders);

// Exact average error E_s sum_x p_x (1 - tr[phi_x M_x^{s, e_s(x)}]).
double perr_exact(const states::CqState& rho_xb, const CompressionProtocol& protocol);

struct CompressionResult {
  int length_bits = 0;
  CompressionProtocol protocol;
  double p_err = 0.0;
  double hh_smoothed = 0.0;  // H_h^{eps-eta}(X|B)_{rho|rho}
};

// Two-universal encoder at the prescribed length
//   m = ceil(H_h^{eps-eta}(X|B)_{rho|rho} + log((2+c+1/c)/(eta - c(eps-eta)))),
// c = eta/(2 eps - eta), with the pretty-good-measurement decoder.
CompressionResult direct_compression(const states::CqState& rho_xb, double eps, double eta);

// Exact m^eps oracle for tiny instances (|X| <= 4, dim B <= 2): enumerates
// deterministic encoders, solving a minimum-error discrimination SDP per
// codeword class; returns log2 of the smallest feasible |M|.
double brute_force_m(const states::CqState& rho_xb, double eps);

// Seeded-function families serialize to the scenario text format (key =
// value lines with JSON values) so protocols can be replayed.
std::string serialize_family(const HashFamily& family);
HashFamily parse_family(const std::string& text);

}  // namespace fblq::tasks
