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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fblq/hierarchy.hpp"

using namespace fblq;
using hierarchy::InstanceKind;
using linalg::Matrix;

TEST_CASE("random_instance determinism and shapes") {
  auto a = hierarchy::random_instance(3, InstanceKind::generic, 42);
  auto b = hierarchy::random_instance(3, InstanceKind::generic, 42);
  CHECK((a.rho.op - b.rho.op).norm() == 0.0);  // bit-identical
  CHECK((a.sigma - b.sigma).norm() == 0.0);

  // generic: full rank
  auto es = linalg::eig_hermitian(a.rho.op);
  CHECK(es.eigenvalues.minCoeff() > 1e-6);

  // commuting kind: commutator vanishes
  auto c = hierarchy::random_instance(3, InstanceKind::commuting, 7);
  CHECK((c.rho.op * c.sigma - c.sigma * c.rho.op).norm() < 1e-12);

  // cq kind: sigma = 1 (x) rho_B
  auto q = hierarchy::random_instance(2, InstanceKind::cq, 9);
  CHECK(q.rho.dim() == 4);
  const Matrix rb = states::partial_trace(q.rho.op, {2, 2}, 0);
  CHECK((q.sigma - linalg::kron(Matrix::Identity(2, 2), rb)).norm() < 1e-12);

  // degenerate kind: sigma has a repeated eigenvalue
  auto dg = hierarchy::random_instance(3, InstanceKind::degenerate, 5);
  CHECK(states::spectral_stats(dg.sigma).nu < 3);

  // narrow kind: theta takes the lambda branch (2 ceil(lambda) < nu)
  auto nr = hierarchy::random_instance(4, InstanceKind::narrow, 5);
  auto st = states::spectral_stats(nr.sigma);
  CHECK(st.lambda < 1.0);
  CHECK(st.theta == 2);
  CHECK(st.nu == 4);
}

TEST_CASE("spectrum sandwich on rho = sigma and commuting kinds") {
  // rho = sigma: D_s = 0 <= D_h = log 1/(1-eps)
  hierarchy::Instance inst;
  inst.rho = states::make_density(Matrix::Identity(2, 2) / 2.0);
  inst.sigma = inst.rho.op;
  inst.kind = InstanceKind::commuting;
  inst.dim = 2;
  auto reports = hierarchy::verify_spectrum_sandwich(inst, 0.3, 0.1);
  for (const auto& r : reports) CHECK(r.pass);
  CHECK(std::abs(reports[0].lhs) < 1e-6);                          // D_s ~ 0
  CHECK(reports[0].rhs == doctest::Approx(std::log2(1.0 / 0.7)));  // D_h

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto c = hierarchy::random_instance(2, InstanceKind::commuting, seed);
    for (const auto& r : hierarchy::verify_spectrum_sandwich(c, 0.1, 0.05)) CHECK(r.pass);
  }
}

TEST_CASE("commuting instances unify the Class 3/4 quantities") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto inst = hierarchy::random_instance(3, InstanceKind::commuting, 100 + seed);
    const double eps = 0.25;
    const double ds_q = divergences::ds_quantum(inst.rho, inst.sigma, eps);
    const auto ns = divergences::nussbaum_szkola(inst.rho, inst.sigma);
    const double ds_ns = divergences::ds_classical(ns, eps);
    CHECK(ds_q == doctest::Approx(ds_ns).epsilon(1e-6));
  }
}

TEST_CASE("nu relation family passes on seeded instances including degenerate sigma") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    for (auto kind : {InstanceKind::generic, InstanceKind::degenerate}) {
      auto inst = hierarchy::random_instance(2 + static_cast<int>(seed % 2), kind, 200 + seed);
      for (auto [eps, delta] : {std::pair{0.3, 0.1}, std::pair{0.7, 0.2}}) {
        for (const auto& r : hierarchy::verify_nu_relations(inst, eps, delta)) {
          INFO(r.name, " ", r.instance, " slack=", r.slack);
          CHECK(r.pass);
        }
      }
    }
  }
}

TEST_CASE("theta relation family passes on seeded instances including narrow-band sigma") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    for (auto kind : {InstanceKind::generic, InstanceKind::narrow}) {
      auto inst = hierarchy::random_instance(2 + static_cast<int>(seed % 3), kind, 300 + seed);
      for (const auto& r : hierarchy::verify_theta_relations(inst, 0.3, 0.1)) {
        INFO(r.name, " ", r.instance, " slack=", r.slack);
        CHECK(r.pass);
      }
    }
  }
}

TEST_CASE("theta relation family with rho = sigma") {
  hierarchy::Instance inst;
  inst.rho = states::make_density(Matrix::Identity(3, 3) / 3.0);
  inst.sigma = inst.rho.op;
  for (const auto& r : hierarchy::verify_theta_relations(inst, 0.4, 0.15)) CHECK(r.pass);
}

TEST_CASE("classical register chains") {
  // |X| = 1: the chains are tight up to log|X| = 0
  {
    std::vector<Matrix> phis;
    hierarchy::Instance tmp = hierarchy::random_instance(2, InstanceKind::generic, 77);
    phis.push_back(linalg::kron(tmp.rho.op, tmp.sigma));
    auto cq = states::make_cq_state({1.0}, phis);
    for (const auto& r : hierarchy::verify_hh_props(cq, 0.2)) {
      INFO(r.name, " slack=", r.slack);
      CHECK(r.pass);
    }
  }
  // X a classical copy of A's basis value
  {
    std::vector<double> probs{0.4, 0.6};
    std::vector<Matrix> phis;
    for (int x = 0; x < 2; ++x) {
      Matrix ax = Matrix::Zero(2, 2);
      ax(x, x) = 1.0;
      auto b = hierarchy::random_instance(2, InstanceKind::generic, 800 + x);
      phis.push_back(linalg::kron(ax, b.rho.op));
    }
    auto cq = states::make_cq_state(probs, phis);
    for (const auto& r : hierarchy::verify_hh_props(cq, 0.15)) {
      INFO(r.name, " slack=", r.slack);
      CHECK(r.pass);
    }
  }
  // seeded generic suite
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::vector<double> probs{0.5, 0.3, 0.2};
    std::vector<Matrix> phis;
    for (int x = 0; x < 3; ++x) {
      auto g = hierarchy::random_instance(4, InstanceKind::generic, 900 + 10 * seed + x);
      phis.push_back(g.rho.op);
    }
    auto cq = states::make_cq_state(probs, phis);
    for (const auto& r : hierarchy::verify_hh_props(cq, 0.25)) {
      INFO(r.name, " slack=", r.slack);
      CHECK(r.pass);
    }
  }
}

TEST_CASE("small suite slice runs clean and emits CSV") {
  hierarchy::Suite suite;
  suite.version = 1;
  std::uint64_t seed = 5000;
  for (auto kind : {InstanceKind::generic, InstanceKind::commuting, InstanceKind::cq,
                    InstanceKind::degenerate, InstanceKind::narrow}) {
    hierarchy::SuiteEntry e;
    e.dim = 2 + static_cast<int>(seed % 3);
    e.kind = kind;
    e.seed = seed++;
    e.eps = 0.3;
    e.delta = 0.1;
    suite.entries.push_back(e);
  }
  auto reports = hierarchy::run_suite(suite, 2);
  CHECK(reports.size() == suite.entries.size() * 13);
  for (const auto& r : reports) {
    INFO(r.name, " ", r.instance, " slack=", r.slack);
    CHECK(r.pass);
  }
  std::ostringstream os;
  hierarchy::write_csv(os, reports);
  CHECK(os.str().find("name,dims,seed,eps,delta,lhs,rhs,slack,pass") == 0);
  CHECK(os.str().find("b-4") != std::string::npos);
}
