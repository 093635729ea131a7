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
#include <random>

#include "fblq/divergences.hpp"

using namespace fblq;
using divergences::ClassicalPair;
using divergences::make_classical_pair;
using linalg::Complex;
using linalg::Matrix;

namespace {

Matrix random_density_matrix(int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = Complex(u(rng), u(rng));
  }
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

Matrix random_full_rank_psd(int d, unsigned seed) {
  Matrix m = random_density_matrix(d, seed);
  m += 0.05 * Matrix::Identity(d, d);
  return m / m.trace().real();
}

Matrix diag_m(const std::vector<double>& v) {
  Matrix m = Matrix::Zero(v.size(), v.size());
  for (size_t i = 0; i < v.size(); ++i) m(i, i) = v[i];
  return m;
}

// Pauli eavesdropping source: rho_XB = 1/2 sum_x |x><x| (x) |phi^x><phi^x|
// with |phi^x> = sqrt(p)|0> + (-1)^x sqrt(1-p)|1>.
states::CqState pauli_cq(double p) {
  Eigen::Vector2cd phi0, phi1;
  phi0 << std::sqrt(p), std::sqrt(1.0 - p);
  phi1 << std::sqrt(p), -std::sqrt(1.0 - p);
  return states::make_cq_state({0.5, 0.5}, {phi0 * phi0.adjoint(), phi1 * phi1.adjoint()});
}

}  // namespace

TEST_CASE("classical pair and llr cache") {
  auto pair = make_classical_pair({0.3, 0.7}, {0.6, 0.4});
  REQUIRE(pair.support_llr.size() == 2);
  CHECK(pair.support_llr[0].first == doctest::Approx(-1.0));
  CHECK(pair.support_llr[1].first == doctest::Approx(std::log2(0.7 / 0.4)));
  CHECK_FALSE(pair.infinite_divergence);

  auto inf_pair = make_classical_pair({0.5, 0.5}, {1.0, 0.0});
  CHECK(inf_pair.infinite_divergence);
}

TEST_CASE("quantum moments: rho = sigma is all zeros") {
  auto rho = states::make_density(random_density_matrix(3, 77));
  auto m = divergences::quantum_moments(rho, rho.op);
  CHECK(std::abs(m.d) < 1e-10);
  CHECK(std::abs(m.v) < 1e-10);
  CHECK(std::abs(m.t) < 1e-4);  // cube root of an O(1e-12) moment
}

TEST_CASE("quantum moments match the classical summation oracle on commuting pairs") {
  const std::vector<double> pv{0.5, 0.3, 0.2};
  const std::vector<double> qv{0.25, 0.45, 0.3};
  auto rho = states::make_density(diag_m(pv));
  auto m = divergences::quantum_moments(rho, diag_m(qv));
  // independent classical summation of D, Var, central third moment
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d += pv[i] * (std::log2(pv[i]) - std::log2(qv[i]));
  double v = 0.0, t3 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double c = std::log2(pv[i]) - std::log2(qv[i]) - d;
    v += pv[i] * c * c;
    t3 += pv[i] * std::abs(c) * c * c;
  }
  CHECK(m.d == doctest::Approx(d).epsilon(1e-12));
  CHECK(m.v == doctest::Approx(v).epsilon(1e-12));
  CHECK(m.t == doctest::Approx(std::cbrt(t3)).epsilon(1e-10));
}

TEST_CASE("support violation flags infinite divergence") {
  auto rho = states::make_density(diag_m({0.5, 0.5}));
  auto m = divergences::quantum_moments(rho, diag_m({1.0, 0.0}));
  CHECK(m.infinite);
}

TEST_CASE("Pauli source conditional entropy landmark") {
  auto cq = pauli_cq(0.05);
  auto rho = states::make_density(cq.full_operator());
  auto m = divergences::conditional_moments(rho, {2, 2});
  const double h = 1.0 - (-0.05 * std::log2(0.05) - 0.95 * std::log2(0.95));
  CHECK(m.d == doctest::Approx(h).epsilon(1e-10));  // H(X|B) = 1 - h(p) ~ 0.7136
}

TEST_CASE("nussbaum_szkola reproduces hand eigendecompositions") {
  // rho = |+><+|, sigma = I/2: P = (1/2,1/2,0,0) up to order, Q uniform 1/4.
  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  auto rho = states::make_density(plus);
  auto pair = divergences::nussbaum_szkola(rho, 0.5 * Matrix::Identity(2, 2));
  double psum = 0.0, qsum = 0.0;
  for (double w : pair.p) psum += w;
  for (double w : pair.q) qsum += w;
  CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(qsum == doctest::Approx(1.0).epsilon(1e-12));
  auto m = divergences::classical_moments(pair);
  CHECK(m.d == doctest::Approx(1.0).epsilon(1e-10));  // D(P||Q) = D(rho||sigma) = 1

  // closed form for the Pauli source
  auto cq = pauli_cq(0.05);
  auto rho_xb = states::make_density(cq.full_operator());
  Matrix sigma = linalg::kron(Matrix::Identity(2, 2), cq.marginal_b().op);
  auto ns = divergences::nussbaum_szkola(rho_xb, sigma);
  std::vector<double> pnz, qnz;
  for (int i = 0; i < ns.size(); ++i) {
    if (ns.p[i] > 1e-13) {
      pnz.push_back(ns.p[i]);
      qnz.push_back(ns.q[i]);
    }
  }
  std::sort(pnz.begin(), pnz.end());
  std::sort(qnz.begin(), qnz.end());
  REQUIRE(pnz.size() == 4);
  CHECK(pnz[0] == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(pnz[1] == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(pnz[2] == doctest::Approx(0.475).epsilon(1e-12));
  CHECK(pnz[3] == doctest::Approx(0.475).epsilon(1e-12));
  CHECK(qnz[0] == doctest::Approx(0.0025).epsilon(1e-10));
  CHECK(qnz[3] == doctest::Approx(0.9025).epsilon(1e-10));
}

TEST_CASE("moment matching on random pairs") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const int d = 2 + static_cast<int>(seed % 3);
    auto rho = states::make_density(random_full_rank_psd(d, 900 + seed));
    Matrix sigma = random_full_rank_psd(d, 1900 + seed);
    auto qm = divergences::quantum_moments(rho, sigma);
    auto cm = divergences::classical_moments(divergences::nussbaum_szkola(rho, sigma));
    CHECK(std::abs(qm.d - cm.d) <= 1e-10);
    CHECK(std::abs(qm.v - cm.v) <= 1e-10);
  }
}

TEST_CASE("nussbaum_szkola factorizes over tensor products") {
  auto rho = states::make_density(random_full_rank_psd(2, 41));
  Matrix sigma = random_full_rank_psd(2, 42);
  auto single = divergences::nussbaum_szkola(rho, sigma);
  auto doubled = divergences::nussbaum_szkola(
      states::tensor(rho, rho), linalg::kron(sigma, sigma));
  // compare sorted (llr, mass) multisets of the product pair
  std::vector<std::pair<double, double>> prod;
  for (const auto& [z1, w1] : single.support_llr) {
    for (const auto& [z2, w2] : single.support_llr) prod.emplace_back(z1 + z2, w1 * w2);
  }
  std::sort(prod.begin(), prod.end());
  auto got = doubled.support_llr;
  std::sort(got.begin(), got.end());
  REQUIRE(got.size() == prod.size());
  // merge nearby atoms on both sides before comparing
  auto merge = [](std::vector<std::pair<double, double>> v) {
    std::vector<std::pair<double, double>> out;
    for (const auto& [z, w] : v) {
      if (!out.empty() && std::abs(z - out.back().first) < 1e-9) {
        out.back().second += w;
      } else {
        out.emplace_back(z, w);
      }
    }
    return out;
  };
  auto a = merge(prod), b = merge(got);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first == doctest::Approx(b[i].first).epsilon(1e-8));
    CHECK(a[i].second == doctest::Approx(b[i].second).epsilon(1e-8));
  }
}

TEST_CASE("ds_classical boundary convention") {
  auto same = make_classical_pair({0.4, 0.6}, {0.4, 0.6});
  for (double eps : {0.0, 0.2, 0.5, 0.9}) {
    CHECK(divergences::ds_classical(same, eps) == doctest::Approx(0.0));
  }

  auto pair = make_classical_pair({0.3, 0.7}, {0.6, 0.4});
  CHECK(divergences::ds_classical(pair, 0.2) == doctest::Approx(-1.0));
  CHECK(divergences::ds_classical(pair, 0.4) == doctest::Approx(std::log2(0.7 / 0.4)));
  // cumulative mass exactly eps at an atom: the sup is the next atom's value
  CHECK(divergences::ds_classical(pair, 0.3) == doctest::Approx(std::log2(0.7 / 0.4)));
  CHECK_THROWS(divergences::ds_classical(pair, 1.0));

  // infinite-divergence pair with finite-part mass <= eps
  auto inf_pair = make_classical_pair({0.1, 0.9}, {1.0, 0.0});
  CHECK(std::isinf(divergences::ds_classical(inf_pair, 0.5)));
  CHECK(divergences::ds_classical(inf_pair, 0.05) ==
        doctest::Approx(std::log2(0.1 / 1.0)));
  // nondecreasing in eps
  double prev = -1e300;
  for (double eps : {0.0, 0.1, 0.3, 0.6, 0.9}) {
    const double v = divergences::ds_classical(pair, eps);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("binomial cdf against exact rational values") {
  CHECK(divergences::binomial_cdf(10, 10, 0.3) == doctest::Approx(1.0));
  CHECK(divergences::binomial_cdf(4, 10, 0.5) ==
        doctest::Approx(386.0 / 1024.0).epsilon(1e-13));
  // complement identity
  for (std::int64_t k : {0, 3, 7}) {
    CHECK(divergences::binomial_cdf(k, 9, 0.37) + divergences::binomial_sf(k, 9, 0.37) ==
          doctest::Approx(1.0).epsilon(1e-13));
  }
  // direct summation cross-check at n = 20
  const double p = 0.15;
  double direct = 0.0, choose = 1.0;
  for (int i = 0; i <= 6; ++i) {
    direct += choose * std::pow(p, i) * std::pow(1 - p, 20 - i);
    choose = choose * (20 - i) / (i + 1);
  }
  CHECK(divergences::binomial_cdf(6, 20, p) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("binomial cdf matches the Gaussian bulk at n = 1e6") {
  const std::int64_t n = 1000000;
  const double p = 0.05;
  const double mean = n * p, sd = std::sqrt(n * p * (1 - p));
  for (double zoff : {-1.0, 0.0, 1.0}) {
    const std::int64_t k = static_cast<std::int64_t>(mean + zoff * sd);
    const double gauss = divergences::gaussian_cdf((k + 0.5 - mean) / sd);
    const double exact = divergences::binomial_cdf(k, n, p);
    CHECK(std::abs(exact - gauss) / exact < 5e-3);  // 3 significant digits
  }
}

TEST_CASE("ds_iid_exact") {
  auto pair = make_classical_pair({0.3, 0.7}, {0.6, 0.4});
  // n = 1 reduces to ds_classical
  for (double eps : {0.0, 0.2, 0.4, 0.8}) {
    CHECK(divergences::ds_iid_exact(pair, 1, eps) ==
          doctest::Approx(divergences::ds_classical(pair, eps)).epsilon(1e-12));
  }
  // symmetric pair, eps = 1/2, odd n: within one lattice step of n * midpoint
  auto sym = make_classical_pair({0.5, 0.5}, {0.25, 0.75});
  const double zl = std::log2(0.5 / 0.75), zh = std::log2(0.5 / 0.25);
  for (std::int64_t n : {3, 11, 101}) {
    const double v = divergences::ds_iid_exact(sym, n, 0.5);
    const double mid = n * 0.5 * (zl + zh);
    CHECK(std::abs(v - mid) <= 0.5 * (zh - zl) + 1e-9);
  }
  // three distinct llr values are rejected
  auto tri = make_classical_pair({0.2, 0.3, 0.5}, {0.5, 0.3, 0.2});
  CHECK_THROWS(divergences::ds_iid_exact(tri, 5, 0.1));

  // tail variant agrees with the plain variant where both are stable
  CHECK(divergences::ds_iid_exact_tail(pair, 100, 0.25) ==
        doctest::Approx(divergences::ds_iid_exact(pair, 100, 0.75)).epsilon(1e-12));
}

TEST_CASE("ds_iid_lattice") {
  // k = 2 agrees with ds_iid_exact within the reported bound
  auto pair = make_classical_pair({0.3, 0.7}, {0.6, 0.4});
  for (int n : {1, 2, 7, 40}) {
    auto lat = divergences::ds_iid_lattice(pair, n, 0.3);
    const double exact = divergences::ds_iid_exact(pair, n, 0.3);
    CHECK(std::abs(lat.value - exact) <= lat.rounding_bound + 1e-9);
  }
  // n = 2, k = 3: brute-force enumeration of the 9 outcomes
  auto tri = make_classical_pair({0.2, 0.3, 0.5}, {0.4, 0.35, 0.25});
  std::vector<double> z{std::log2(0.2 / 0.4), std::log2(0.3 / 0.35), std::log2(0.5 / 0.25)};
  std::vector<double> w{0.2, 0.3, 0.5};
  const double eps = 0.37;
  std::vector<std::pair<double, double>> atoms;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) atoms.emplace_back(z[i] + z[j], w[i] * w[j]);
  }
  std::sort(atoms.begin(), atoms.end());
  double cum = 0.0, expected = atoms.back().first;
  for (const auto& [zz, ww] : atoms) {
    cum += ww;
    if (cum > eps) {
      expected = zz;
      break;
    }
  }
  auto lat = divergences::ds_iid_lattice(tri, 2, eps);
  CHECK(std::abs(lat.value - expected) <= lat.rounding_bound + 1e-9);
  // eps = 0: the smallest attainable llr sum, up to one lattice step
  auto lat0 = divergences::ds_iid_lattice(tri, 2, 0.0);
  CHECK(std::abs(lat0.value - 2 * z[0]) <= lat0.rounding_bound + 1e-8);
}

TEST_CASE("gaussian cdf and quantile") {
  CHECK(divergences::gaussian_cdf(0.0) == doctest::Approx(0.5));
  CHECK(divergences::gaussian_quantile(0.5) == doctest::Approx(0.0));
  // high-precision independent evaluation (scipy.stats.norm.ppf(1e-12))
  CHECK(divergences::gaussian_quantile(1e-12) ==
        doctest::Approx(-7.034483825301131).epsilon(1e-9));
  // round trip and symmetry on a grid
  for (double eps : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 1.0 - 1e-9}) {
    const double x = divergences::gaussian_quantile(eps);
    CHECK(std::abs(divergences::gaussian_cdf(x) - eps) <= 1e-12);
  }
  for (double x : {0.1, 0.5, 1.0, 3.0, 6.0}) {
    CHECK(divergences::gaussian_cdf(-x) ==
          doctest::Approx(1.0 - divergences::gaussian_cdf(x)).epsilon(1e-12));
  }
  CHECK(std::isinf(divergences::gaussian_quantile(0.0)));
  CHECK(std::isinf(divergences::gaussian_quantile(1.0)));
}

TEST_CASE("second order expansion helpers") {
  CHECK(divergences::second_order(0.7, 2.0, 100.0, 0.5) == doctest::Approx(70.0));
  CHECK(divergences::second_order(0.7, 0.0, 100.0, 0.13) == doctest::Approx(70.0));
}

TEST_CASE("berry_esseen_ds edge semantics") {
  divergences::MomentTriple m;
  m.d = 0.4;
  m.v = 0.0;
  m.t = 0.0;
  auto [lo, hi] = divergences::berry_esseen_ds(m, 1000.0, 0.3);
  CHECK(lo == doctest::Approx(400.0));
  CHECK(hi == doctest::Approx(400.0));

  m.v = 1.0;
  m.t = 1.5;
  auto [lo2, hi2] = divergences::berry_esseen_ds(m, 4.0, 0.2);  // shift > eps
  CHECK(std::isinf(lo2));
  CHECK(lo2 < 0);
}

TEST_CASE("berry_esseen_ds sandwiches the exact binary D_s") {
  auto pair = make_classical_pair({0.3, 0.7}, {0.6, 0.4});
  auto m = divergences::classical_moments(pair);
  for (std::int64_t n : {100, 1000, 100000}) {
    for (double eps : {0.05, 0.3, 0.7}) {
      auto [lo, hi] = divergences::berry_esseen_ds(m, static_cast<double>(n), eps);
      const double exact = divergences::ds_iid_exact(pair, n, eps);
      CHECK(lo <= exact + 1e-9);
      CHECK(exact <= hi + 1e-9);
    }
  }
}

TEST_CASE("ds_quantum") {
  // commuting inputs match ds_classical on the eigenvalue pair
  auto rho = states::make_density(diag_m({0.6, 0.3, 0.1}));
  Matrix sigma = diag_m({0.2, 0.3, 0.5});
  auto pair = make_classical_pair({0.6, 0.3, 0.1}, {0.2, 0.3, 0.5});
  for (double eps : {0.1, 0.35, 0.8}) {
    CHECK(divergences::ds_quantum(rho, sigma, eps) ==
          doctest::Approx(divergences::ds_classical(pair, eps)).epsilon(1e-7));
  }
  // rho = sigma: 0 within grid resolution
  auto r2 = states::make_density(random_full_rank_psd(2, 5150));
  CHECK(std::abs(divergences::ds_quantum(r2, r2.op, 0.4)) < 1e-6);

  // rescaling sigma shifts D_s additively: D_s(rho || 2^-l sigma) = D_s(rho||sigma) + l
  auto r3 = states::make_density(random_full_rank_psd(2, 5151));
  Matrix s3 = random_full_rank_psd(2, 5152);
  const double base = divergences::ds_quantum(r3, s3, 0.3);
  const double shifted = divergences::ds_quantum(r3, std::exp2(-1.75) * s3, 0.3);
  CHECK(shifted == doctest::Approx(base + 1.75).epsilon(1e-6));
}
