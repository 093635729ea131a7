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

#include "fblq/blocklength.hpp"

using namespace fblq;
using blocklength::SourceModel;
using linalg::Matrix;

namespace {

const double kH005 = 0.7136030428840439;  // 1 - h(0.05)

SourceModel deterministic_source() {
  // X deterministic, trivial side information: H = V = 0
  return blocklength::make_source_model(
      states::make_cq_state({1.0, 0.0}, {Matrix::Identity(1, 1), Matrix::Identity(1, 1)}));
}

}  // namespace

TEST_CASE("pauli_source landmarks") {
  auto src = blocklength::pauli_source(0.05);
  CHECK(src.h == doctest::Approx(kH005).epsilon(1e-10));
  CHECK(src.lambda == doctest::Approx(std::log2(0.95 / 0.05)).epsilon(1e-10));
  CHECK(src.c == 0.5);
  // llr of the NS pair carries exactly two distinct values, so the exact
  // binomial evaluator applies
  CHECK_NOTHROW(divergences::ds_iid_exact(src.ns, 100, 0.25));
  // moments agree with the independent classical summation
  const double zh = std::log2(1.0 / 0.1), zl = std::log2(1.0 / 1.9);
  const double mu = 0.05 * zh + 0.95 * zl;
  const double var = 0.05 * (zh - mu) * (zh - mu) + 0.95 * (zl - mu) * (zl - mu);
  CHECK(src.h == doctest::Approx(-mu).epsilon(1e-12));
  CHECK(src.v == doctest::Approx(var).epsilon(1e-12));
  CHECK_THROWS(blocklength::pauli_source(0.7));
}

TEST_CASE("second order expansions") {
  auto src = blocklength::pauli_source(0.05);
  // eps = 1/2 makes the m-variant collapse to nH
  CHECK(blocklength::second_order_m(src, 1e6, 0.5) == doctest::Approx(1e6 * src.h));
  // the correction changes sign across eps = 1/2
  CHECK(blocklength::second_order_m(src, 1e6, 0.1) > 1e6 * src.h);
  CHECK(blocklength::second_order_m(src, 1e6, 0.9) < 1e6 * src.h);
  CHECK(blocklength::second_order_l(src, 1e6, 0.1) < 1e6 * src.h);
  // V = 0 source: exactly nH
  auto det = deterministic_source();
  CHECK(blocklength::second_order_l(det, 1e4, 0.3) == doctest::Approx(0.0));
}

TEST_CASE("finite-blocklength window bounds") {
  auto src = blocklength::pauli_source(0.05);
  for (double eps : {0.1, 0.5}) {
    for (double n : {1e4, 1e6}) {
      auto mb = blocklength::m_bounds_finite(src, n, eps);
      CHECK(mb.lower <= mb.upper);
      auto lb = blocklength::l_bounds_finite(src, n, eps);
      CHECK(lb.lower <= lb.upper);
    }
  }

  // both m-sides approach the Gaussian approximation to O(log n)
  for (double n : {1e6, 1e7}) {
    const double so = blocklength::second_order_m(src, n, 0.1);
    auto mb = blocklength::m_bounds_finite(src, n, 0.1);
    CHECK(std::abs(mb.lower - so) <= 20.0 * std::log2(n));
    CHECK(std::abs(mb.upper - so) <= 20.0 * std::log2(n));
  }

  // monotone in eps in the operationally correct direction
  auto l_small = blocklength::l_bounds_finite(src, 1e6, 0.05);
  auto l_big = blocklength::l_bounds_finite(src, 1e6, 0.4);
  CHECK(l_big.upper >= l_small.upper - 1e-9);
  auto m_small = blocklength::m_bounds_finite(src, 1e6, 0.05);
  auto m_big = blocklength::m_bounds_finite(src, 1e6, 0.4);
  CHECK(m_big.upper <= m_small.upper + 1e-9);

  // extraction lower bound is vacuous at tiny eps and desk-scale n
  auto lb = blocklength::l_bounds_finite(src, 1e4, 1e-6);
  CHECK(std::isinf(lb.lower));
  CHECK(lb.lower < 0);
  CHECK(std::isfinite(lb.upper));

  // V = 0 source: both bounds within O(log n) of 0
  auto det = deterministic_source();
  for (double n : {1e4, 1e6}) {
    auto mb = blocklength::m_bounds_finite(det, n, 0.3);
    CHECK(std::abs(mb.upper) <= 40.0 * std::log2(n));
    CHECK(std::abs(mb.lower) <= 40.0 * std::log2(n));
  }
}

TEST_CASE("berry_esseen sandwich contains the exact Pauli D_s") {
  auto src = blocklength::pauli_source(0.05);
  divergences::MomentTriple m;
  m.d = -src.h;
  m.v = src.v;
  m.t = src.t;
  for (double n : {1e3, 1e4, 1e6, 1e8}) {
    auto [lo, hi] = divergences::berry_esseen_ds(m, n, 1e-6, src.c);
    const double exact =
        divergences::ds_iid_exact(src.ns, static_cast<std::int64_t>(n), 1e-6);
    CHECK(lo <= exact);
    CHECK(exact <= hi);
  }
}

TEST_CASE("figure1 curve landmarks") {
  auto curve = blocklength::figure1_curves(0.05, 1e-6, {1e4, 1e6, 1e8});
  REQUIRE(curve.points.size() == 3);
  for (const auto& pt : curve.points) {
    CHECK(pt.lower_rate <= pt.upper_rate + 1e-12);
    CHECK(pt.lower_rate >= 0.0);
    CHECK(pt.upper_rate <= 1.0);
    CHECK(pt.shannon_rate == doctest::Approx(kH005).epsilon(1e-10));
  }
  // n = 1e4: impossible to extract more than 95% of the Shannon entropy
  CHECK(curve.points[0].upper_rate <= 0.95 * kH005);
  // n = 1e8: both bounds within 1% of the Shannon rate
  CHECK(std::abs(curve.points[2].upper_rate - kH005) <= 0.01 * kH005);
  CHECK(std::abs(curve.points[2].lower_rate - kH005) <= 0.01 * kH005);
  // optimizing xi shrinks roughly like 1/sqrt(n)
  CHECK(curve.points[2].xi_upper < curve.points[0].xi_upper);
  // frozen reference rates from the development-time oracle run
  CHECK(curve.points[0].upper_rate == doctest::Approx(0.6696).epsilon(2e-3));
  CHECK(curve.points[0].lower_rate == doctest::Approx(0.6297).epsilon(2e-3));
}

TEST_CASE("general bound curves emit consistent CSV") {
  auto src = blocklength::pauli_source(0.05);
  auto curve =
      blocklength::general_curves(src, blocklength::Task::compression, 0.1, {1e4, 1e6});
  std::ostringstream os;
  blocklength::write_csv(os, curve);
  const std::string csv = os.str();
  CHECK(csv.find("n,lower_bits,upper_bits") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("log_spaced grid") {
  auto grid = blocklength::log_spaced(1e4, 1e8, 5);
  REQUIRE(grid.size() == 5);
  CHECK(grid.front() == doctest::Approx(1e4));
  CHECK(grid.back() == doctest::Approx(1e8));
  CHECK(grid[2] == doctest::Approx(1e6));
}

TEST_CASE("rate-drop blocklength under the implemented variance convention") {
  // regression pin: the 10% second-order rate drop for the Pauli source at
  // eps = 1e-6 sits at n = V (PhiInv(eps^2))^2 / (0.01 H^2) ~ 8329
  auto src = blocklength::pauli_source(0.05);
  const double q = divergences::gaussian_quantile(1e-12);
  const double n_star = src.v * q * q / (0.01 * src.h * src.h);
  CHECK(n_star == doctest::Approx(8329.1).epsilon(1e-3));
  const double drop =
      (n_star * src.h - blocklength::second_order_l(src, n_star, 1e-6)) / (n_star * src.h);
  CHECK(drop == doctest::Approx(0.10).epsilon(1e-6));
}

TEST_CASE("general converse dominates the exact-pipeline converse") {
  // the general window bound is valid but weaker than the exact-binomial
  // evaluation on the Pauli preset
  auto src = blocklength::pauli_source(0.05);
  const double n = 1e4, eps = 1e-6;
  auto general = blocklength::l_bounds_finite(src, n, eps);
  auto exact = blocklength::figure1_curves(0.05, eps, {n});
  REQUIRE(std::isfinite(general.upper));
  CHECK(general.upper >= exact.points[0].upper_bits - 1e-9);
  CHECK(exact.points[0].upper_bits / n <= 0.95 * src.h);
  CHECK(general.upper / n > 0.95 * src.h);
}
