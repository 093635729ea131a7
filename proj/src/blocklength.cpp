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

#include "fblq/blocklength.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "fblq/parallel.hpp"

namespace fblq::blocklength {

using linalg::Matrix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 64-point log grid over (lo, hi) followed by golden-section refinement of
// the best bracket; the objective is unimodal in practice but the grid pass
// protects against surprises.
struct OptResult {
  double x = 0.0;
  double value = -kInf;
  bool valid = false;
};

template <typename Fn>
OptResult maximize_on_log_grid(Fn&& fn, double lo, double hi) {
  OptResult best;
  if (!(hi > lo && lo > 0.0)) return best;
  constexpr int kGrid = 64;
  const double llo = std::log(lo), lhi = std::log(hi);
  std::vector<double> xs(kGrid);
  int best_idx = -1;
  for (int i = 0; i < kGrid; ++i) {
    xs[i] = std::exp(llo + (lhi - llo) * i / (kGrid - 1));
    const double v = fn(xs[i]);
    if (std::isfinite(v) && v > best.value) {
      best.value = v;
      best.x = xs[i];
      best_idx = i;
    }
  }
  if (best_idx < 0) return best;
  best.valid = true;
  double a = xs[std::max(0, best_idx - 1)];
  double b = xs[std::min(kGrid - 1, best_idx + 1)];
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < 30; ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = fn(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = fn(xm);
  if (std::isfinite(fm) && fm > best.value) {
    best.value = fm;
    best.x = xm;
  }
  return best;
}

double ceil_n_lambda(double n, double lambda) {
  return std::max(std::ceil(n * lambda), 1.0);
}

}  // namespace

double SourceModel::s() const { return std::sqrt(std::max(v, 0.0)); }

int SourceModel::alphabet_bits() const {
  int bits = 0;
  while ((1 << bits) < rho_xb.num_symbols()) ++bits;
  return bits;
}

SourceModel make_source_model(const states::CqState& rho_xb) {
  SourceModel src;
  src.rho_xb = rho_xb;
  auto rho = states::make_density(rho_xb.full_operator());
  const auto m = divergences::conditional_moments(rho, {rho_xb.num_symbols(), rho_xb.dim_b});
  if (m.infinite) throw std::invalid_argument("make_source_model: infinite divergence");
  src.h = m.d;
  src.v = m.v;
  src.t = m.t;
  const auto stats = states::spectral_stats(rho_xb.marginal_b().op);
  src.lambda = stats.lambda;
  const Matrix sigma = linalg::kron(
      Matrix::Identity(rho_xb.num_symbols(), rho_xb.num_symbols()), rho_xb.marginal_b().op);
  src.ns = divergences::nussbaum_szkola(rho, sigma);
  return src;
}

SourceModel pauli_source(double p) {
  if (!(p > 0.0 && p < 0.5)) throw std::invalid_argument("pauli_source: need 0 < p < 1/2");
  Eigen::Vector2cd phi0, phi1;
  phi0 << std::sqrt(p), std::sqrt(1.0 - p);
  phi1 << std::sqrt(p), -std::sqrt(1.0 - p);
  auto cq = states::make_cq_state({0.5, 0.5}, {phi0 * phi0.adjoint(), phi1 * phi1.adjoint()});
  SourceModel src = make_source_model(cq);

  // cross-check the non-trivial part of the Nussbaum-Szkola pair (the
  // P-support) against the displayed closed form, entrywise
  std::vector<std::pair<double, double>> support;
  for (int i = 0; i < src.ns.size(); ++i) {
    if (src.ns.p[i] > 1e-13) support.emplace_back(src.ns.p[i], src.ns.q[i]);
  }
  std::sort(support.begin(), support.end());
  const std::vector<std::pair<double, double>> expect{
      {p / 2.0, p * p},
      {p / 2.0, p * p},
      {(1.0 - p) / 2.0, (1.0 - p) * (1.0 - p)},
      {(1.0 - p) / 2.0, (1.0 - p) * (1.0 - p)}};
  if (support.size() != 4) throw std::runtime_error("pauli_source: unexpected NS support");
  for (int i = 0; i < 4; ++i) {
    if (std::abs(support[i].first - expect[i].first) > 1e-12 ||
        std::abs(support[i].second - expect[i].second) > 1e-12) {
      throw std::runtime_error("pauli_source: NS pair deviates from the closed form");
    }
  }
  return src;
}

BoundPair m_bounds_finite(const SourceModel& src, double n, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("m_bounds_finite: eps in (0,1)");
  const double s = src.s();
  const double beta = s > 0.0 ? src.c * src.t * src.t * src.t / (s * s * s * std::sqrt(n)) : 0.0;
  const double log_nl = std::log2(ceil_n_lambda(n, src.lambda));
  const double sqns = std::sqrt(n) * s;
  const double nh = n * src.h;
  BoundPair out;

  auto lower_term = [&](double xi) {
    if (!(xi > beta && eps + xi < 1.0)) return -kInf;
    return -sqns * divergences::gaussian_quantile(eps + xi) -
           (9.0 + log_nl - 4.0 * std::log2(xi - beta) - std::log2(1.0 - eps - xi));
  };
  auto low = maximize_on_log_grid(lower_term, std::max(beta * (1.0 + 1e-9), 1e-12),
                                  (1.0 - eps) * (1.0 - 1e-12));
  out.lower = low.valid ? nh + low.value : -kInf;
  out.xi_lower = low.x;

  auto upper_term = [&](double xi) {
    if (!(xi > beta && xi < eps)) return -kInf;
    // minimized: feed the negative through the maximizer
    return -(-sqns * divergences::gaussian_quantile(eps - xi) +
             (2.0 + 3.0 * std::log2(3.0) + log_nl - 3.0 * std::log2(xi - beta)));
  };
  auto up = maximize_on_log_grid(upper_term, std::max(beta * (1.0 + 1e-9), 1e-12),
                                 eps * (1.0 - 1e-12));
  out.upper = up.valid ? nh - up.value : kInf;
  out.xi_upper = up.x;
  return out;
}

BoundPair l_bounds_finite(const SourceModel& src, double n, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("l_bounds_finite: eps in (0,1)");
  const double s = src.s();
  const double beta = s > 0.0 ? src.c * src.t * src.t * src.t / (s * s * s * std::sqrt(n)) : 0.0;
  const double log_nl = std::log2(ceil_n_lambda(n, src.lambda));
  const double sqns = std::sqrt(n) * s;
  const double nh = n * src.h;
  const double eps2 = eps * eps;
  BoundPair out;

  auto lower_term = [&](double xi) {
    if (!(xi > beta && xi < eps2)) return -kInf;
    return sqns * divergences::gaussian_quantile(eps2 - xi) -
           (5.0 * std::log2(5.0) + log_nl - 5.0 * std::log2(xi - beta) -
            std::log2(1.0 - eps));
  };
  auto low = maximize_on_log_grid(lower_term, std::max(beta * (1.0 + 1e-9), 1e-15),
                                  eps2 * (1.0 - 1e-12));
  out.lower = low.valid ? nh + low.value : -kInf;
  out.xi_lower = low.x;

  auto upper_term = [&](double xi) {
    if (!(xi > beta && eps2 + xi < 1.0)) return -kInf;
    return -(sqns * divergences::gaussian_quantile(eps2 + xi) +
             (8.0 + 6.0 * std::log2(3.0) + log_nl - 6.0 * std::log2(xi - beta)));
  };
  auto up = maximize_on_log_grid(upper_term, std::max(beta * (1.0 + 1e-9), 1e-15),
                                 (1.0 - eps2) * (1.0 - 1e-12));
  out.upper = up.valid ? nh + (-up.value) : kInf;
  out.xi_upper = up.x;
  return out;
}

double second_order_m(const SourceModel& src, double n, double eps) {
  return n * src.h - std::sqrt(n * std::max(src.v, 0.0)) * divergences::gaussian_quantile(eps);
}

double second_order_l(const SourceModel& src, double n, double eps) {
  return n * src.h +
         std::sqrt(n * std::max(src.v, 0.0)) * divergences::gaussian_quantile(eps * eps);
}

std::vector<double> log_spaced(double n_min, double n_max, int points) {
  if (points < 1 || n_min <= 0 || n_max < n_min) {
    throw std::invalid_argument("log_spaced: bad range");
  }
  std::vector<double> out;
  out.reserve(points);
  if (points == 1) {
    out.push_back(n_min);
    return out;
  }
  const double l0 = std::log(n_min), l1 = std::log(n_max);
  for (int i = 0; i < points; ++i) {
    out.push_back(std::round(std::exp(l0 + (l1 - l0) * i / (points - 1))));
  }
  return out;
}

namespace {

CurvePoint clamp_point(double n, double lower, double upper, double so, double h, int bits,
                       double xi_lo, double xi_up) {
  CurvePoint pt;
  pt.n = n;
  pt.lower_bits = lower;
  pt.upper_bits = upper;
  pt.second_order_rate = so / n;
  pt.shannon_rate = h;
  pt.xi_lower = xi_lo;
  pt.xi_upper = xi_up;
  const double max_rate = static_cast<double>(bits);
  double lr = lower / n, ur = upper / n;
  if (!std::isfinite(lr) || lr < 0.0) {
    lr = 0.0;
    pt.clamped_lower = true;
  }
  if (lr > max_rate) {
    lr = max_rate;
    pt.clamped_lower = true;
  }
  if (!std::isfinite(ur) || ur > max_rate) {
    ur = max_rate;
    pt.clamped_upper = true;
  }
  if (ur < 0.0) {
    ur = 0.0;
    pt.clamped_upper = true;
  }
  pt.lower_rate = lr;
  pt.upper_rate = ur;
  return pt;
}

}  // namespace

BoundCurve figure1_curves(double p, double eps, const std::vector<double>& n_list, int threads) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("figure1_curves: eps in (0,1)");
  for (double n : n_list) {
    if (n < 1e3 || n > 1e8) {
      throw std::invalid_argument("figure1_curves: n_list must lie within [1e3, 1e8]");
    }
  }
  const SourceModel src = pauli_source(p);
  const double eps2 = eps * eps;
  BoundCurve curve;
  curve.task = Task::extraction;
  curve.eps = eps;
  curve.points.resize(n_list.size());

  parallel_for_indexed(static_cast<int>(n_list.size()), threads, [&](int i) {
    const double n = n_list[i];
    const std::int64_t ni = static_cast<std::int64_t>(std::llround(n));
    const double log_nl = std::log2(ceil_n_lambda(n, src.lambda));

    // direct bound: quantile 1 - eps^2 (1 - xi1)
    auto direct_term = [&](double xi1) {
      if (!(xi1 > 0.0 && xi1 < 1.0)) return -kInf;
      const double ds = divergences::ds_iid_exact_tail(src.ns, ni, eps2 * (1.0 - xi1));
      return -ds - (5.0 * std::log2(5.0) + log_nl - 5.0 * std::log2(xi1) -
                    6.0 * std::log2(eps) - std::log2(1.0 - eps));
    };
    auto low = maximize_on_log_grid(direct_term, 1e-9, 1.0 - 1e-9);

    // converse part: quantile 1 - eps^2 (1 + xi2)
    auto converse_term = [&](double xi2) {
      if (!(xi2 > 0.0 && xi2 < 1.0)) return -kInf;
      const double ds = divergences::ds_iid_exact_tail(src.ns, ni, eps2 * (1.0 + xi2));
      return -(-ds + (8.0 + 6.0 * std::log2(3.0) + log_nl - 6.0 * std::log2(xi2) -
                      10.0 * std::log2(eps)));
    };
    auto up = maximize_on_log_grid(converse_term, 1e-9, 1.0 - 1e-9);

    const double lower = low.valid ? low.value : -kInf;
    const double upper = up.valid ? -up.value : kInf;
    curve.points[i] = clamp_point(n, lower, upper, second_order_l(src, n, eps), src.h,
                                  src.alphabet_bits(), low.x, up.x);
  });
  return curve;
}

BoundCurve general_curves(const SourceModel& src, Task task, double eps,
                          const std::vector<double>& n_list, int threads) {
  BoundCurve curve;
  curve.task = task;
  curve.eps = eps;
  curve.points.resize(n_list.size());
  parallel_for_indexed(static_cast<int>(n_list.size()), threads, [&](int i) {
    const double n = n_list[i];
    const BoundPair b = task == Task::extraction ? l_bounds_finite(src, n, eps)
                                                 : m_bounds_finite(src, n, eps);
    const double so = task == Task::extraction ? second_order_l(src, n, eps)
                                               : second_order_m(src, n, eps);
    curve.points[i] =
        clamp_point(n, b.lower, b.upper, so, src.h, src.alphabet_bits(), b.xi_lower, b.xi_upper);
  });
  return curve;
}

void write_csv(std::ostream& os, const BoundCurve& curve) {
  os << "n,lower_bits,upper_bits,lower_rate,upper_rate,second_order_rate,shannon_rate,"
        "xi_lower,xi_upper,clamped_lower,clamped_upper\n";
  char buf[64];
  auto fmt = [&buf](double x) {
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::string(buf);
  };
  for (const auto& pt : curve.points) {
    os << fmt(pt.n) << ',' << fmt(pt.lower_bits) << ',' << fmt(pt.upper_bits) << ','
       << fmt(pt.lower_rate) << ',' << fmt(pt.upper_rate) << ',' << fmt(pt.second_order_rate)
       << ',' << fmt(pt.shannon_rate) << ',' << fmt(pt.xi_lower) << ',' << fmt(pt.xi_upper)
       << ',' << (pt.clamped_lower ? 1 : 0) << ',' << (pt.clamped_upper ? 1 : 0) << '\n';
  }
}

}  // namespace fblq::blocklength
