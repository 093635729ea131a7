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

#include "fblq/one_shot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fblq::one_shot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453;

void validate_state(const DensityOperator& rho) {
  if (!rho.normalized) {
    throw std::invalid_argument("one_shot: state must be normalized");
  }
}

double gap_bits(double primal, double gap_linear) {
  if (primal <= 0.0) return kInf;
  return gap_linear / (primal * kLn2);
}

// ---------------------------------------------------------------------------
// D_h
// ---------------------------------------------------------------------------

// Lagrangian dual of the hypothesis-testing program at fixed multiplier mu:
//   g(mu) = mu (1-eps) - tr[(mu rho - sigma)_+],  concave in mu.
double np_dual(const DensityOperator& rho, const Matrix& sigma, double eps, double mu) {
  return mu * (1.0 - eps) - linalg::trace_positive_part(mu * rho.op - sigma);
}

struct NpResult {
  double beta_dual = 0.0;     // best dual value (lower bound on beta*)
  double beta_witness = 0.0;  // value of the reconstructed test (upper bound)
  double mu = 0.0;
  Matrix q;
  bool witness_feasible = false;
};

NpResult np_solve(const DensityOperator& rho, const Matrix& sigma, double eps) {
  // bracket the concave maximum
  double hi = 1.0;
  double ghi = np_dual(rho, sigma, eps, hi);
  for (int i = 0; i < 200; ++i) {
    const double g2 = np_dual(rho, sigma, eps, 2.0 * hi);
    if (g2 <= ghi) break;
    hi *= 2.0;
    ghi = g2;
  }
  double lo = 0.0, up = 2.0 * hi;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = up - gr * (up - lo), x2 = lo + gr * (up - lo);
  double f1 = np_dual(rho, sigma, eps, x1), f2 = np_dual(rho, sigma, eps, x2);
  for (int it = 0; it < 300; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (up - lo);
      f2 = np_dual(rho, sigma, eps, x2);
    } else {
      up = x2;
      x2 = x1;
      f2 = f1;
      x1 = up - gr * (up - lo);
      f1 = np_dual(rho, sigma, eps, x1);
    }
  }
  NpResult res;
  res.mu = 0.5 * (lo + up);
  res.beta_dual = std::max(np_dual(rho, sigma, eps, res.mu), 0.0);

  // optimal test {rho > mu sigma} + t Pi_ker; every kernel direction trades
  // <.,rho> = mu <.,sigma>, so a uniform scalar t is fully general
  const auto es = linalg::eig_hermitian(res.mu * rho.op - sigma);
  const double scale = std::max(1.0, es.eigenvalues.cwiseAbs().maxCoeff());
  const double ker_tol = 1e-8 * scale;
  const int d = rho.dim();
  Matrix q_strict = Matrix::Zero(d, d), pi_ker = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
    const Matrix vv = es.eigenvectors.col(i) * es.eigenvectors.col(i).adjoint();
    if (es.eigenvalues(i) > ker_tol) {
      q_strict += vv;
    } else if (es.eigenvalues(i) >= -ker_tol) {
      pi_ker += vv;
    }
  }
  const double a_strict = (rho.op * q_strict).trace().real();
  const double a_ker = (rho.op * pi_ker).trace().real();
  double t = 0.0;
  if (a_strict < 1.0 - eps && a_ker > 1e-14) {
    t = std::clamp((1.0 - eps - a_strict) / a_ker, 0.0, 1.0);
  }
  res.q = q_strict + t * pi_ker;
  const double achieved = a_strict + t * a_ker;
  res.witness_feasible = achieved >= 1.0 - eps - 1e-9;
  res.beta_witness = (sigma * res.q).trace().real();
  return res;
}

OneShotResult dh_sdp(const DensityOperator& rho, const Matrix& sigma, double eps) {
  const int d = rho.dim();
  sdp::Problem p;
  const int bq = p.add_block(d);
  const int bs = p.add_block(d);
  const int bu = p.add_block(1);
  for (const Matrix& h : sdp::hermitian_basis(d)) {
    sdp::SparseBlockMatrix a;
    a.add(bq, h);
    a.add(bs, h);
    p.add_constraint(std::move(a), h.trace().real());
  }
  sdp::SparseBlockMatrix inner;
  inner.add(bq, rho.op);
  inner.add(bu, -Matrix::Identity(1, 1));
  p.add_constraint(std::move(inner), 1.0 - eps);
  p.set_objective(bq, sigma);

  auto sol = sdp::solve(p);
  OneShotResult res;
  res.method = Method::sdp;
  res.solver_status = sol.status;
  if (sol.status != sdp::Status::optimal) {
    throw std::runtime_error("dh: SDP did not reach optimality (" +
                             sdp::to_string(sol.status) + ")");
  }
  const double beta = std::max(sol.primal_value, 0.0);
  if (beta <= 1e-300) {
    res.value = kInf;
    return res;
  }
  res.value = -std::log2(beta);
  res.gap = gap_bits(beta, sol.gap);
  res.primal_q = sol.x.blocks[bq];
  return res;
}

}  // namespace

OneShotResult dh(const DensityOperator& rho, const Matrix& sigma, double eps, Method method) {
  validate_state(rho);
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("dh: eps must lie in [0,1]");
  const Matrix sigma_h = linalg::hermitize(sigma);
  OneShotResult res;
  res.method = method;
  if (eps == 1.0) {  // Q = 0 is feasible with <Q,sigma> = 0
    res.value = kInf;
    return res;
  }
  // If at least 1-eps of rho's mass fits inside ker(sigma), a test supported
  // there has zero type-II weight and D_h diverges.
  const Matrix pi_sigma = linalg::support_projector(sigma_h);
  const double kernel_mass = 1.0 - (rho.op * pi_sigma).trace().real();
  if (kernel_mass >= 1.0 - eps - 1e-12) {
    res.value = kInf;
    res.primal_q = Matrix::Identity(rho.dim(), rho.dim()) - pi_sigma;
    return res;
  }
  if (eps == 0.0) {
    // Q must act as the identity on supp(rho); the sigma-cheapest completion
    // is the support projector itself.
    const Matrix pi_rho = linalg::support_projector(rho.op);
    const double beta = (sigma_h * pi_rho).trace().real();
    res.value = -std::log2(beta);
    res.primal_q = pi_rho;
    return res;
  }

  if (method == Method::sdp) return dh_sdp(rho, sigma_h, eps);

  NpResult np = np_solve(rho, sigma_h, eps);
  const bool np_certified =
      np.witness_feasible &&
      np.beta_witness - np.beta_dual <= 1e-9 * std::max(1.0, np.beta_witness);
  if (method == Method::neyman_pearson && np_certified) {
    res.value = -std::log2(np.beta_witness);
    res.gap = gap_bits(np.beta_witness, np.beta_witness - np.beta_dual);
    res.primal_q = np.q;
    return res;
  }

  OneShotResult via_sdp = dh_sdp(rho, sigma_h, eps);
  if (method == Method::cross_check && np_certified) {
    const double np_value = -std::log2(np.beta_witness);
    if (std::abs(np_value - via_sdp.value) > kCrossCheckTol) {
      throw method_disagreement("dh: Neyman-Pearson and SDP disagree by " +
                                std::to_string(std::abs(np_value - via_sdp.value)) +
                                " bits (solver bug)");
    }
  }
  via_sdp.method = method;
  return via_sdp;
}

OneShotResult hh_conditional(const DensityOperator& rho_ab, const std::vector<int>& dims,
                             const Matrix& sigma_b, double eps, Method method) {
  if (dims.size() != 2 || dims[0] * dims[1] != rho_ab.dim()) {
    throw std::invalid_argument("hh_conditional: dims must be {d_A, d_B}");
  }
  const Matrix sigma = linalg::kron(Matrix::Identity(dims[0], dims[0]), sigma_b);
  OneShotResult res = dh(rho_ab, sigma, eps, method);
  res.value = -res.value;
  res.sigma_b = sigma_b;
  return res;
}

OneShotResult hh_optimized(const DensityOperator& rho_ab, const std::vector<int>& dims,
                           double eps) {
  validate_state(rho_ab);
  if (dims.size() != 2 || dims[0] * dims[1] != rho_ab.dim()) {
    throw std::invalid_argument("hh_optimized: dims must be {d_A, d_B}");
  }
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("hh_optimized: eps in [0,1]");
  const int da = dims[0], db = dims[1], d = da * db;
  OneShotResult res;
  res.method = Method::sdp;
  if (eps == 1.0) {
    res.value = -kInf;  // Q = 0 feasible, program value 0
    return res;
  }

  if (eps == 0.0) {
    // <Q,rho> = tr rho forces Q to act as the identity on supp(rho).
    const auto es = linalg::eig_hermitian(rho_ab.op);
    const double tol =
        linalg::kSupportTol * std::max(1.0, es.eigenvalues.cwiseAbs().maxCoeff());
    std::vector<int> ker;
    Matrix pi = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
      if (es.eigenvalues(i) > tol) {
        pi += es.eigenvectors.col(i) * es.eigenvectors.col(i).adjoint();
      } else {
        ker.push_back(static_cast<int>(i));
      }
    }
    const Matrix pi_b = states::partial_trace(pi, dims, 0);
    if (ker.empty()) {
      res.value = std::log2(static_cast<double>(da));
      res.primal_q = Matrix::Identity(d, d);
      return res;
    }
    const int k = static_cast<int>(ker.size());
    Matrix v(d, k);
    for (int j = 0; j < k; ++j) v.col(j) = es.eigenvectors.col(ker[j]);
    sdp::Problem p;
    const int bq = p.add_block(k);
    const int bs = p.add_block(k);
    const int br = p.add_block(db);
    const int bt = p.add_block(1);
    for (const Matrix& h : sdp::hermitian_basis(k)) {
      sdp::SparseBlockMatrix a;
      a.add(bq, h);
      a.add(bs, h);
      p.add_constraint(std::move(a), h.trace().real());
    }
    for (const Matrix& h : sdp::hermitian_basis(db)) {
      sdp::SparseBlockMatrix a;
      a.add(br, h);
      a.add(bq, v.adjoint() * linalg::kron(Matrix::Identity(da, da), h) * v);
      a.add(bt, -Matrix::Identity(1, 1) * h.trace());
      p.add_constraint(std::move(a), -(h.cwiseProduct(pi_b.conjugate()).sum().real()));
    }
    p.set_objective(bt, Matrix::Identity(1, 1));
    auto sol = sdp::solve(p);
    if (sol.status != sdp::Status::optimal) {
      throw std::runtime_error("hh_optimized: SDP did not reach optimality");
    }
    res.value = std::log2(std::max(sol.primal_value, 1e-300));
    res.gap = gap_bits(sol.primal_value, sol.gap);
    res.primal_q = pi + v * sol.x.blocks[bq] * v.adjoint();
    res.solver_status = sol.status;
    return res;
  }

  sdp::Problem p;
  const int bq = p.add_block(d);
  const int bs = p.add_block(d);
  const int br = p.add_block(db);
  const int bu = p.add_block(1);
  const int bt = p.add_block(1);
  // Q + S = 1
  for (const Matrix& h : sdp::hermitian_basis(d)) {
    sdp::SparseBlockMatrix a;
    a.add(bq, h);
    a.add(bs, h);
    p.add_constraint(std::move(a), h.trace().real());
  }
  // R = t 1_B - tr_A(Q)
  for (const Matrix& h : sdp::hermitian_basis(db)) {
    sdp::SparseBlockMatrix a;
    a.add(br, h);
    a.add(bq, linalg::kron(Matrix::Identity(da, da), h));
    a.add(bt, -Matrix::Identity(1, 1) * h.trace());
    p.add_constraint(std::move(a), 0.0);
  }
  // <Q,rho> - u = 1 - eps
  sdp::SparseBlockMatrix inner;
  inner.add(bq, rho_ab.op);
  inner.add(bu, -Matrix::Identity(1, 1));
  p.add_constraint(std::move(inner), 1.0 - eps);
  p.set_objective(bt, Matrix::Identity(1, 1));

  auto sol = sdp::solve(p);
  if (sol.status != sdp::Status::optimal) {
    throw std::runtime_error("hh_optimized: SDP did not reach optimality (" +
                             sdp::to_string(sol.status) + ")");
  }
  res.solver_status = sol.status;
  res.value = std::log2(std::max(sol.primal_value, 1e-300));
  res.gap = gap_bits(sol.primal_value, sol.gap);
  res.primal_q = sol.x.blocks[bq];

  // Map the standard-form multipliers onto the named dual triple
  // (N, sigma_B, eta): Xi from the Q+S=1 rows, Omega from the R-link rows.
  const auto basis_d = sdp::hermitian_basis(d);
  const auto basis_b = sdp::hermitian_basis(db);
  Matrix xi = Matrix::Zero(d, d), omega = Matrix::Zero(db, db);
  for (size_t i = 0; i < basis_d.size(); ++i) xi += sol.y(static_cast<int>(i)) * basis_d[i];
  for (size_t i = 0; i < basis_b.size(); ++i) {
    omega += sol.y(static_cast<int>(basis_d.size() + i)) * basis_b[i];
  }
  res.dual_eta = sol.y(static_cast<int>(basis_d.size() + basis_b.size()));
  res.sigma_b = -omega;
  if (res.dual_eta > 1e-12) res.dual_n = -xi / res.dual_eta;
  return res;
}

namespace {

// value = log2(t*) of min t s.t. rho_tilde <= t sigma, rho_tilde in the
// eps-ball around rho, everything compressed to supp(sigma).
OneShotResult dmax_sdp(const Matrix& rho_c, const Matrix& sigma_c, double f_target,
                       double perturbation) {
  const int dc = static_cast<int>(rho_c.rows());
  Matrix ref = rho_c;
  if (perturbation > 0.0) {
    ref = (1.0 - perturbation) * rho_c +
          (perturbation * rho_c.trace().real() / dc) * Matrix::Identity(dc, dc);
  }
  sdp::Problem p;
  auto ob = sdp::add_overlap_block(p, ref, dc, f_target);
  const int bw = p.add_block(dc);
  const int bwslack = p.add_block(1);
  const int bt = p.add_block(1);
  const int dm = dc + ob.rank;
  // W = t sigma_c - rho_tilde
  for (const Matrix& h : sdp::hermitian_basis(dc)) {
    sdp::SparseBlockMatrix a;
    a.add(bw, h);
    a.add(ob.block, sdp::embed_at(h, 0, dm));
    a.add(bt, -Matrix::Identity(1, 1) * h.cwiseProduct(sigma_c.conjugate()).sum().real());
    p.add_constraint(std::move(a), 0.0);
  }
  // tr rho_tilde + w = 1
  sdp::SparseBlockMatrix tr_c;
  tr_c.add(ob.block, sdp::embed_at(Matrix::Identity(dc, dc), 0, dm));
  tr_c.add(bwslack, Matrix::Identity(1, 1));
  p.add_constraint(std::move(tr_c), 1.0);
  p.set_objective(bt, Matrix::Identity(1, 1));

  auto sol = sdp::solve(p);
  OneShotResult res;
  res.method = Method::sdp;
  res.solver_status = sol.status;
  res.perturbation = perturbation;
  if (sol.status != sdp::Status::optimal) return res;
  res.value = std::log2(std::max(sol.primal_value, 1e-300));
  res.gap = gap_bits(sol.primal_value, sol.gap);
  res.rho_tilde = sol.x.blocks[ob.block].topLeftCorner(dc, dc);
  return res;
}

}  // namespace

OneShotResult dmax_smooth(const DensityOperator& rho, const Matrix& sigma, double eps) {
  validate_state(rho);
  if (eps < 0.0 || eps >= 1.0) throw std::invalid_argument("dmax_smooth: eps in [0,1)");
  const Matrix sigma_h = linalg::hermitize(sigma);
  const int d = rho.dim();
  OneShotResult res;
  res.method = Method::sdp;

  // compress everything to supp(sigma); the overlap with rho is unchanged
  const auto es = linalg::eig_hermitian(sigma_h);
  const double tol = linalg::kSupportTol * std::max(1.0, es.eigenvalues.cwiseAbs().maxCoeff());
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
    if (es.eigenvalues(i) > tol) keep.push_back(static_cast<int>(i));
  }
  if (keep.empty()) {
    res.value = kInf;
    return res;
  }
  const int dc = static_cast<int>(keep.size());
  Matrix v(d, dc);
  for (int j = 0; j < dc; ++j) v.col(j) = es.eigenvectors.col(keep[j]);
  const Matrix rho_c = v.adjoint() * rho.op * v;
  const Matrix sigma_c = v.adjoint() * sigma_h * v;
  const double f_target = std::sqrt(std::max(0.0, 1.0 - eps * eps));

  // max_{rho_tilde in supp(sigma)} F(rho_tilde, rho) = sqrt(tr Pi_sigma rho)
  const double f_max = std::sqrt(std::max(rho_c.trace().real(), 0.0));
  if (f_max < f_target - 1e-12) {
    res.value = kInf;  // eps too small to smooth into supp(sigma)
    return res;
  }

  if (eps == 0.0) {
    const Matrix isq = linalg::matrix_fn(sigma_c, linalg::ScalarFn::inverse);
    const Matrix isqrt = linalg::matrix_fn(isq, linalg::ScalarFn::sqrt);
    res.value = std::log2(linalg::op_norm(isqrt * rho_c * isqrt));
    res.rho_tilde = rho.op;
    return res;
  }

  OneShotResult out = dmax_sdp(rho_c, sigma_c, f_target, 0.0);
  if (out.solver_status != sdp::Status::optimal) {
    out = dmax_sdp(rho_c, sigma_c, f_target, 1e-12);
    if (out.solver_status != sdp::Status::optimal) {
      throw std::runtime_error("dmax_smooth: SDP did not reach optimality (" +
                               sdp::to_string(out.solver_status) + ")");
    }
  }
  // lift the witness back to the ambient space
  out.rho_tilde = v * out.rho_tilde * v.adjoint();
  return out;
}

OneShotResult hmin_smooth(const DensityOperator& rho_ab, const std::vector<int>& dims,
                          double eps) {
  validate_state(rho_ab);
  if (dims.size() != 2 || dims[0] * dims[1] != rho_ab.dim()) {
    throw std::invalid_argument("hmin_smooth: dims must be {d_A, d_B}");
  }
  if (eps < 0.0 || eps >= 1.0) throw std::invalid_argument("hmin_smooth: eps in [0,1)");
  const int da = dims[0], db = dims[1], d = da * db;
  OneShotResult res;
  res.method = Method::sdp;

  sdp::Problem p;
  int host_block = -1;
  int host_dim = d;
  if (eps == 0.0) {
    // rho_tilde = rho: a plain covering program min tr sigma, 1 (x) sigma >= rho
    const int bw = p.add_block(d);
    const int bsig = p.add_block(db);
    for (const Matrix& h : sdp::hermitian_basis(d)) {
      sdp::SparseBlockMatrix a;
      a.add(bw, h);
      a.add(bsig, -states::partial_trace(h, dims, 0));
      p.add_constraint(std::move(a), -(h.cwiseProduct(rho_ab.op.conjugate()).sum().real()));
    }
    p.set_objective(bsig, Matrix::Identity(db, db));
    auto sol = sdp::solve(p);
    if (sol.status != sdp::Status::optimal) {
      throw std::runtime_error("hmin_smooth: SDP did not reach optimality");
    }
    res.value = -std::log2(std::max(sol.primal_value, 1e-300));
    res.gap = gap_bits(sol.primal_value, sol.gap);
    res.sigma_b = sol.x.blocks[bsig];
    res.rho_tilde = rho_ab.op;
    res.solver_status = sol.status;
    return res;
  }

  const double f_target = std::sqrt(std::max(0.0, 1.0 - eps * eps));
  auto ob = sdp::add_overlap_block(p, rho_ab.op, d, f_target);
  host_block = ob.block;
  host_dim = d + ob.rank;
  const int bw = p.add_block(d);
  const int bsig = p.add_block(db);
  const int bslack = p.add_block(1);
  // W = 1 (x) sigma - rho_tilde
  for (const Matrix& h : sdp::hermitian_basis(d)) {
    sdp::SparseBlockMatrix a;
    a.add(bw, h);
    a.add(host_block, sdp::embed_at(h, 0, host_dim));
    a.add(bsig, -states::partial_trace(h, dims, 0));
    p.add_constraint(std::move(a), 0.0);
  }
  // tr rho_tilde + w = 1
  sdp::SparseBlockMatrix tr_c;
  tr_c.add(host_block, sdp::embed_at(Matrix::Identity(d, d), 0, host_dim));
  tr_c.add(bslack, Matrix::Identity(1, 1));
  p.add_constraint(std::move(tr_c), 1.0);
  p.set_objective(bsig, Matrix::Identity(db, db));

  auto sol = sdp::solve(p);
  if (sol.status != sdp::Status::optimal) {
    throw std::runtime_error("hmin_smooth: SDP did not reach optimality (" +
                             sdp::to_string(sol.status) + ")");
  }
  res.solver_status = sol.status;
  res.value = -std::log2(std::max(sol.primal_value, 1e-300));
  res.gap = gap_bits(sol.primal_value, sol.gap);
  res.rho_tilde = sol.x.blocks[host_block].topLeftCorner(d, d);
  res.sigma_b = sol.x.blocks[bsig];
  return res;
}

}  // namespace fblq::one_shot
