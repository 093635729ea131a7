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

#include "fblq/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fblq/linalg.hpp"

namespace fblq::sdp {

namespace {

using Complex = std::complex<double>;

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

BlockMatrix BlockMatrix::zero(const std::vector<int>& dims) {
  BlockMatrix out;
  out.blocks.reserve(dims.size());
  for (int d : dims) out.blocks.push_back(Matrix::Zero(d, d));
  return out;
}

BlockMatrix BlockMatrix::identity(const std::vector<int>& dims) {
  BlockMatrix out;
  out.blocks.reserve(dims.size());
  for (int d : dims) out.blocks.push_back(Matrix::Identity(d, d));
  return out;
}

double BlockMatrix::norm() const {
  double sq = 0.0;
  for (const Matrix& m : blocks) sq += m.squaredNorm();
  return std::sqrt(sq);
}

double inner(const BlockMatrix& a, const BlockMatrix& b) {
  double sum = 0.0;
  for (size_t k = 0; k < a.blocks.size(); ++k) {
    sum += a.blocks[k].cwiseProduct(b.blocks[k].conjugate()).sum().real();
  }
  return sum;
}

void SparseBlockMatrix::add(int block, Matrix coeff) {
  for (auto& [idx, m] : entries) {
    if (idx == block) {
      m += coeff;
      return;
    }
  }
  entries.emplace_back(block, std::move(coeff));
}

double inner(const SparseBlockMatrix& a, const BlockMatrix& x) {
  double sum = 0.0;
  for (const auto& [idx, m] : a.entries) {
    sum += m.cwiseProduct(x.blocks[idx].conjugate()).sum().real();
  }
  return sum;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::max_iterations: return "max-iterations";
  }
  return "unknown";
}

int Problem::add_block(int dim) {
  if (dim <= 0) throw std::invalid_argument("add_block: dimension must be positive");
  block_dims.push_back(dim);
  objective.blocks.push_back(Matrix::Zero(dim, dim));
  return static_cast<int>(block_dims.size()) - 1;
}

void Problem::set_objective(int block, Matrix coeff) {
  objective.blocks.at(block) = hermitian_part(coeff);
}

void Problem::add_constraint(SparseBlockMatrix a, double b) {
  for (auto& [idx, m] : a.entries) m = hermitian_part(m);
  constraint_ops.push_back(std::move(a));
  rhs.push_back(b);
}

int Problem::total_dim() const {
  return std::accumulate(block_dims.begin(), block_dims.end(), 0);
}

void Problem::dump(std::ostream& os) const {
  os << "blocks";
  for (int d : block_dims) os << ' ' << d;
  os << '\n';
  auto dump_matrix = [&os](int block, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (std::abs(m(i, j)) > 0.0) {
          os << "  " << block << ' ' << i << ' ' << j << ' ' << m(i, j).real() << ' '
             << m(i, j).imag() << '\n';
        }
      }
    }
  };
  os << "objective\n";
  for (size_t k = 0; k < objective.blocks.size(); ++k) {
    dump_matrix(static_cast<int>(k), objective.blocks[k]);
  }
  for (size_t i = 0; i < constraint_ops.size(); ++i) {
    os << "constraint " << i << " rhs " << rhs[i] << '\n';
    for (const auto& [idx, m] : constraint_ops[i].entries) dump_matrix(idx, m);
  }
}

std::vector<Matrix> hermitian_basis(int d) {
  std::vector<Matrix> basis;
  basis.reserve(static_cast<size_t>(d) * d);
  for (int k = 0; k < d; ++k) {
    Matrix e = Matrix::Zero(d, d);
    e(k, k) = 1.0;
    basis.push_back(e);
  }
  for (int k = 0; k < d; ++k) {
    for (int l = k + 1; l < d; ++l) {
      Matrix re = Matrix::Zero(d, d);
      re(k, l) = 1.0;
      re(l, k) = 1.0;
      basis.push_back(re);
      Matrix im = Matrix::Zero(d, d);
      im(k, l) = Complex(0.0, 1.0);
      im(l, k) = Complex(0.0, -1.0);
      basis.push_back(im);
    }
  }
  return basis;
}

Matrix embed_at(const Matrix& small, int off, int d) {
  Matrix out = Matrix::Zero(d, d);
  out.block(off, off, small.rows(), small.cols()) = small;
  return out;
}

void pin_corner(Problem& p, int block, int off, const Matrix& target) {
  const int d = p.block_dims.at(block);
  const int m = static_cast<int>(target.rows());
  for (const Matrix& h : hermitian_basis(m)) {
    SparseBlockMatrix a;
    a.add(block, embed_at(h, off, d));
    const double b = h.cwiseProduct(target.conjugate()).sum().real();
    p.add_constraint(std::move(a), b);
  }
}

OverlapBlock add_overlap_block(Problem& p, const Matrix& reference, int var_dim,
                               std::optional<double> f_target) {
  if (reference.rows() != var_dim) {
    throw std::invalid_argument("add_overlap_block: reference dimension mismatch");
  }
  const linalg::EigenSystem es = linalg::eig_hermitian(reference);
  const double tol = linalg::kSupportTol * std::max(1.0, es.eigenvalues.cwiseAbs().maxCoeff());
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
    if (es.eigenvalues(i) > tol) keep.push_back(static_cast<int>(i));
  }
  const int rank = static_cast<int>(keep.size());
  if (rank == 0) {
    throw std::invalid_argument("add_overlap_block: reference has empty support");
  }
  Matrix u(var_dim, rank);
  Matrix lambda = Matrix::Zero(rank, rank);
  for (int j = 0; j < rank; ++j) {
    u.col(j) = es.eigenvectors.col(keep[j]);
    lambda(j, j) = es.eigenvalues(keep[j]);
  }

  OverlapBlock out;
  out.var_dim = var_dim;
  out.rank = rank;
  out.block = p.add_block(var_dim + rank);
  pin_corner(p, out.block, var_dim, lambda);

  Matrix k = Matrix::Zero(var_dim + rank, var_dim + rank);
  k.block(0, var_dim, var_dim, rank) = 0.5 * u;
  k.block(var_dim, 0, rank, var_dim) = 0.5 * u.adjoint();
  out.objective_coeff = k;

  if (f_target.has_value()) {
    out.slack_block = p.add_block(1);
    SparseBlockMatrix a;
    a.add(out.block, k);
    a.add(out.slack_block, -Matrix::Identity(1, 1));
    p.add_constraint(std::move(a), *f_target);
  }
  return out;
}

OverlapBlock fidelity_block(Problem& p, const Matrix& reference, double f_target) {
  if (f_target < 0.0 || f_target > 1.0) {
    throw std::invalid_argument("fidelity_block: f_target outside [0,1]");
  }
  const double tr = reference.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) {
    throw std::invalid_argument(
        "fidelity_block: reference must be a normalized density operator");
  }
  return add_overlap_block(p, reference, static_cast<int>(reference.rows()), f_target);
}

// ---------------------------------------------------------------------------
// Interior-point solver
// ---------------------------------------------------------------------------

namespace {

struct Scaling {
  std::vector<Matrix> r;    // block scaling, X = r Lambda r^H
  std::vector<Matrix> rti;  // r^{-H}
  std::vector<Eigen::VectorXd> lambda;
};

// Factor G with M = G G^H through the eigendecomposition; robust for
// nearly singular PD iterates.
Matrix psd_factor(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
  Eigen::VectorXd ev = es.eigenvalues();
  const double floor_val = std::max(ev.cwiseAbs().maxCoeff(), 1e-300) * 1e-16;
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), floor_val));
  return es.eigenvectors() * ev.asDiagonal();
}

Scaling nt_scaling(const BlockMatrix& x, const BlockMatrix& s) {
  Scaling w;
  const size_t nb = x.blocks.size();
  w.r.resize(nb);
  w.rti.resize(nb);
  w.lambda.resize(nb);
  for (size_t k = 0; k < nb; ++k) {
    const Matrix gx = psd_factor(x.blocks[k]);
    const Matrix gs = psd_factor(s.blocks[k]);
    Eigen::JacobiSVD<Matrix> svd(gs.adjoint() * gx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::VectorXd sv = svd.singularValues();
    const double sv_floor = std::max(sv.maxCoeff(), 1e-300) * 1e-16;
    for (Eigen::Index i = 0; i < sv.size(); ++i) sv(i) = std::max(sv(i), sv_floor);
    const Eigen::VectorXd isqrt = sv.cwiseSqrt().cwiseInverse();
    w.r[k] = gx * svd.matrixV() * isqrt.asDiagonal();
    w.rti[k] = gs * svd.matrixU() * isqrt.asDiagonal();
    w.lambda[k] = sv;
  }
  return w;
}

// Applies r^H (.) r blockwise to a sparse constraint.
std::vector<std::pair<int, Matrix>> scale_constraint(const SparseBlockMatrix& a,
                                                     const Scaling& w) {
  std::vector<std::pair<int, Matrix>> out;
  out.reserve(a.entries.size());
  for (const auto& [idx, m] : a.entries) {
    out.emplace_back(idx, hermitian_part(w.r[idx].adjoint() * m * w.r[idx]));
  }
  return out;
}

// Elementwise division by the arithmetic means of the scaled spectrum:
// D(M)_ij = 2 M_ij / (lambda_i + lambda_j).
Matrix jordan_solve(const Matrix& m, const Eigen::VectorXd& lambda) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out(i, j) = 2.0 * m(i, j) / (lambda(i) + lambda(j));
    }
  }
  return out;
}

// Largest step alpha with Lambda + alpha * dM >= 0.
double max_step(const Eigen::VectorXd& lambda, const Matrix& dm) {
  const Eigen::VectorXd isqrt = lambda.cwiseSqrt().cwiseInverse();
  const Matrix w = isqrt.asDiagonal() * dm * isqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(w));
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

struct Preprocessed {
  std::vector<SparseBlockMatrix> ops;
  std::vector<double> rhs;
  std::vector<int> kept;  // original index of each kept row
  int dropped = 0;
};

// svec embedding preserving the inner product, used for rank detection.
Eigen::VectorXd svec(const SparseBlockMatrix& a, const std::vector<int>& dims,
                     const std::vector<int>& offsets, int total) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(total);
  const double rt2 = std::sqrt(2.0);
  for (const auto& [idx, m] : a.entries) {
    int pos = offsets[idx];
    const int d = dims[idx];
    for (int i = 0; i < d; ++i) v(pos + i) = m(i, i).real();
    pos += d;
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        v(pos++) = rt2 * m(i, j).real();
        v(pos++) = rt2 * m(i, j).imag();
      }
    }
  }
  return v;
}

Preprocessed drop_dependent(const Problem& p) {
  Preprocessed out;
  std::vector<int> offsets(p.block_dims.size());
  int total = 0;
  for (size_t k = 0; k < p.block_dims.size(); ++k) {
    offsets[k] = total;
    total += p.block_dims[k] * p.block_dims[k];
  }
  std::vector<Eigen::VectorXd> ortho;
  for (size_t i = 0; i < p.constraint_ops.size(); ++i) {
    Eigen::VectorXd v = svec(p.constraint_ops[i], p.block_dims, offsets, total);
    const double norm0 = v.norm();
    for (const auto& u : ortho) v -= u.dot(v) * u;
    // second pass for numerical orthogonality
    for (const auto& u : ortho) v -= u.dot(v) * u;
    if (v.norm() <= 1e-12 * std::max(1.0, norm0)) {
      out.dropped++;
      continue;
    }
    ortho.push_back(v / v.norm());
    out.ops.push_back(p.constraint_ops[i]);
    out.rhs.push_back(p.rhs[i]);
    out.kept.push_back(static_cast<int>(i));
  }
  if (out.dropped > 0) {
    std::cerr << "fblq::sdp: dropped " << out.dropped
              << " linearly dependent constraint row(s)\n";
  }
  return out;
}

}  // namespace

Solution solve(const Problem& p, const SolverOptions& opts) {
  Preprocessed pre = drop_dependent(p);
  const std::vector<int>& dims = p.block_dims;
  const size_t nb = dims.size();
  const int m = static_cast<int>(pre.rhs.size());
  const double nu_total = static_cast<double>(p.total_dim());

  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) b(i) = pre.rhs[i];

  if (m == 0) {
    // No constraints: optimum is X = 0 when C >= 0, else the problem is
    // unbounded along the most negative eigendirection.
    Solution trivial;
    trivial.x = BlockMatrix::zero(dims);
    trivial.s = p.objective;
    trivial.y = Eigen::VectorXd::Zero(0);
    double cmin = 0.0;
    for (const Matrix& blk : p.objective.blocks) {
      if (blk.rows() == 0) continue;
      Eigen::SelfAdjointEigenSolver<Matrix> es(blk);
      cmin = std::min(cmin, es.eigenvalues().minCoeff());
    }
    trivial.status = cmin >= -opts.feas_tol ? Status::optimal : Status::unbounded;
    return trivial;
  }

  double data_scale = std::max(1.0, p.objective.norm());
  for (const auto& a : pre.ops) {
    double nrm = 0.0;
    for (const auto& [idx, mm] : a.entries) nrm += mm.squaredNorm();
    data_scale = std::max(data_scale, std::sqrt(nrm));
  }
  data_scale = std::max(data_scale, b.size() ? b.cwiseAbs().maxCoeff() : 1.0);
  const double s0 = std::min(std::max(1.0, std::sqrt(data_scale)), 1e4);

  Solution sol;
  sol.x = BlockMatrix::identity(dims);
  sol.s = BlockMatrix::identity(dims);
  for (size_t k = 0; k < nb; ++k) {
    sol.x.blocks[k] *= s0;
    sol.s.blocks[k] *= s0;
  }
  sol.y = Eigen::VectorXd::Zero(m);

  // Dual multipliers are reported against the caller's constraint indices;
  // dropped rows carry multiplier 0.
  auto scatter_duals = [&](Solution& s) {
    if (pre.dropped == 0) return;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(p.num_constraints());
    for (int i = 0; i < m; ++i) full(pre.kept[i]) = s.y(i);
    s.y = std::move(full);
    if (s.dual_ray) {
      Eigen::VectorXd ray = Eigen::VectorXd::Zero(p.num_constraints());
      for (int i = 0; i < m; ++i) ray(pre.kept[i]) = (*s.dual_ray)(i);
      s.dual_ray = std::move(ray);
    }
  };

  const double bnorm = 1.0 + b.norm();
  const double cnorm = 1.0 + p.objective.norm();

  Eigen::VectorXd rp(m);
  BlockMatrix rd = BlockMatrix::zero(dims);

  // best iterate so far, returned when the iteration cap is reached
  Solution best = sol;
  double best_merit = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    sol.iterations = iter;
    // residuals
    for (int i = 0; i < m; ++i) rp(i) = b(i) - inner(pre.ops[i], sol.x);
    for (size_t k = 0; k < nb; ++k) rd.blocks[k] = p.objective.blocks[k] - sol.s.blocks[k];
    for (int i = 0; i < m; ++i) {
      for (const auto& [idx, mm] : pre.ops[i].entries) rd.blocks[idx] -= sol.y(i) * mm;
    }
    const double pobj = inner(p.objective, sol.x);
    const double dobj = b.dot(sol.y);
    const double xs = std::max(inner(sol.x, sol.s), 0.0);
    const double mu = xs / nu_total;
    const double pinf = rp.norm() / bnorm;
    const double dinf = rd.norm() / cnorm;
    sol.primal_value = pobj;
    sol.dual_value = dobj;
    sol.gap = std::abs(pobj - dobj);
    sol.primal_infeasibility = pinf;
    sol.dual_infeasibility = dinf;

    const double gap_scale = std::max(1.0, std::abs(pobj));
    if (pinf <= opts.feas_tol && dinf <= opts.feas_tol && xs <= opts.gap_tol * gap_scale &&
        sol.gap <= opts.gap_tol * gap_scale) {
      sol.status = Status::optimal;
      scatter_duals(sol);
      return sol;
    }
    const double merit = std::max({pinf, dinf, xs / gap_scale, sol.gap / gap_scale});
    if (merit < best_merit) {
      best_merit = merit;
      best = sol;
    }

    // Farkas-style certificates for infeasible / unbounded problems.
    if (sol.y.norm() > 1e8 * bnorm) {
      Eigen::VectorXd yhat = sol.y / sol.y.norm();
      if (b.dot(yhat) > 1e-10) {
        BlockMatrix z = BlockMatrix::zero(dims);
        for (int i = 0; i < m; ++i) {
          for (const auto& [idx, mm] : pre.ops[i].entries) z.blocks[idx] -= yhat(i) * mm;
        }
        double zmin = 0.0;
        for (const Matrix& blk : z.blocks) {
          Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(blk));
          zmin = std::min(zmin, es.eigenvalues().minCoeff());
        }
        if (zmin >= -1e-7 * std::max(1.0, z.norm())) {
          sol.status = Status::infeasible;
          sol.dual_ray = yhat;
          scatter_duals(sol);
          return sol;
        }
      }
    }
    if (sol.x.norm() > 1e8 * std::max(1.0, s0) && pobj < -1e6 * gap_scale) {
      const double xnrm = sol.x.norm();
      BlockMatrix xhat = sol.x;
      for (Matrix& blk : xhat.blocks) blk /= xnrm;
      double ax = 0.0;
      for (int i = 0; i < m; ++i) ax += std::pow(inner(pre.ops[i], xhat), 2);
      if (std::sqrt(ax) <= 1e-7 && inner(p.objective, xhat) < -1e-10) {
        sol.status = Status::unbounded;
        sol.primal_ray = xhat;
        scatter_duals(sol);
        return sol;
      }
    }

    const Scaling w = nt_scaling(sol.x, sol.s);

    // scaled constraints and Schur complement
    std::vector<std::vector<std::pair<int, Matrix>>> atil(m);
    for (int i = 0; i < m; ++i) atil[i] = scale_constraint(pre.ops[i], w);
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        double sum = 0.0;
        for (const auto& [bi, mi] : atil[i]) {
          for (const auto& [bj, mj] : atil[j]) {
            if (bi == bj) sum += mi.cwiseProduct(mj.conjugate()).sum().real();
          }
        }
        schur(i, j) = sum;
        schur(j, i) = sum;
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> fact(schur);
    if (fact.info() != Eigen::Success || !fact.isPositive()) {
      const double ridge = 1e-13 * std::max(1.0, schur.trace() / std::max(1, m));
      fact.compute(schur + ridge * Eigen::MatrixXd::Identity(m, m));
    }
    auto solve_schur = [&](const Eigen::VectorXd& rhs_vec) {
      Eigen::VectorXd dy = fact.solve(rhs_vec);
      dy += fact.solve(rhs_vec - schur * dy);  // one refinement pass
      return dy;
    };

    std::vector<Matrix> rdtil(nb);
    for (size_t k = 0; k < nb; ++k) {
      rdtil[k] = hermitian_part(w.r[k].adjoint() * rd.blocks[k] * w.r[k]);
    }
    Eigen::VectorXd g(m);
    for (int i = 0; i < m; ++i) {
      double sum = 0.0;
      for (const auto& [idx, mm] : atil[i]) {
        sum += mm.cwiseProduct(rdtil[idx].conjugate()).sum().real();
      }
      g(i) = sum;
    }

    auto direction = [&](const std::vector<Matrix>& rhs_c, std::vector<Matrix>& dxt,
                         std::vector<Matrix>& dst, Eigen::VectorXd& dy) {
      std::vector<Matrix> drhs(nb);
      for (size_t k = 0; k < nb; ++k) drhs[k] = jordan_solve(rhs_c[k], w.lambda[k]);
      Eigen::VectorXd rhs_vec(m);
      for (int i = 0; i < m; ++i) {
        double q = 0.0;
        for (const auto& [idx, mm] : atil[i]) {
          q += mm.cwiseProduct(drhs[idx].conjugate()).sum().real();
        }
        rhs_vec(i) = rp(i) - q + g(i);
      }
      dy = solve_schur(rhs_vec);
      dst.assign(nb, Matrix());
      for (size_t k = 0; k < nb; ++k) dst[k] = rdtil[k];
      for (int i = 0; i < m; ++i) {
        for (const auto& [idx, mm] : atil[i]) dst[idx] -= dy(i) * mm;
      }
      dxt.assign(nb, Matrix());
      for (size_t k = 0; k < nb; ++k) dxt[k] = hermitian_part(drhs[k] - dst[k]);
    };

    // predictor
    std::vector<Matrix> rhs_c(nb);
    for (size_t k = 0; k < nb; ++k) {
      rhs_c[k] = Matrix::Zero(dims[k], dims[k]);
      rhs_c[k].diagonal() = -w.lambda[k].array().square().matrix().cast<Complex>();
    }
    std::vector<Matrix> dxt_a, dst_a;
    Eigen::VectorXd dy_a;
    direction(rhs_c, dxt_a, dst_a, dy_a);

    double ap = 1.0, ad = 1.0;
    for (size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step(w.lambda[k], dxt_a[k]));
      ad = std::min(ad, max_step(w.lambda[k], dst_a[k]));
    }
    double gap_aff = 0.0;
    for (size_t k = 0; k < nb; ++k) {
      const Matrix la = w.lambda[k].cast<Complex>().asDiagonal();
      gap_aff += ((la + ap * dxt_a[k]) * (la + ad * dst_a[k])).trace().real();
    }
    gap_aff = std::max(gap_aff, 0.0);
    double sigma = std::pow(gap_aff / std::max(xs, 1e-300), 3.0);
    sigma = std::clamp(sigma, 1e-10, 1.0);

    // corrector
    for (size_t k = 0; k < nb; ++k) {
      Matrix corr = hermitian_part(dxt_a[k] * dst_a[k]);
      rhs_c[k] = -corr;
      rhs_c[k].diagonal() += (sigma * mu - w.lambda[k].array().square()).matrix().cast<Complex>();
    }
    std::vector<Matrix> dxt, dst;
    Eigen::VectorXd dy;
    direction(rhs_c, dxt, dst, dy);

    ap = ad = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step(w.lambda[k], dxt[k]));
      ad = std::min(ad, max_step(w.lambda[k], dst[k]));
    }
    ap = std::min(1.0, 0.98 * ap);
    ad = std::min(1.0, 0.98 * ad);

    if (std::getenv("FBLQ_SDP_TRACE") != nullptr) {
      std::cerr << "iter " << iter << " pobj " << pobj << " dobj " << dobj << " xs " << xs
                << " pinf " << pinf << " dinf " << dinf << " sigma " << sigma << " ap " << ap
                << " ad " << ad << '\n';
    }
    if (std::max(ap, ad) < 1e-12) break;  // numerical floor reached

    for (size_t k = 0; k < nb; ++k) {
      sol.x.blocks[k] = hermitian_part(sol.x.blocks[k] + ap * w.r[k] * dxt[k] * w.r[k].adjoint());
    }
    sol.y += ad * dy;
    // The dual slack is updated in the original space: S + ad (Rd - sum dy A)
    // stays accurate even when the scaled representation is ill-conditioned.
    for (size_t k = 0; k < nb; ++k) {
      sol.s.blocks[k] = hermitian_part(sol.s.blocks[k] + ad * rd.blocks[k]);
    }
    for (int i = 0; i < m; ++i) {
      for (const auto& [idx, mm] : pre.ops[i].entries) {
        sol.s.blocks[idx] -= ad * dy(i) * mm;
      }
    }
  }

  best.status = Status::max_iterations;
  scatter_duals(best);
  return best;
}

}  // namespace fblq::sdp
