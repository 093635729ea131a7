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

#include "fblq/states.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fblq::states {

using linalg::Complex;

DensityOperator make_density(const Matrix& op) {
  const Matrix h = linalg::hermitize(op);
  const auto es = linalg::eig_hermitian(h);
  const double scale = std::max(1.0, es.eigenvalues.cwiseAbs().maxCoeff());
  if (es.eigenvalues.minCoeff() < -1e-12 * scale) {
    throw std::invalid_argument("make_density: operator is not positive semi-definite");
  }
  const double tr = h.trace().real();
  if (tr <= 0.0 || tr > 1.0 + 1e-12) {
    throw std::invalid_argument("make_density: trace outside (0, 1]");
  }
  DensityOperator rho;
  rho.op = h;
  rho.normalized = std::abs(tr - 1.0) <= 1e-10;
  return rho;
}

Matrix CqState::full_operator() const {
  const int nx = num_symbols();
  Matrix out = Matrix::Zero(nx * dim_b, nx * dim_b);
  for (int x = 0; x < nx; ++x) {
    out.block(x * dim_b, x * dim_b, dim_b, dim_b) =
        entries[x].probability * entries[x].conditional.op;
  }
  return out;
}

DensityOperator CqState::marginal_b() const {
  Matrix b = Matrix::Zero(dim_b, dim_b);
  for (const Entry& e : entries) b += e.probability * e.conditional.op;
  return make_density(b);
}

CqState make_cq_state(const std::vector<double>& probs, const std::vector<Matrix>& conditionals) {
  if (probs.size() != conditionals.size() || probs.empty()) {
    throw std::invalid_argument("make_cq_state: mismatched symbol lists");
  }
  CqState cq;
  cq.dim_b = static_cast<int>(conditionals.front().rows());
  double total = 0.0;
  for (size_t x = 0; x < probs.size(); ++x) {
    if (probs[x] < -1e-15) throw std::invalid_argument("make_cq_state: negative probability");
    if (conditionals[x].rows() != cq.dim_b) {
      throw std::invalid_argument("make_cq_state: conditional dimension mismatch");
    }
    DensityOperator phi = make_density(conditionals[x]);
    if (!phi.normalized) {
      throw std::invalid_argument("make_cq_state: conditional states must be normalized");
    }
    total += probs[x];
    cq.entries.push_back({std::max(probs[x], 0.0), phi});
  }
  if (total > 1.0 + 1e-10) throw std::invalid_argument("make_cq_state: probabilities exceed 1");
  return cq;
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  DensityOperator out;
  out.op = linalg::kron(a.op, b.op);
  out.normalized = a.normalized && b.normalized;
  return out;
}

DensityOperator tensor_power(const DensityOperator& rho, int n) {
  if (n < 1) throw std::invalid_argument("tensor_power: n must be >= 1");
  double total_dim = 1.0;
  for (int i = 0; i < n; ++i) {
    total_dim *= rho.dim();
    if (total_dim > 64.0) {
      throw std::invalid_argument(
          "tensor_power: explicit tensor powers beyond total dimension 64 are rejected; "
          "use the blocklength evaluators for large n");
    }
  }
  DensityOperator out = rho;
  for (int i = 1; i < n; ++i) out = tensor(out, rho);
  return out;
}

Matrix partial_trace(const Matrix& m, const std::vector<int>& dims, int which) {
  const int total = std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<int>());
  if (m.rows() != total || which < 0 || which >= static_cast<int>(dims.size())) {
    throw std::invalid_argument("partial_trace: inconsistent dimensions");
  }
  int left = 1, right = 1;
  for (int k = 0; k < which; ++k) left *= dims[k];
  for (size_t k = which + 1; k < dims.size(); ++k) right *= dims[k];
  const int dt = dims[which];
  Matrix out = Matrix::Zero(left * right, left * right);
  for (int l = 0; l < left; ++l) {
    for (int lp = 0; lp < left; ++lp) {
      for (int r = 0; r < right; ++r) {
        for (int rp = 0; rp < right; ++rp) {
          Complex sum = 0.0;
          for (int t = 0; t < dt; ++t) {
            sum += m((l * dt + t) * right + r, (lp * dt + t) * right + rp);
          }
          out(l * right + r, lp * right + rp) = sum;
        }
      }
    }
  }
  return out;
}

Matrix permute_systems(const Matrix& m, const std::vector<int>& dims,
                       const std::vector<int>& perm) {
  const int total = std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<int>());
  const int nsys = static_cast<int>(dims.size());
  if (m.rows() != total || perm.size() != dims.size()) {
    throw std::invalid_argument("permute_systems: inconsistent dimensions");
  }
  // strides of the original index layout
  std::vector<int> stride(nsys, 1);
  for (int k = nsys - 2; k >= 0; --k) stride[k] = stride[k + 1] * dims[k + 1];
  // map new flat index -> old flat index
  std::vector<int> new_dims(nsys);
  for (int k = 0; k < nsys; ++k) new_dims[k] = dims[perm[k]];
  std::vector<int> map(total);
  for (int idx = 0; idx < total; ++idx) {
    int rem = idx, old = 0;
    for (int k = nsys - 1; k >= 0; --k) {
      const int digit = rem % new_dims[k];
      rem /= new_dims[k];
      old += digit * stride[perm[k]];
    }
    map[idx] = old;
  }
  Matrix out(total, total);
  for (int i = 0; i < total; ++i) {
    for (int j = 0; j < total; ++j) out(i, j) = m(map[i], map[j]);
  }
  return out;
}

namespace {

// Clusters an ascending spectrum by relative gap; returns cluster boundaries.
std::vector<std::vector<int>> cluster_spectrum(const Eigen::VectorXd& ev, double cluster_tol) {
  std::vector<std::vector<int>> clusters;
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const bool merge =
        !clusters.empty() &&
        std::abs(ev(i) - ev(clusters.back().back())) <=
            cluster_tol * std::max({std::abs(ev(i)), std::abs(ev(clusters.back().back())),
                                    scale * linalg::kSupportTol});
    if (merge) {
      clusters.back().push_back(static_cast<int>(i));
    } else {
      clusters.push_back({static_cast<int>(i)});
    }
  }
  return clusters;
}

}  // namespace

std::vector<Matrix> eigenspace_projectors(const Matrix& sigma, double cluster_tol) {
  const auto es = linalg::eig_hermitian(sigma);
  const auto clusters = cluster_spectrum(es.eigenvalues, cluster_tol);
  std::vector<Matrix> projectors;
  projectors.reserve(clusters.size());
  for (const auto& c : clusters) {
    Matrix p = Matrix::Zero(sigma.rows(), sigma.cols());
    for (int i : c) p += es.eigenvectors.col(i) * es.eigenvectors.col(i).adjoint();
    projectors.push_back(std::move(p));
  }
  return projectors;
}

DensityOperator pinching(const Matrix& sigma, const DensityOperator& rho, double cluster_tol) {
  const auto projectors = eigenspace_projectors(sigma, cluster_tol);
  DensityOperator out;
  out.op = linalg::hermitize(linalg::pinch_with_projectors(rho.op, projectors), 1e-9);
  out.normalized = rho.normalized;
  return out;
}

double fidelity(const DensityOperator& rho, const DensityOperator& tau) {
  const Matrix sr = linalg::matrix_fn(rho.op, linalg::ScalarFn::sqrt);
  const Matrix st = linalg::matrix_fn(tau.op, linalg::ScalarFn::sqrt);
  Eigen::JacobiSVD<Matrix> svd(sr * st);
  double f = svd.singularValues().sum();
  const double dr = std::max(0.0, 1.0 - rho.trace());
  const double dt = std::max(0.0, 1.0 - tau.trace());
  f += std::sqrt(dr * dt);
  return std::min(f, 1.0);
}

double purified_distance(const DensityOperator& rho, const DensityOperator& tau) {
  const double f = fidelity(rho, tau);
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

double trace_distance(const DensityOperator& rho, const DensityOperator& tau) {
  const auto es = linalg::eig_hermitian(rho.op - tau.op);
  const double tnorm = es.eigenvalues.cwiseAbs().sum();
  return 0.5 * tnorm + 0.5 * std::abs(rho.trace() - tau.trace());
}

SpectralStats spectral_stats(const Matrix& sigma, double cluster_tol) {
  const auto es = linalg::eig_hermitian(sigma);
  const double scale = std::max(es.eigenvalues.cwiseAbs().maxCoeff(), 0.0);
  if (scale <= 0.0) throw std::invalid_argument("spectral_stats: zero operator");
  if (es.eigenvalues.minCoeff() < -linalg::kSupportTol * scale) {
    throw std::invalid_argument("spectral_stats: operator is not PSD");
  }
  const auto clusters = cluster_spectrum(es.eigenvalues, cluster_tol);
  SpectralStats st;
  st.nu = static_cast<int>(clusters.size());
  const double lmin = es.eigenvalues.minCoeff();
  if (lmin <= linalg::kSupportTol * scale) {
    st.lambda = std::numeric_limits<double>::infinity();
    st.theta = st.nu;
    return st;
  }
  st.lambda = std::log2(es.eigenvalues.maxCoeff()) - std::log2(lmin);
  // ceil(lambda) floored at 1 so theta >= 1; the 1e-9 guard keeps an
  // integral lambda from rounding up.
  const double lam_ceil = std::max(1.0, std::ceil(st.lambda - 1e-9));
  st.theta = static_cast<int>(std::min<double>(2.0 * lam_ceil, st.nu));
  st.theta = std::max(st.theta, 1);
  return st;
}

}  // namespace fblq::states
