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

#include "fblq/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fblq/sdp.hpp"

namespace fblq::tasks {

namespace {

int log2_exact(int n) {
  int bits = 0;
  while ((1 << bits) < n) ++bits;
  if ((1 << bits) != n) throw std::invalid_argument("tasks: size must be a power of two");
  return bits;
}

// Projects a numerically-Hermitian, numerically-PSD solver output onto the
// PSD cone so spectral functions downstream see clean input.
Matrix psd_clamp(const Matrix& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::max(ev(i), 0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

HashFamily toeplitz_family(int k, int l) {
  if (k < 1 || k > 4 || l < 0 || l > k) {
    throw std::invalid_argument("toeplitz_family: need 1 <= k <= 4 and 0 <= l <= k");
  }
  HashFamily family;
  family.domain_bits = k;
  family.range_bits = l;
  const int diag_bits = k + l - 1;
  const int num_seeds = 1 << diag_bits;
  family.tables.resize(num_seeds);
  for (int s = 0; s < num_seeds; ++s) {
    family.tables[s].resize(1 << k);
    for (int x = 0; x < (1 << k); ++x) {
      int z = 0;
      for (int i = 0; i < l; ++i) {
        int bit = 0;
        for (int j = 0; j < k; ++j) {
          // T[i][j] = seed bit (i - j + k - 1): constant along diagonals
          bit ^= ((s >> (i - j + k - 1)) & 1) & ((x >> j) & 1);
        }
        z |= bit << i;
      }
      family.tables[s][x] = z;
    }
  }
  // the two-universality invariant is cheap to certify exhaustively at
  // these sizes
  if (max_collision_probability(family) > 1.0 / family.range_size() + 1e-12) {
    throw std::logic_error("toeplitz_family: two-universality check failed");
  }
  return family;
}

double max_collision_probability(const HashFamily& family) {
  const int nx = family.domain_size();
  double worst = 0.0;
  for (int x = 0; x < nx; ++x) {
    for (int xp = x + 1; xp < nx; ++xp) {
      int collisions = 0;
      for (const auto& table : family.tables) {
        if (table[x] == table[xp]) ++collisions;
      }
      worst = std::max(worst, collisions * family.seed_probability());
    }
  }
  return worst;
}

double ExtractionOutput::total_trace() const {
  double t = 0.0;
  for (const auto& row : blocks) {
    for (const Matrix& b : row) t += b.trace().real();
  }
  return t;
}

ExtractionOutput apply_extraction(const states::CqState& rho_xb,
                                  const ExtractionProtocol& protocol) {
  const HashFamily& f = protocol.family;
  if (rho_xb.num_symbols() != f.domain_size()) {
    throw std::invalid_argument("apply_extraction: domain size mismatch");
  }
  ExtractionOutput out;
  out.range_size = f.range_size();
  out.dim_b = rho_xb.dim_b;
  out.blocks.assign(f.num_seeds(),
                    std::vector<Matrix>(out.range_size, Matrix::Zero(out.dim_b, out.dim_b)));
  const double ps = f.seed_probability();
  for (int s = 0; s < f.num_seeds(); ++s) {
    for (int x = 0; x < f.domain_size(); ++x) {
      const auto& e = rho_xb.entries[x];
      out.blocks[s][f.tables[s][x]] += ps * e.probability * e.conditional.op;
    }
  }
  return out;
}

double dsec_exact(const ExtractionOutput& tau) {
  const int db = tau.dim_b;
  // F(tau_ZBS, pi_Z (x) sigma (x) tau_S) decomposes over the classical (z,s)
  // blocks: sum_{s,z} sqrt(p_s / |Z|) || sqrt(block) sqrt(p_s sigma) ||_1.
  sdp::Problem p;
  const int bsig = p.add_block(db);
  struct Term {
    sdp::OverlapBlock ob;
    double weight;
  };
  std::vector<Term> terms;
  const double inv_range = 1.0 / tau.range_size;
  for (const auto& row : tau.blocks) {
    double ps = 0.0;  // seed weight = total mass of the row
    for (const Matrix& block : row) ps += block.trace().real();
    for (const Matrix& block : row) {
      if (block.trace().real() <= 1e-14) continue;
      // || sqrt(block) sqrt((p_s/|Z|) sigma) ||_1
      //   = sqrt(p_s/|Z|) || sqrt(block) sqrt(sigma) ||_1
      Term t;
      t.ob = sdp::add_overlap_block(p, block, db, std::nullopt);
      t.weight = std::sqrt(ps * inv_range);
      terms.push_back(std::move(t));
    }
  }
  // link every overlap block's variable corner to the shared sigma block
  for (const auto& t : terms) {
    const int dm = db + t.ob.rank;
    for (const Matrix& h : sdp::hermitian_basis(db)) {
      sdp::SparseBlockMatrix a;
      a.add(t.ob.block, sdp::embed_at(h, 0, dm));
      a.add(bsig, -h);
      p.add_constraint(std::move(a), 0.0);
    }
  }
  sdp::SparseBlockMatrix tr_sigma;
  tr_sigma.add(bsig, Matrix::Identity(db, db));
  p.add_constraint(std::move(tr_sigma), 1.0);
  for (const auto& t : terms) {
    p.set_objective(t.ob.block, -t.weight * t.ob.objective_coeff);
  }
  // d_sec = sqrt(1 - F^2) amplifies solver error quadratically near F = 1,
  // so this program runs at tightened tolerances; a best-effort iterate that
  // still meets the standard certificate is accepted.
  sdp::SolverOptions opts;
  opts.gap_tol = 1e-11;
  opts.feas_tol = 1e-11;
  auto sol = sdp::solve(p, opts);
  const bool certified =
      sol.status == sdp::Status::optimal ||
      (sol.status == sdp::Status::max_iterations && sol.primal_infeasibility <= 1e-9 &&
       sol.dual_infeasibility <= 1e-8 &&
       sol.gap <= 1e-8 * std::max(1.0, std::abs(sol.primal_value)));
  if (!certified) {
    throw std::runtime_error("dsec_exact: SDP did not reach optimality (" +
                             sdp::to_string(sol.status) + ")");
  }
  const double f_max = std::min(-sol.primal_value, 1.0);
  return std::sqrt(std::max(0.0, 1.0 - f_max * f_max));
}

ExtractionResult direct_extraction(const states::CqState& rho_xb, double eps, double eta) {
  if (!(0.0 < eta && eta <= eps && eps < 1.0)) {
    throw std::invalid_argument("direct_extraction: need 0 < eta <= eps < 1");
  }
  const int k = log2_exact(rho_xb.num_symbols());
  auto rho = states::make_density(rho_xb.full_operator());
  const double hmin =
      one_shot::hmin_smooth(rho, {rho_xb.num_symbols(), rho_xb.dim_b}, eps - eta).value;
  const double raw = hmin + 4.0 * std::log2(eta) - 2.0;
  int length = static_cast<int>(std::floor(raw));
  length = std::clamp(length, 0, k);

  ExtractionResult res;
  res.length_bits = length;
  res.hmin_smoothed = hmin;
  res.protocol.family = toeplitz_family(k, length);
  res.d_sec = dsec_exact(apply_extraction(rho_xb, res.protocol));
  return res;
}

CompressionProtocol pgm_decoder(const Matrix& q_xb_classical, int num_symbols, int dim_b,
                                const HashFamily& encoders) {
  if (q_xb_classical.rows() != num_symbols * dim_b) {
    throw std::invalid_argument("pgm_decoder: witness dimension mismatch");
  }
  if (encoders.domain_size() != num_symbols) {
    throw std::invalid_argument("pgm_decoder: encoder domain mismatch");
  }
  // extract the classical-on-X blocks Q_B^x (pinching discards cross terms);
  // solver witnesses are PSD only to solver tolerance, so clamp
  std::vector<Matrix> qx(num_symbols);
  for (int x = 0; x < num_symbols; ++x) {
    qx[x] = psd_clamp(q_xb_classical.block(x * dim_b, x * dim_b, dim_b, dim_b));
  }
  CompressionProtocol proto;
  proto.encoders = encoders;
  proto.povm.assign(encoders.num_seeds(),
                    std::vector<std::vector<Matrix>>(
                        encoders.range_size(),
                        std::vector<Matrix>(num_symbols, Matrix::Zero(dim_b, dim_b))));
  for (int s = 0; s < encoders.num_seeds(); ++s) {
    for (int m = 0; m < encoders.range_size(); ++m) {
      Matrix g = Matrix::Zero(dim_b, dim_b);
      for (int x = 0; x < num_symbols; ++x) {
        if (encoders.tables[s][x] == m) g += qx[x];
      }
      if (g.cwiseAbs().maxCoeff() <= 1e-14) continue;  // class decodes to abstain
      const Matrix ginv = linalg::matrix_fn(g, linalg::ScalarFn::inverse);
      const Matrix gih = linalg::matrix_fn(ginv, linalg::ScalarFn::sqrt);
      for (int x = 0; x < num_symbols; ++x) {
        if (encoders.tables[s][x] == m) {
          proto.povm[s][m][x] = 0.5 * (gih * qx[x] * gih + (gih * qx[x] * gih).adjoint());
        }
      }
    }
  }
  return proto;
}

double perr_exact(const states::CqState& rho_xb, const CompressionProtocol& protocol) {
  const HashFamily& f = protocol.encoders;
  if (rho_xb.num_symbols() != f.domain_size()) {
    throw std::invalid_argument("perr_exact: domain size mismatch");
  }
  const double ps = f.seed_probability();
  double err = 0.0;
  for (int s = 0; s < f.num_seeds(); ++s) {
    for (int x = 0; x < f.domain_size(); ++x) {
      const auto& e = rho_xb.entries[x];
      const int m = f.tables[s][x];
      const double correct = (e.conditional.op * protocol.povm[s][m][x]).trace().real();
      err += ps * e.probability * (1.0 - std::clamp(correct, 0.0, 1.0));
    }
  }
  return err;
}

CompressionResult direct_compression(const states::CqState& rho_xb, double eps, double eta) {
  if (!(0.0 < eta && eta <= eps && eps < 1.0)) {
    throw std::invalid_argument("direct_compression: need 0 < eta <= eps < 1");
  }
  const int k = log2_exact(rho_xb.num_symbols());
  const int nx = rho_xb.num_symbols();
  const int db = rho_xb.dim_b;
  auto rho = states::make_density(rho_xb.full_operator());
  auto rb = rho_xb.marginal_b();
  auto hh = one_shot::hh_conditional(rho, {nx, db}, rb.op, eps - eta, one_shot::Method::sdp);

  const double c = eta / (2.0 * eps - eta);
  const double penalty = std::log2((2.0 + c + 1.0 / c) / (eta - c * (eps - eta)));
  int m_bits = static_cast<int>(std::ceil(hh.value + penalty));
  m_bits = std::clamp(m_bits, 0, k);

  // pinch the witness classical on X (optimality preserved for CQ states)
  Matrix q = Matrix::Zero(nx * db, nx * db);
  for (int x = 0; x < nx; ++x) {
    q.block(x * db, x * db, db, db) = hh.primal_q.block(x * db, x * db, db, db);
  }

  CompressionResult res;
  res.length_bits = m_bits;
  res.hh_smoothed = hh.value;
  res.protocol = pgm_decoder(q, nx, db, toeplitz_family(k, m_bits));
  res.p_err = perr_exact(rho_xb, res.protocol);
  return res;
}

namespace {

// Optimal success probability of discriminating the sub-ensemble
// {p_x phi_x : x in subset} with a POVM on B.
double class_success(const states::CqState& rho_xb, const std::vector<int>& subset) {
  if (subset.empty()) return 0.0;
  if (subset.size() == 1) return rho_xb.entries[subset[0]].probability;
  const int db = rho_xb.dim_b;
  sdp::Problem p;
  std::vector<int> blocks;
  for (size_t i = 0; i < subset.size(); ++i) blocks.push_back(p.add_block(db));
  for (const Matrix& h : sdp::hermitian_basis(db)) {
    sdp::SparseBlockMatrix a;
    for (int b : blocks) a.add(b, h);
    p.add_constraint(std::move(a), h.trace().real());
  }
  for (size_t i = 0; i < subset.size(); ++i) {
    const auto& e = rho_xb.entries[subset[i]];
    p.set_objective(blocks[i], -e.probability * e.conditional.op);
  }
  auto sol = sdp::solve(p);
  if (sol.status != sdp::Status::optimal) {
    throw std::runtime_error("brute_force_m: discrimination SDP failed");
  }
  return -sol.primal_value;
}

}  // namespace

double brute_force_m(const states::CqState& rho_xb, double eps) {
  const int nx = rho_xb.num_symbols();
  if (nx > 4 || rho_xb.dim_b > 2) {
    throw std::invalid_argument("brute_force_m: instance too large (|X| <= 4, dim B <= 2)");
  }
  // memoize optimal class success by symbol subset
  std::vector<double> success(1 << nx, 0.0);
  for (int mask = 1; mask < (1 << nx); ++mask) {
    std::vector<int> subset;
    for (int x = 0; x < nx; ++x) {
      if (mask & (1 << x)) subset.push_back(x);
    }
    success[mask] = class_success(rho_xb, subset);
  }
  for (int m_size = 1; m_size <= nx; ++m_size) {
    // enumerate deterministic encoders e: X -> {0..m_size-1}
    double best_err = 1.0;
    std::vector<int> code(nx, 0);
    for (;;) {
      int masks[4] = {0, 0, 0, 0};
      for (int x = 0; x < nx; ++x) masks[code[x]] |= 1 << x;
      double succ = 0.0;
      for (int m = 0; m < m_size; ++m) {
        if (masks[m]) succ += success[masks[m]];
      }
      best_err = std::min(best_err, 1.0 - succ);
      int pos = 0;
      while (pos < nx && ++code[pos] == m_size) code[pos++] = 0;
      if (pos == nx) break;
    }
    if (best_err <= eps + 1e-9) return std::log2(static_cast<double>(m_size));
  }
  return std::log2(static_cast<double>(nx));
}

std::string serialize_family(const HashFamily& family) {
  std::ostringstream os;
  os << "domain_bits = " << family.domain_bits << "\n";
  os << "range_bits = " << family.range_bits << "\n";
  os << "tables = " << nlohmann::json(family.tables).dump() << "\n";
  return os.str();
}

HashFamily parse_family(const std::string& text) {
  HashFamily family;
  std::istringstream in(text);
  std::string line;
  bool have_tables = false;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, line.find_first_of(" ="));
    const std::string value = line.substr(eq + 1);
    if (key == "domain_bits") {
      family.domain_bits = std::stoi(value);
    } else if (key == "range_bits") {
      family.range_bits = std::stoi(value);
    } else if (key == "tables") {
      family.tables = nlohmann::json::parse(value).get<std::vector<std::vector<int>>>();
      have_tables = true;
    }
  }
  if (!have_tables || family.tables.empty()) {
    throw std::invalid_argument("parse_family: missing tables");
  }
  for (const auto& t : family.tables) {
    if (static_cast<int>(t.size()) != family.domain_size()) {
      throw std::invalid_argument("parse_family: table size mismatch");
    }
    for (int z : t) {
      if (z < 0 || z >= family.range_size()) {
        throw std::invalid_argument("parse_family: range overflow");
      }
    }
  }
  return family;
}

}  // namespace fblq::tasks
