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

#include "fblq/hierarchy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <thread>

#include <json.hpp>

namespace fblq::hierarchy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// splitmix64 with Box-Muller on top; self-contained so that seeded instances
// are bit-identical everywhere.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next_u64() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() {  // (0,1)
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }
  double normal() {
    const double u1 = uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  linalg::Complex cnormal() { return {normal(), normal()}; }
};

Matrix haar_unitary(int d, Rng& rng) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.cnormal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    const auto piv = r(j, j);
    if (std::abs(piv) > 0) q.col(j) *= piv / std::abs(piv);
  }
  return q;
}

Eigen::VectorXd dirichlet(int d, Rng& rng, double floor_weight) {
  Eigen::VectorXd v(d);
  double sum = 0.0;
  for (int i = 0; i < d; ++i) {
    v(i) = -std::log(rng.uniform());
    sum += v(i);
  }
  v /= sum;
  // keep instances comfortably full-rank
  v = (1.0 - floor_weight) * v + (floor_weight / d) * Eigen::VectorXd::Ones(d);
  return v;
}

Matrix rotated_spectrum(const Eigen::VectorXd& spectrum, Rng& rng) {
  const int d = static_cast<int>(spectrum.size());
  const Matrix u = haar_unitary(d, rng);
  return u * spectrum.asDiagonal() * u.adjoint();
}

}  // namespace

std::string to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::generic: return "generic";
    case InstanceKind::commuting: return "commuting";
    case InstanceKind::cq: return "cq";
    case InstanceKind::degenerate: return "degenerate";
    case InstanceKind::narrow: return "narrow";
  }
  return "unknown";
}

InstanceKind instance_kind_from_string(const std::string& s) {
  if (s == "generic") return InstanceKind::generic;
  if (s == "commuting") return InstanceKind::commuting;
  if (s == "cq") return InstanceKind::cq;
  if (s == "degenerate") return InstanceKind::degenerate;
  if (s == "narrow") return InstanceKind::narrow;
  throw std::invalid_argument("unknown instance kind: " + s);
}

std::string Instance::descriptor() const {
  return to_string(kind) + ":" + std::to_string(dim) + ":" + std::to_string(seed);
}

Instance random_instance(int dim, InstanceKind kind, std::uint64_t seed) {
  if (dim < 2 || dim > 4) throw std::invalid_argument("random_instance: dim in {2,3,4}");
  Rng rng(seed * 0x51ed2701u + 17u);
  Instance inst;
  inst.kind = kind;
  inst.dim = dim;
  inst.seed = seed;
  switch (kind) {
    case InstanceKind::generic: {
      inst.rho = states::make_density(rotated_spectrum(dirichlet(dim, rng, 0.1), rng));
      inst.sigma = rotated_spectrum(dirichlet(dim, rng, 0.1), rng);
      break;
    }
    case InstanceKind::commuting: {
      const Matrix u = haar_unitary(dim, rng);
      inst.rho = states::make_density(u * dirichlet(dim, rng, 0.1).asDiagonal() * u.adjoint());
      inst.sigma = u * dirichlet(dim, rng, 0.1).asDiagonal() * u.adjoint();
      break;
    }
    case InstanceKind::cq: {
      // |X| = dim classical symbols, pure conditionals on a qubit B
      std::vector<double> probs(dim);
      const Eigen::VectorXd pr = dirichlet(dim, rng, 0.2);
      std::vector<Matrix> phis;
      for (int x = 0; x < dim; ++x) {
        probs[x] = pr(x);
        Eigen::Vector2cd v;
        v << rng.cnormal(), rng.cnormal();
        v.normalize();
        phis.push_back(v * v.adjoint());
      }
      auto cq = states::make_cq_state(probs, phis);
      inst.rho = states::make_density(cq.full_operator());
      inst.sigma = linalg::kron(Matrix::Identity(dim, dim), cq.marginal_b().op);
      break;
    }
    case InstanceKind::degenerate: {
      inst.rho = states::make_density(rotated_spectrum(dirichlet(dim, rng, 0.1), rng));
      Eigen::VectorXd spectrum = dirichlet(dim, rng, 0.1);
      // collapse the top two eigenvalues to an exactly repeated pair
      std::sort(spectrum.data(), spectrum.data() + dim);
      spectrum(dim - 2) = spectrum(dim - 1);
      spectrum /= spectrum.sum();
      inst.sigma = rotated_spectrum(spectrum, rng);
      break;
    }
    case InstanceKind::narrow: {
      inst.rho = states::make_density(rotated_spectrum(dirichlet(dim, rng, 0.1), rng));
      // spectrum inside one octave: lambda < 1 while nu = dim, so
      // theta = min(2 ceil(lambda), nu) takes the lambda branch for dim > 2
      Eigen::VectorXd spectrum(dim);
      for (int i = 0; i < dim; ++i) spectrum(i) = 1.0 + 0.9 * rng.uniform();
      spectrum /= spectrum.sum();
      inst.sigma = rotated_spectrum(spectrum, rng);
      break;
    }
  }
  return inst;
}

namespace {

InequalityReport make_report(std::string name, double lhs, double rhs, double eps, double delta,
                             const Instance& inst) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.eps = eps;
  r.delta = delta;
  r.instance = inst.descriptor();
  if (std::isinf(rhs) && rhs > 0) {
    r.slack = kInf;
    r.pass = true;
  } else if (std::isinf(lhs) && lhs > 0) {
    // lhs = +inf only passes against rhs = +inf (handled above)
    r.slack = -kInf;
    r.pass = false;
  } else if (std::isinf(lhs) && lhs < 0) {
    r.slack = kInf;
    r.pass = true;
  } else {
    r.slack = rhs - lhs;
    r.pass = r.slack >= kSlackTol;
  }
  return r;
}

double log2_of(double x) { return std::log2(x); }

// D_s^eps(E_sigma(rho) || sigma) via the exact classical reduction on the
// joint eigenbasis (the pinched state commutes with sigma by construction).
double ds_pinched_classical(const Instance& inst, double eps) {
  const auto projectors = states::eigenspace_projectors(inst.sigma);
  const auto pinched = states::pinching(inst.sigma, inst.rho);
  std::vector<double> p, q;
  for (const Matrix& proj : projectors) {
    const double s_val = (inst.sigma * proj).trace().real() / proj.trace().real();
    // eigenvalues of the pinched state inside this eigenspace
    const auto es = linalg::eig_hermitian(proj * pinched.op * proj);
    const int rank = static_cast<int>(std::lround(proj.trace().real()));
    for (Eigen::Index i = es.eigenvalues.size() - rank; i < es.eigenvalues.size(); ++i) {
      p.push_back(std::max(es.eigenvalues(i), 0.0));
      q.push_back(s_val);
    }
  }
  double psum = 0.0;
  for (double w : p) psum += w;
  for (double& w : p) w /= psum;
  return divergences::ds_classical(divergences::make_classical_pair(p, q), eps);
}

}  // namespace

std::vector<InequalityReport> verify_spectrum_sandwich(const Instance& inst, double eps,
                                                       double delta) {
  if (!(eps > 0.0 && delta > 0.0 && eps + delta < 1.0)) {
    throw std::invalid_argument("verify_spectrum_sandwich: need 0 < eps, eps + delta < 1");
  }
  const double ds_eps = divergences::ds_quantum(inst.rho, inst.sigma, eps);
  const double ds_eps_delta = divergences::ds_quantum(inst.rho, inst.sigma, eps + delta);
  const double dh = one_shot::dh(inst.rho, inst.sigma, eps).value;
  std::vector<InequalityReport> out;
  out.push_back(make_report("ds-le-dh", ds_eps, dh, eps, delta, inst));
  out.push_back(
      make_report("dh-le-ds", dh, ds_eps_delta - log2_of(delta), eps, delta, inst));
  return out;
}

std::vector<InequalityReport> verify_nu_relations(const Instance& inst, double eps,
                                                  double delta) {
  if (!(0.0 < delta && delta < eps && eps < 1.0)) {
    throw std::invalid_argument("verify_nu_relations: need 0 < delta < eps < 1");
  }
  const double nu = states::spectral_stats(inst.sigma).nu;
  const double dmax = one_shot::dmax_smooth(inst.rho, inst.sigma, std::sqrt(1.0 - eps)).value;
  const double ds_rho_minus = divergences::ds_quantum(inst.rho, inst.sigma, eps - delta);
  const double ds_pin_eps = ds_pinched_classical(inst, eps);
  const double ds_pin_minus = ds_pinched_classical(inst, eps - delta);
  const auto ns = divergences::nussbaum_szkola(inst.rho, inst.sigma);
  const double ds_ns_eps = divergences::ds_classical(ns, eps);
  const double ds_ns_minus = divergences::ds_classical(ns, eps - delta);
  const double dh_eps = one_shot::dh(inst.rho, inst.sigma, eps).value;
  const double dh_minus = one_shot::dh(inst.rho, inst.sigma, eps - delta).value;

  std::vector<InequalityReport> out;
  out.push_back(make_report("b-4", ds_rho_minus + 2.0 * log2_of(delta) - 2.0 - log2_of(eps),
                            dmax, eps, delta, inst));
  out.push_back(make_report("b-3", dmax, ds_pin_eps + log2_of(nu) - log2_of(1.0 - eps), eps,
                            delta, inst));
  out.push_back(
      make_report("b-1", ds_pin_minus, ds_ns_eps - log2_of(delta), eps, delta, inst));
  out.push_back(make_report("b-2", ds_ns_minus + log2_of(delta) - log2_of(nu), ds_pin_eps, eps,
                            delta, inst));
  out.push_back(make_report("b-7b", dmax, dh_eps + log2_of(nu) - log2_of(1.0 - eps), eps, delta,
                            inst));
  out.push_back(make_report("b-8b",
                            dh_minus + 3.0 * log2_of(delta) - 3.0 * log2_of(3.0) - log2_of(eps),
                            dmax, eps, delta, inst));
  for (auto& r : out) r.spectral_factor = nu;
  return out;
}

std::vector<InequalityReport> verify_theta_relations(const Instance& inst, double eps,
                                                     double delta) {
  if (!(0.0 < delta && delta < std::min(eps, 1.0 - eps))) {
    throw std::invalid_argument("verify_theta_relations: need 0 < delta < min(eps, 1-eps)");
  }
  const double theta = states::spectral_stats(inst.sigma).theta;
  const auto ns = divergences::nussbaum_szkola(inst.rho, inst.sigma);
  const double ds_plus = divergences::ds_classical(ns, eps + delta);
  const double ds_minus = divergences::ds_classical(ns, eps - delta);
  const double dh = one_shot::dh(inst.rho, inst.sigma, eps).value;
  const double dmax = one_shot::dmax_smooth(inst.rho, inst.sigma, std::sqrt(1.0 - eps)).value;

  std::vector<InequalityReport> out;
  out.push_back(make_report(
      "b-5", dh,
      ds_plus + log2_of(std::exp2(8.0) * (eps + delta) * theta /
                        (std::pow(delta, 4.0) * (1.0 - eps - delta))),
      eps, delta, inst));
  out.push_back(
      make_report("b-6", ds_minus - log2_of(theta) + log2_of(delta), dh, eps, delta, inst));
  out.push_back(make_report("b-7", dmax,
                            ds_plus + log2_of(theta) - log2_of(delta * (1.0 - eps)), eps, delta,
                            inst));
  out.push_back(make_report(
      "b-8", ds_minus - log2_of(27.0 * eps * theta) + 3.0 * log2_of(delta), dmax, eps, delta,
      inst));
  for (auto& r : out) r.spectral_factor = theta;
  return out;
}

InequalityReport verify_pinching_dominance(const Instance& inst) {
  const double nu = states::spectral_stats(inst.sigma).nu;
  const auto pinched = states::pinching(inst.sigma, inst.rho);
  const auto es = linalg::eig_hermitian(nu * pinched.op - inst.rho.op);
  InequalityReport r;
  r.name = "pinching-dominance";
  r.lhs = -es.eigenvalues.minCoeff();
  r.rhs = 0.0;
  r.slack = es.eigenvalues.minCoeff();
  r.instance = inst.descriptor();
  r.pass = r.slack >= kSlackTol;
  return r;
}

std::vector<InequalityReport> verify_hh_props(const states::CqState& rho_x_ab, double eps) {
  const int nx = rho_x_ab.num_symbols();
  const int dab = rho_x_ab.dim_b;  // conditionals live on A (x) B
  if (dab != 4) throw std::invalid_argument("verify_hh_props: conditionals must be on qubit AB");
  const int da = 2, db = 2;
  int supp_x = 0;
  for (const auto& e : rho_x_ab.entries) {
    if (e.probability > 0.0) ++supp_x;
  }
  const Matrix full = rho_x_ab.full_operator();  // X (x) A (x) B
  auto rho_xab = states::make_density(full);
  auto rho_ab = states::make_density(states::partial_trace(full, {nx, da, db}, 0));
  auto rho_axb =
      states::make_density(states::permute_systems(full, {nx, da, db}, {1, 0, 2}));

  const double h_a_b = one_shot::hh_optimized(rho_ab, {da, db}, eps).value;
  const double h_a_xb = one_shot::hh_optimized(rho_axb, {da, nx * db}, eps).value;
  const double h_xa_b = one_shot::hh_optimized(rho_xab, {nx * da, db}, eps).value;
  const double logx = std::log2(static_cast<double>(supp_x));

  Instance pseudo;
  pseudo.kind = InstanceKind::cq;
  pseudo.dim = nx;
  pseudo.seed = 0;

  std::vector<InequalityReport> out;
  out.push_back(make_report("cq1a", h_a_xb, h_a_b, eps, 0.0, pseudo));
  out.push_back(make_report("cq1b", h_xa_b - logx, h_a_xb, eps, 0.0, pseudo));
  out.push_back(make_report("cq2a", h_a_xb, h_xa_b, eps, 0.0, pseudo));
  out.push_back(make_report("cq2b", h_xa_b, h_a_b + logx, eps, 0.0, pseudo));

  // data processing: dephasing A (a unital TP map) cannot lower the entropy
  Matrix dephased = Matrix::Zero(da * db, da * db);
  for (int a = 0; a < da; ++a) {
    Matrix pa = Matrix::Zero(da, da);
    pa(a, a) = 1.0;
    const Matrix proj = linalg::kron(pa, Matrix::Identity(db, db));
    dephased += proj * rho_ab.op * proj;
  }
  const double h_deph =
      one_shot::hh_optimized(states::make_density(dephased), {da, db}, eps).value;
  out.push_back(make_report("data-proc", h_a_b, h_deph, eps, 0.0, pseudo));
  return out;
}

Suite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_suite: cannot open " + path);
  Suite suite;
  try {
    nlohmann::json j;
    in >> j;
    suite.version = j.at("version").get<int>();
    for (const auto& e : j.at("instances")) {
      SuiteEntry entry;
      entry.dim = e.at("dim").get<int>();
      entry.kind = instance_kind_from_string(e.at("kind").get<std::string>());
      entry.seed = e.at("seed").get<std::uint64_t>();
      entry.eps = e.at("eps").get<double>();
      entry.delta = e.at("delta").get<double>();
      suite.entries.push_back(entry);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("load_suite: malformed suite file " + path + ": " + e.what());
  }
  return suite;
}

std::vector<InequalityReport> run_suite(const Suite& suite, int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("FBLQ_THREADS")) {
      threads = std::max(1, std::atoi(env));
    } else {
      threads = std::max(1u, std::thread::hardware_concurrency());
    }
  }
  const int n = static_cast<int>(suite.entries.size());
  std::vector<std::vector<InequalityReport>> slots(n);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      const SuiteEntry& e = suite.entries[i];
      const Instance inst = random_instance(e.dim, e.kind, e.seed);
      std::vector<InequalityReport> reports;
      auto append = [&reports](std::vector<InequalityReport> r) {
        for (auto& x : r) reports.push_back(std::move(x));
      };
      append(verify_spectrum_sandwich(inst, e.eps, e.delta));
      append(verify_nu_relations(inst, e.eps, e.delta));
      append(verify_theta_relations(inst, e.eps, e.delta));
      reports.push_back(verify_pinching_dominance(inst));
      slots[i] = std::move(reports);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  std::vector<InequalityReport> out;
  for (auto& s : slots) {
    for (auto& r : s) out.push_back(std::move(r));
  }
  return out;
}

void write_csv(std::ostream& os, const std::vector<InequalityReport>& reports) {
  os << "name,dims,seed,eps,delta,lhs,rhs,slack,pass\n";
  char buf[64];
  auto fmt = [&buf](double x) {
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::string(buf);
  };
  for (const auto& r : reports) {
    // instance descriptor is kind:dim:seed
    const auto first = r.instance.find(':');
    const auto second = r.instance.find(':', first + 1);
    const std::string dims = r.instance.substr(0, second);
    const std::string seed = r.instance.substr(second + 1);
    os << r.name << ',' << dims << ',' << seed << ',' << fmt(r.eps) << ',' << fmt(r.delta)
       << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ',' << fmt(r.slack) << ','
       << (r.pass ? "1" : "0") << '\n';
  }
}

}  // namespace fblq::hierarchy
