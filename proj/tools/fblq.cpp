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

#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fblq/blocklength.hpp"
#include "fblq/hierarchy.hpp"
#include "fblq/scenario.hpp"
#include "fblq/tasks.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerification = 3;

// All numeric output is rounded to 12 significant digits for byte-stable
// reports.
double sig12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::atof(buf);
}

json finite_or_string(double x) {
  if (std::isinf(x)) return x > 0 ? json("inf") : json("-inf");
  return json(sig12(x));
}

void emit(const std::string& payload, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open output file " + out_path);
  out << payload;
}

int cmd_entropy(const fblq::scenario::Scenario& sc, const std::string& out_path) {
  const auto cq = sc.state();
  auto rho = fblq::states::make_density(cq.full_operator());
  const std::vector<int> dims{cq.num_symbols(), cq.dim_b};
  const auto cond = fblq::divergences::conditional_moments(rho, dims);
  const auto stats = fblq::states::spectral_stats(cq.marginal_b().op);
  json j;
  j["D"] = finite_or_string(-cond.d);
  j["H_X_given_B"] = finite_or_string(cond.d);
  j["V"] = finite_or_string(cond.v);
  j["T"] = finite_or_string(cond.t);
  j["spectral_stats"] = {{"nu", stats.nu},
                         {"lambda", finite_or_string(stats.lambda)},
                         {"theta", stats.theta}};
  emit(j.dump(1), out_path);
  return kExitOk;
}

int cmd_oneshot(const fblq::scenario::Scenario& sc, const std::string& quantity, double eps,
                const std::string& out_path) {
  const auto cq = sc.state();
  auto rho = fblq::states::make_density(cq.full_operator());
  const std::vector<int> dims{cq.num_symbols(), cq.dim_b};
  const fblq::linalg::Matrix sigma = fblq::linalg::kron(
      fblq::linalg::Matrix::Identity(dims[0], dims[0]), cq.marginal_b().op);
  fblq::one_shot::OneShotResult res;
  if (quantity == "dh") {
    res = fblq::one_shot::dh(rho, sigma, eps);
  } else if (quantity == "dmax") {
    res = fblq::one_shot::dmax_smooth(rho, sigma, eps);
  } else if (quantity == "hmin") {
    res = fblq::one_shot::hmin_smooth(rho, dims, eps);
  } else if (quantity == "hh") {
    res = fblq::one_shot::hh_optimized(rho, dims, eps);
  } else {
    std::cerr << "unknown quantity '" << quantity << "'\n";
    return kExitUsage;
  }
  json j;
  j["quantity"] = quantity;
  j["epsilon"] = sig12(eps);
  j["value_bits"] = finite_or_string(res.value);
  j["certified_gap_bits"] = finite_or_string(res.gap);
  j["method"] = res.method == fblq::one_shot::Method::sdp ? "sdp" : "neyman-pearson";
  json witness;
  if (res.primal_q.size() > 0) {
    witness["Q_trace"] = sig12(res.primal_q.trace().real());
    witness["Q_dim"] = static_cast<int>(res.primal_q.rows());
  }
  if (res.rho_tilde.size() > 0) witness["rho_tilde_trace"] = sig12(res.rho_tilde.trace().real());
  if (res.sigma_b.size() > 0) witness["sigma_B_trace"] = sig12(res.sigma_b.trace().real());
  j["witness"] = witness;
  emit(j.dump(1), out_path);
  return kExitOk;
}

// --instance accepts kind:dim:seed[:eps[:delta]] and echoes the slacks of a
// single instance instead of running the whole suite.
int cmd_hierarchy(const std::string& suite_path, const std::string& instance_spec,
                  const std::string& out_path) {
  std::vector<fblq::hierarchy::InequalityReport> reports;
  if (!instance_spec.empty()) {
    std::vector<std::string> parts;
    std::stringstream ss(instance_spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 3) {
      std::cerr << "bad --instance format, expected kind:dim:seed[:eps[:delta]]\n";
      return kExitUsage;
    }
    fblq::hierarchy::SuiteEntry e;
    try {
      e.kind = fblq::hierarchy::instance_kind_from_string(parts[0]);
      e.dim = std::stoi(parts[1]);
      e.seed = std::stoull(parts[2]);
      if (parts.size() > 3) e.eps = std::stod(parts[3]);
      if (parts.size() > 4) e.delta = std::stod(parts[4]);
    } catch (const std::exception&) {
      std::cerr << "bad --instance field in '" << instance_spec << "'\n";
      return kExitUsage;
    }
    const auto inst = fblq::hierarchy::random_instance(e.dim, e.kind, e.seed);
    for (auto r : fblq::hierarchy::verify_spectrum_sandwich(inst, e.eps, e.delta)) {
      reports.push_back(std::move(r));
    }
    for (auto r : fblq::hierarchy::verify_nu_relations(inst, e.eps, e.delta)) {
      reports.push_back(std::move(r));
    }
    for (auto r : fblq::hierarchy::verify_theta_relations(inst, e.eps, e.delta)) {
      reports.push_back(std::move(r));
    }
    reports.push_back(fblq::hierarchy::verify_pinching_dominance(inst));
  } else {
    const auto suite = fblq::hierarchy::load_suite(suite_path);
    reports = fblq::hierarchy::run_suite(suite);
  }
  std::ostringstream os;
  fblq::hierarchy::write_csv(os, reports);
  emit(os.str(), out_path);
  int failures = 0;
  for (const auto& r : reports) failures += r.pass ? 0 : 1;
  if (failures > 0) {
    std::cerr << failures << " inequality report(s) failed\n";
    return kExitVerification;
  }
  return kExitOk;
}

int cmd_bounds(const fblq::scenario::Scenario& sc, const std::string& task, bool figure1,
               const std::string& out_path) {
  std::vector<double> n_list;
  if (sc.n_points > 0) {
    n_list = fblq::blocklength::log_spaced(sc.n_min, sc.n_max, sc.n_points);
  }
  if (figure1) {
    // out-of-range points are flagged and skipped, not fatal
    std::vector<double> kept;
    for (double n : n_list) {
      if (n < 1e3 || n > 1e8) {
        std::cerr << "bounds: n = " << n << " outside [1e3, 1e8], point skipped\n";
      } else {
        kept.push_back(n);
      }
    }
    n_list = std::move(kept);
  }
  fblq::blocklength::BoundCurve curve;
  if (n_list.empty()) {
    curve.eps = sc.epsilon;  // empty range: emit the bare CSV header
  } else if (figure1) {
    curve = fblq::blocklength::figure1_curves(sc.p, sc.epsilon, n_list);
  } else {
    const auto src = fblq::blocklength::make_source_model(sc.state());
    const auto which = task == "compression" ? fblq::blocklength::Task::compression
                                             : fblq::blocklength::Task::extraction;
    curve = fblq::blocklength::general_curves(src, which, sc.epsilon, n_list);
  }
  std::ostringstream os;
  fblq::blocklength::write_csv(os, curve);
  emit(os.str(), out_path);
  return kExitOk;
}

int cmd_simulate(const fblq::scenario::Scenario& sc, const std::string& task, double eps,
                 double eta, const std::string& out_path) {
  const auto cq = sc.state();
  auto rho = fblq::states::make_density(cq.full_operator());
  const std::vector<int> dims{cq.num_symbols(), cq.dim_b};
  json j;
  j["task"] = task;
  j["epsilon"] = sig12(eps);
  j["eta"] = sig12(eta);
  bool ok = false;
  if (task == "extraction") {
    const auto res = fblq::tasks::direct_extraction(cq, eps, eta);
    const double hmin_eps = fblq::one_shot::hmin_smooth(rho, dims, eps).value;
    j["prescribed_length_bits"] = res.length_bits;
    j["achieved_d_sec"] = sig12(res.d_sec);
    j["H_min_smoothed"] = sig12(res.hmin_smoothed);
    j["converse_bound_bits"] = sig12(hmin_eps);  // l^eps <= H_min^eps(X|B)
    ok = res.d_sec <= eps + 1e-9;
  } else if (task == "compression") {
    const auto res = fblq::tasks::direct_compression(cq, eps, eta);
    const double hh_eps =
        fblq::one_shot::hh_optimized(rho, dims, eps).value;  // H_h^eps <= m^eps
    j["prescribed_length_bits"] = res.length_bits;
    j["achieved_p_err"] = sig12(res.p_err);
    j["H_h_smoothed"] = sig12(res.hh_smoothed);
    j["direct_bound_bits"] =
        sig12(res.hh_smoothed + std::log2(eps / (eta * eta)) + 3.0);
    j["converse_bound_bits"] = sig12(hh_eps);
    ok = res.p_err <= eps + 1e-9;
  } else {
    std::cerr << "unknown task '" << task << "'\n";
    return kExitUsage;
  }
  j["meets_bound"] = ok;
  emit(j.dump(1), out_path);
  return ok ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fblq: one-shot entropies and finite-blocklength bounds for CQ sources"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, suite_path = "data/hierarchy_suite.json";
  std::string quantity = "dh", task = "extraction";
  double eps_override = -1.0, eta_override = -1.0;
  double n_min_override = -1.0, n_max_override = -1.0;
  int n_points_override = INT_MIN;
  std::uint64_t seed_override = 0;
  bool figure1 = false;

  auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
    if (needs_scenario) {
      cmd->add_option("--scenario", scenario_path, "scenario file (text or .json)")
          ->required();
    }
    cmd->add_option("--out", out_path, "write the report here instead of stdout");
    cmd->add_option("--epsilon", eps_override, "override the scenario error parameter");
    cmd->add_option("--seed", seed_override, "override the scenario seed");
  };

  CLI::App* entropy = app.add_subcommand("entropy", "moments and spectral statistics");
  add_common(entropy, true);

  CLI::App* oneshot = app.add_subcommand("oneshot", "one-shot entropy with certificate");
  add_common(oneshot, true);
  oneshot->add_option("--quantity", quantity, "dh | dmax | hmin | hh");

  CLI::App* hier = app.add_subcommand("hierarchy", "run the inequality suite");
  std::string instance_spec;
  hier->add_option("--suite", suite_path, "suite definition (JSON)");
  hier->add_option("--instance", instance_spec,
                   "single instance kind:dim:seed[:eps[:delta]] instead of the suite");
  hier->add_option("--out", out_path, "CSV output path");

  CLI::App* bounds = app.add_subcommand("bounds", "finite-blocklength bound curves");
  add_common(bounds, true);
  bounds->add_option("--task", task, "extraction | compression");
  bounds->add_flag("--figure1", figure1,
                   "exact-binomial pipeline for the preset source");
  bounds->add_option("--n-min", n_min_override, "smallest blocklength");
  bounds->add_option("--n-max", n_max_override, "largest blocklength");
  bounds->add_option("--n-points", n_points_override, "log-spaced point count");

  CLI::App* simulate = app.add_subcommand("simulate", "build and verify a direct protocol");
  add_common(simulate, true);
  simulate->add_option("--task", task, "extraction | compression");
  simulate->add_option("--eta", eta_override, "smoothing split parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    fblq::scenario::Scenario sc;
    if (!scenario_path.empty()) {
      sc = fblq::scenario::load_scenario(scenario_path);
      if (eps_override > 0.0) sc.epsilon = eps_override;
      if (eta_override > 0.0) sc.eta = eta_override;
      if (n_min_override > 0.0) sc.n_min = n_min_override;
      if (n_max_override > 0.0) sc.n_max = n_max_override;
      if (n_points_override != INT_MIN) sc.n_points = n_points_override;
      if (seed_override > 0) sc.seed = seed_override;
    }
    if (entropy->parsed()) return cmd_entropy(sc, out_path);
    if (oneshot->parsed()) return cmd_oneshot(sc, quantity, sc.epsilon, out_path);
    if (hier->parsed()) return cmd_hierarchy(suite_path, instance_spec, out_path);
    if (bounds->parsed()) return cmd_bounds(sc, task, figure1, out_path);
    if (simulate->parsed()) return cmd_simulate(sc, task, sc.epsilon, sc.eta_or_default(), out_path);
  } catch (const fblq::scenario::parse_error& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const fblq::one_shot::method_disagreement& e) {
    std::cerr << e.what() << '\n';
    return kExitVerification;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
