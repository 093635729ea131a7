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

#include "fblq/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fblq::scenario {

using nlohmann::json;

namespace {

json matrix_to_json(const linalg::Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

linalg::Matrix matrix_from_json(const json& rows, const std::string& field) {
  if (!rows.is_array() || rows.empty()) {
    throw parse_error("scenario: field '" + field + "' must be a matrix (list of rows)");
  }
  const int d = static_cast<int>(rows.size());
  linalg::Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    const json& row = rows.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != d) {
      throw parse_error("scenario: field '" + field + "' row " + std::to_string(i) +
                        " must carry " + std::to_string(d) + " complex [re, im] entries");
    }
    for (int j = 0; j < d; ++j) {
      const json& c = row.at(j);
      if (!c.is_array() || c.size() != 2) {
        throw parse_error("scenario: field '" + field + "' entry (" + std::to_string(i) + "," +
                          std::to_string(j) + ") must be an [re, im] pair");
      }
      m(i, j) = linalg::Complex(c.at(0).get<double>(), c.at(1).get<double>());
    }
  }
  return m;
}

Scenario from_json(const json& j) {
  Scenario s;
  if (j.contains("preset")) s.preset = j.at("preset").get<std::string>();
  if (j.contains("p")) s.p = j.at("p").get<double>();
  if (j.contains("epsilon")) s.epsilon = j.at("epsilon").get<double>();
  if (j.contains("eta")) s.eta = j.at("eta").get<double>();
  if (j.contains("n_min")) s.n_min = j.at("n_min").get<double>();
  if (j.contains("n_max")) s.n_max = j.at("n_max").get<double>();
  if (j.contains("n_points")) s.n_points = j.at("n_points").get<int>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("state")) {
    const json& st = j.at("state");
    std::vector<double> probs = st.at("probabilities").get<std::vector<double>>();
    std::vector<linalg::Matrix> conds;
    const json& cj = st.at("conditionals");
    for (size_t x = 0; x < cj.size(); ++x) {
      conds.push_back(matrix_from_json(cj.at(x), "state.conditionals[" + std::to_string(x) + "]"));
    }
    try {
      s.explicit_state = states::make_cq_state(probs, conds);
    } catch (const std::exception& e) {
      throw parse_error(std::string("scenario: invalid explicit state: ") + e.what());
    }
  }
  if (s.preset.empty() && !s.explicit_state.has_value()) {
    throw parse_error("scenario: need either 'preset' or a [state] table");
  }
  if (!s.preset.empty() && s.preset != "pauli-eavesdrop") {
    throw parse_error("scenario: unknown preset '" + s.preset + "'");
  }
  if (!(s.epsilon > 0.0 && s.epsilon < 1.0)) {
    throw parse_error("scenario: field 'epsilon' must lie in (0,1)");
  }
  return s;
}

}  // namespace

states::CqState Scenario::state() const {
  if (explicit_state.has_value()) return *explicit_state;
  Eigen::Vector2cd phi0, phi1;
  phi0 << std::sqrt(p), std::sqrt(1.0 - p);
  phi1 << std::sqrt(p), -std::sqrt(1.0 - p);
  return states::make_cq_state({0.5, 0.5}, {phi0 * phi0.adjoint(), phi1 * phi1.adjoint()});
}

Scenario parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw parse_error(std::string("scenario: JSON parse failure: ") + e.what());
  }
  return from_json(j);
}

Scenario parse_scenario_text(const std::string& text) {
  json root = json::object();
  json* current = &root;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto strip = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = v.find_last_not_of(" \t\r");
      return v.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw parse_error("scenario: line " + std::to_string(line_no) + ": unterminated table");
      }
      const std::string name = strip(line.substr(1, line.size() - 2));
      current = &root[name];
      if (current->is_null()) *current = json::object();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw parse_error("scenario: line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw parse_error("scenario: line " + std::to_string(line_no) + ": empty key or value");
    }
    try {
      (*current)[key] = json::parse(value);
    } catch (const json::exception&) {
      throw parse_error("scenario: line " + std::to_string(line_no) + ": field '" + key +
                        "' carries an unparseable value");
    }
  }
  return from_json(root);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("scenario: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    return parse_scenario_json(buf.str());
  }
  return parse_scenario_text(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream os;
  char buf[64];
  auto fmt = [&buf](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  if (!s.preset.empty()) {
    os << "preset = \"" << s.preset << "\"\n";
    os << "p = " << fmt(s.p) << "\n";
  }
  os << "epsilon = " << fmt(s.epsilon) << "\n";
  if (s.eta > 0.0) os << "eta = " << fmt(s.eta) << "\n";
  os << "n_min = " << fmt(s.n_min) << "\n";
  os << "n_max = " << fmt(s.n_max) << "\n";
  os << "n_points = " << s.n_points << "\n";
  os << "seed = " << s.seed << "\n";
  if (s.explicit_state.has_value()) {
    const auto& cq = *s.explicit_state;
    os << "\n[state]\n";
    json probs = json::array();
    for (const auto& e : cq.entries) probs.push_back(e.probability);
    os << "probabilities = " << probs.dump() << "\n";
    json conds = json::array();
    for (const auto& e : cq.entries) conds.push_back(matrix_to_json(e.conditional.op));
    os << "conditionals = " << conds.dump() << "\n";
  }
  return os.str();
}

}  // namespace fblq::scenario
