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

#pragma once

#include <optional>
#include <string>

#include "fblq/states.hpp"

namespace fblq::scenario {

// A task scenario: either the named Pauli-eavesdropping preset or an explicit
// CQ state, plus task parameters. The text encoding is line-oriented
// `key = value` with `[section]` tables and JSON-syntax values (complex
// entries as [re, im] pairs); a .json file carries the same schema.
struct Scenario {
  std::string preset;  // "pauli-eavesdrop" or empty for explicit states
  double p = 0.05;     // preset parameter
  std::optional<states::CqState> explicit_state;
  double epsilon = 1e-6;
  double eta = 0.0;  // 0 = pick epsilon/2 at use sites
  double n_min = 1e4;
  double n_max = 1e8;
  int n_points = 40;
  std::uint64_t seed = 1;

  states::CqState state() const;
  double eta_or_default() const { return eta > 0.0 ? eta : 0.5 * epsilon; }
};

class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dispatches on the file suffix: .json files are parsed as JSON, everything
// else as the text format.
Scenario load_scenario(const std::string& path);

Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_json(const std::string& text);

// Deterministic text serialization; load(serialize(s)) is the identity.
std::string serialize_scenario(const Scenario& s);

}  // namespace fblq::scenario
