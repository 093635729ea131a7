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

#include "fblq/scenario.hpp"

using namespace fblq;
using linalg::Matrix;

namespace {

const char* kPresetText = R"(
# Pauli eavesdropping
preset = "pauli-eavesdrop"
p = 0.05
epsilon = 1e-6
n_min = 1e4
n_max = 1e8
n_points = 40
seed = 7
)";

const char* kExplicitText = R"(
epsilon = 0.25
eta = 0.1

[state]
probabilities = [0.5, 0.5]
conditionals = [ [[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]] ]
)";

}  // namespace

TEST_CASE("preset scenario parses and builds the Pauli state") {
  auto sc = scenario::parse_scenario_text(kPresetText);
  CHECK(sc.preset == "pauli-eavesdrop");
  CHECK(sc.p == doctest::Approx(0.05));
  CHECK(sc.epsilon == doctest::Approx(1e-6));
  CHECK(sc.n_points == 40);
  CHECK(sc.seed == 7);
  auto cq = sc.state();
  CHECK(cq.num_symbols() == 2);
  CHECK(cq.dim_b == 2);
  CHECK(cq.marginal_b().op(0, 0).real() == doctest::Approx(0.05));
}

TEST_CASE("explicit state scenario") {
  auto sc = scenario::parse_scenario_text(kExplicitText);
  CHECK(sc.preset.empty());
  REQUIRE(sc.explicit_state.has_value());
  auto cq = sc.state();
  CHECK(cq.num_symbols() == 2);
  CHECK(cq.entries[0].conditional.op(0, 0).real() == doctest::Approx(1.0));
  CHECK(cq.entries[1].conditional.op(1, 1).real() == doctest::Approx(1.0));
  CHECK(sc.eta_or_default() == doctest::Approx(0.1));
}

TEST_CASE("round trip: load, serialize, load is the identity") {
  for (const char* text : {kPresetText, kExplicitText}) {
    auto sc = scenario::parse_scenario_text(text);
    const std::string serialized = scenario::serialize_scenario(sc);
    auto sc2 = scenario::parse_scenario_text(serialized);
    CHECK(sc.preset == sc2.preset);
    CHECK(sc.p == sc2.p);
    CHECK(sc.epsilon == sc2.epsilon);
    CHECK(sc.eta == sc2.eta);
    CHECK(sc.n_min == sc2.n_min);
    CHECK(sc.n_points == sc2.n_points);
    CHECK(sc.seed == sc2.seed);
    CHECK(sc.explicit_state.has_value() == sc2.explicit_state.has_value());
    if (sc.explicit_state) {
      CHECK((sc.state().full_operator() - sc2.state().full_operator()).norm() < 1e-15);
    }
    // serialization is stable
    CHECK(serialized == scenario::serialize_scenario(sc2));
  }
}

TEST_CASE("JSON encoding of the same schema") {
  const char* text = R"({
    "preset": "pauli-eavesdrop", "p": 0.1, "epsilon": 0.001,
    "n_min": 1000, "n_max": 100000, "n_points": 3, "seed": 2
  })";
  auto sc = scenario::parse_scenario_json(text);
  CHECK(sc.p == doctest::Approx(0.1));
  CHECK(sc.state().marginal_b().op(0, 0).real() == doctest::Approx(0.1));
}

TEST_CASE("malformed scenarios carry line and field diagnostics") {
  CHECK_THROWS_WITH_AS(scenario::parse_scenario_text("epsilon 0.1\n"),
                       doctest::Contains("line 1"), scenario::parse_error);
  CHECK_THROWS_WITH_AS(scenario::parse_scenario_text("epsilon = oops\n"),
                       doctest::Contains("field 'epsilon'"), scenario::parse_error);
  CHECK_THROWS_WITH_AS(scenario::parse_scenario_text("epsilon = 0.5\n"),
                       doctest::Contains("preset"), scenario::parse_error);
  CHECK_THROWS_AS(scenario::parse_scenario_text("preset = \"unknown\"\nepsilon = 0.5\n"),
                  scenario::parse_error);
  // a state violating the density-operator invariants is rejected
  const char* bad_state = R"(
epsilon = 0.25
[state]
probabilities = [0.5, 0.5]
conditionals = [ [[[2,0],[0,0]],[[0,0],[0,0]]], [[[1,0],[0,0]],[[0,0],[0,0]]] ]
)";
  CHECK_THROWS_WITH_AS(scenario::parse_scenario_text(bad_state),
                       doctest::Contains("invalid explicit state"), scenario::parse_error);
}
