// Copyright 2026 The dynred authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynred/semigroup.hpp"

namespace dynred {

// A single reported number, optionally with a Monte-Carlo uncertainty and
// the tolerance it was checked against. `oracle` names the reference that
// produced or validated it: "ode", "analytic", "monte-carlo" or "exact".
struct ScalarResult {
  std::string label;
  double value = 0;
  std::optional<double> uncertainty;
  std::optional<double> tolerance;
  std::string oracle;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

// A named time series; r_mc/stderr_r are filled only for trajectory runs.
struct BlochSeries {
  std::string name;
  BlochRecord<double> record;
  std::vector<double> r_mc;
  std::vector<double> stderr_r;
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<ScalarResult> results;
  std::vector<Check> verdicts;
  std::vector<BlochSeries> series;

  bool passed() const {
    for (const auto& v : verdicts) {
      if (!v.passed) return false;
    }
    return true;
  }
};

}  // namespace dynred
