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

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "report.hpp"

namespace dynred {

// 17 significant digits; round-trips any double exactly.
std::string format_g17(double x);

// CSV text with header t,r,re_beta,im_beta[,r_mc,stderr_r].
std::string series_to_csv(const BlochSeries& series);

nlohmann::ordered_json report_to_json(const ExperimentReport& report);

// Writes <name>.report.json plus one CSV per series into out_dir (created if
// needed) and returns the written paths. Output is byte-reproducible: no
// timestamps or absolute paths appear in any file.
std::vector<std::filesystem::path> write_report(
    const ExperimentReport& report, const std::filesystem::path& out_dir);

}  // namespace dynred
