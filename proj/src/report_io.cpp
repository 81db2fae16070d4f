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

#include "report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dynred {

constexpr int kSchemaVersion = 1;

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string series_to_csv(const BlochSeries& series) {
  const BlochRecord<double>& rec = series.record;
  const bool mc = !series.r_mc.empty();
  if (mc && (series.r_mc.size() != rec.times.size() ||
             series.stderr_r.size() != rec.times.size())) {
    throw Error("series_to_csv: Monte-Carlo column length mismatch");
  }
  std::ostringstream os;
  os << "t,r,re_beta,im_beta";
  if (mc) os << ",r_mc,stderr_r";
  os << "\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    os << format_g17(rec.times[i]) << ',' << format_g17(rec.r[i]) << ','
       << format_g17(rec.re_beta[i]) << ',' << format_g17(rec.im_beta[i]);
    if (mc) {
      os << ',' << format_g17(series.r_mc[i]) << ','
         << format_g17(series.stderr_r[i]);
    }
    os << "\n";
  }
  return os.str();
}

static std::string series_file_name(const ExperimentReport& report,
                                    const BlochSeries& series) {
  return report.name + "." + series.name + ".csv";
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = report.name;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.parameters) params[key] = value;
  j["parameters"] = params;

  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  for (const auto& r : report.results) {
    nlohmann::ordered_json item;
    item["label"] = r.label;
    item["value"] = r.value;
    if (r.uncertainty) item["uncertainty"] = *r.uncertainty;
    if (r.tolerance) item["tolerance"] = *r.tolerance;
    item["oracle"] = r.oracle;
    results.push_back(item);
  }
  j["results"] = results;

  nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
  for (const auto& v : report.verdicts) {
    nlohmann::ordered_json item;
    item["name"] = v.name;
    item["passed"] = v.passed;
    item["detail"] = v.detail;
    verdicts.push_back(item);
  }
  j["verdicts"] = verdicts;

  nlohmann::ordered_json series = nlohmann::ordered_json::array();
  for (const auto& s : report.series) {
    nlohmann::ordered_json item;
    item["name"] = s.name;
    item["file"] = series_file_name(report, s);
    series.push_back(item);
  }
  j["series"] = series;
  j["passed"] = report.passed();
  return j;
}

static void write_text(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("write_report: cannot open " + path.string());
  out << text;
  if (!out) throw Error("write_report: write failed for " + path.string());
}

std::vector<std::filesystem::path> write_report(
    const ExperimentReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  for (const auto& s : report.series) {
    std::filesystem::path p = out_dir / series_file_name(report, s);
    write_text(p, series_to_csv(s));
    written.push_back(p);
  }
  std::filesystem::path jp = out_dir / (report.name + ".report.json");
  write_text(jp, report_to_json(report).dump(2) + "\n");
  written.push_back(jp);
  return written;
}

}  // namespace dynred
