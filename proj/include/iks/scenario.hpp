// Copyright 2026 The IKS Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iks/analysis.hpp"

namespace iks {

struct SyntheticCorpus {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

struct BaselineSpec {
  std::string name;
  MachineModel machine;
  double efficiency = 1.0;
};

struct AggTableRow {
  double corpus_bytes = 0.0;
  int batch = 0;
  double agg_ns = 0.0;
};

struct Scenario {
  enum class Mode { Analytic, Functional } mode = Mode::Analytic;
  std::uint64_t seed = 0;
  int threads = 1;
  DeviceConfig device;
  AreaConfig area;

  int vd = 768;
  std::vector<double> corpus_bytes;  // analytic mode
  std::optional<SyntheticCorpus> synthetic;
  std::optional<std::filesystem::path> corpus_file;  // IKS1 shard fixture
  std::vector<int> batches{1};
  std::vector<int> units{1};
  std::vector<int> ks{32};

  // Per-(corpus, batch) calibrated aggregation constants (Table-style rows).
  std::vector<AggTableRow> agg_table;
  std::vector<BaselineSpec> baselines;

  std::filesystem::path output_dir = ".";
  bool oracle_check = false;

  void validate() const;
};

Scenario parse_scenario(const std::filesystem::path& path);

// Deterministic synthetic corpus: values uniform in [-1, 1], rounded to
// binary16, mt19937_64 streams keyed by seed.
Corpus synthesize_corpus(std::uint64_t n, int vd, std::uint64_t seed);
HalfMatrix synthesize_queries(int batch, int vd, std::uint64_t seed);

struct RowResult {
  double corpus_bytes = 0.0;
  int batch = 0;
  int units = 0;
  int k = 0;
  LatencyBreakdown latency;
  double power_w = 0.0;
  double energy_j = 0.0;
};

struct BaselineResult {
  std::string name;
  double corpus_bytes = 0.0;
  int batch = 0;
  double time_s = 0.0;
};

struct ScenarioReport {
  std::vector<RowResult> rows;
  std::vector<GlobalTopK> functional;  // aligned with rows in functional mode
  AreaReport area;
  std::vector<BaselineResult> baselines;
  bool oracle_ok = true;  // meaningful only when the oracle check ran
};

ScenarioReport run_scenario(const Scenario& scenario, EventTrace* trace = nullptr);

inline constexpr const char* kCsvHeader =
    "corpus_bytes,batch,units,K,write_us,dot_ms,read_us,agg_us,total_ms,"
    "power_w,energy_j";

void write_report_csv(std::ostream& os, const ScenarioReport& report);
void write_report_json(std::ostream& os, const ScenarioReport& report);
ScenarioReport read_report_json(std::istream& is);

}  // namespace iks
