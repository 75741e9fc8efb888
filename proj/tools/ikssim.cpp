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

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "iks/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitOracleMismatch = 2;
constexpr int kExitIo = 3;

int run_command(const std::string& scenario_path, const std::string& trace_path,
                std::optional<std::uint64_t> seed, std::optional<int> threads,
                bool oracle_check) {
  iks::Scenario scenario = iks::parse_scenario(scenario_path);
  if (seed) scenario.seed = *seed;
  if (threads) scenario.threads = *threads;
  scenario.oracle_check = oracle_check;

  iks::EventTrace trace;
  const iks::ScenarioReport report =
      iks::run_scenario(scenario, trace_path.empty() ? nullptr : &trace);

  std::filesystem::create_directories(scenario.output_dir);
  {
    std::ofstream csv(scenario.output_dir / "report.csv");
    if (!csv) throw std::runtime_error("cannot write report.csv");
    iks::write_report_csv(csv, report);
  }
  {
    std::ofstream js(scenario.output_dir / "report.json");
    if (!js) throw std::runtime_error("cannot write report.json");
    iks::write_report_json(js, report);
  }
  if (!trace_path.empty()) {
    std::ofstream ts(trace_path);
    if (!ts) throw std::runtime_error("cannot write trace file");
    trace.write(ts);
  }

  if (oracle_check) {
    std::cout << (report.oracle_ok ? "oracle-check: PASS" : "oracle-check: FAIL")
              << std::endl;
    if (!report.oracle_ok) return kExitOracleMismatch;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IKS near-memory ENNS simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string trace_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario_path, "Scenario file (TOML)")->required();
    cmd->add_option("--trace", trace_path, "Write event trace to this path");
    cmd->add_option("--seed", seed, "Override the scenario seed");
    cmd->add_option("--threads", threads, "Worker threads (speed only)");
  };

  CLI::App* run = app.add_subcommand("run", "Execute a scenario");
  add_common(run);
  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "Execute a functional scenario and verify against the oracle");
  add_common(oracle);

  CLI::App* report_cmd = app.add_subcommand("report", "Re-emit a report file");
  std::string report_path;
  std::string format = "csv";
  std::string out_path;
  report_cmd->add_option("report", report_path, "report.json from a previous run")
      ->required();
  report_cmd->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  report_cmd->add_option("-o,--out", out_path, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(scenario_path, trace_path, seed, threads, false);
    if (oracle->parsed()) return run_command(scenario_path, trace_path, seed, threads, true);

    std::ifstream is(report_path);
    if (!is) {
      std::cerr << "error: cannot open " << report_path << std::endl;
      return kExitIo;
    }
    const iks::ScenarioReport report = iks::read_report_json(is);
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) {
        std::cerr << "error: cannot write " << out_path << std::endl;
        return kExitIo;
      }
      os = &file;
    }
    if (format == "csv") iks::write_report_csv(*os, report);
    else iks::write_report_json(*os, report);
    return kExitOk;
  } catch (const iks::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << std::endl;
    return kExitValidation;
  } catch (const iks::CapacityError& e) {
    std::cerr << "validation error: " << e.what() << std::endl;
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitIo;
  }
}
