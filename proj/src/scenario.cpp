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

#include "iks/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "iks/toml.hpp"

namespace iks {

namespace {

double get_number(const toml::Table& t, const std::string& key, double fallback) {
  auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (!it->second.is_number()) throw ValidationError("scenario: '" + key + "' must be a number");
  return it->second.as_number();
}

std::string get_string(const toml::Table& t, const std::string& key,
                       const std::string& fallback) {
  auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (!it->second.is_string()) throw ValidationError("scenario: '" + key + "' must be a string");
  return it->second.as_string();
}

bool get_bool(const toml::Table& t, const std::string& key, bool fallback) {
  auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (!it->second.is_bool()) throw ValidationError("scenario: '" + key + "' must be a bool");
  return it->second.as_bool();
}

std::vector<double> get_number_list(const toml::Table& t, const std::string& key,
                                    std::vector<double> fallback) {
  auto it = t.find(key);
  if (it == t.end()) return fallback;
  std::vector<double> out;
  if (it->second.is_number()) {
    out.push_back(it->second.as_number());
    return out;
  }
  for (const auto& v : it->second.as_array()) {
    if (!v.is_number()) throw ValidationError("scenario: '" + key + "' must hold numbers");
    out.push_back(v.as_number());
  }
  return out;
}

std::vector<int> to_ints(const std::vector<double>& xs) {
  std::vector<int> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(static_cast<int>(std::llround(x)));
  return out;
}

}  // namespace

void Scenario::validate() const {
  if (vd < 1 || static_cast<std::size_t>(vd) > kMaxDim)
    throw ValidationError("scenario: vd must be in [1, 1024]");
  if (batches.empty() || units.empty() || ks.empty())
    throw ValidationError("scenario: batch/units/k lists must be non-empty");
  for (int b : batches)
    if (b < 1 || b > device.nma.engines)
      throw ValidationError("scenario: batch out of range");
  for (int u : units)
    if (u < 1) throw ValidationError("scenario: units must be >= 1");
  for (int k : ks)
    if (k < 1 || k > device.nma.hw_k)
      throw ValidationError("scenario: K out of range");
  if (mode == Mode::Analytic && corpus_bytes.empty())
    throw ValidationError("scenario: analytic mode requires corpus_bytes");
  if (mode == Mode::Functional && !synthetic && !corpus_file)
    throw ValidationError("scenario: functional mode requires a corpus");
}

Scenario parse_scenario(const std::filesystem::path& path) {
  const toml::Table t = toml::parse_file(path.string());
  Scenario s;

  const std::string mode = get_string(t, "mode", "analytic");
  if (mode == "analytic") s.mode = Scenario::Mode::Analytic;
  else if (mode == "functional") s.mode = Scenario::Mode::Functional;
  else throw ValidationError("scenario: unknown mode '" + mode + "'");
  s.seed = static_cast<std::uint64_t>(get_number(t, "seed", 0));
  s.threads = static_cast<int>(get_number(t, "threads", 1));

  DeviceConfig& d = s.device;
  d.packages_per_unit = static_cast<int>(get_number(t, "device.packages_per_unit", d.packages_per_unit));
  d.package_capacity_bytes = static_cast<std::uint64_t>(
      get_number(t, "device.package_capacity_bytes", static_cast<double>(d.package_capacity_bytes)));
  d.package_bandwidth = get_number(t, "device.package_bandwidth", d.package_bandwidth);
  d.uplink_bandwidth = get_number(t, "device.uplink_bandwidth", d.uplink_bandwidth);
  d.nma.engines = static_cast<int>(get_number(t, "device.engines", d.nma.engines));
  d.nma.macs_per_engine = static_cast<int>(get_number(t, "device.macs_per_engine", d.nma.macs_per_engine));
  d.nma.bytes_per_cycle = 2 * d.nma.macs_per_engine;
  d.nma.clock_hz = get_number(t, "device.clock_hz", d.nma.clock_hz);
  d.nma.hw_k = static_cast<int>(get_number(t, "device.hw_k", d.nma.hw_k));
  d.serial_context_write = get_bool(t, "device.serial_context_write", d.serial_context_write);
  const std::string datapath = get_string(t, "device.datapath", "cache-coherent");
  if (datapath == "cache-coherent") d.datapath = Datapath::CacheCoherent;
  else if (datapath == "non-temporal-mmio") d.datapath = Datapath::NonTemporalMmio;
  else throw ValidationError("scenario: unknown datapath '" + datapath + "'");
  const std::string agg = get_string(t, "device.agg_mode", "calibrated");
  if (agg == "calibrated") d.agg_mode = AggMode::Calibrated;
  else if (agg == "measured") d.agg_mode = AggMode::Measured;
  else throw ValidationError("scenario: unknown agg_mode '" + agg + "'");
  d.calibrated_agg_ns = get_number(t, "device.calibrated_agg_us", d.calibrated_agg_ns / 1000.0) * 1000.0;

  s.area.logic_mm2 = get_number(t, "area.logic_mm2", s.area.logic_mm2);
  s.area.phy_mc_mm2 = get_number(t, "area.phy_mc_mm2", s.area.phy_mc_mm2);
  s.area.shoreline_mm = get_number(t, "area.shoreline_mm", s.area.shoreline_mm);

  s.vd = static_cast<int>(get_number(t, "workload.vd", s.vd));
  s.corpus_bytes = get_number_list(t, "workload.corpus_bytes", {});
  s.batches = to_ints(get_number_list(t, "workload.batch", {1}));
  s.units = to_ints(get_number_list(t, "workload.units", {1}));
  s.ks = to_ints(get_number_list(t, "workload.k", {32}));
  if (auto it = t.find("workload.synthetic.n"); it != t.end()) {
    SyntheticCorpus syn;
    syn.n = static_cast<std::uint64_t>(get_number(t, "workload.synthetic.n", 0));
    syn.seed = static_cast<std::uint64_t>(get_number(t, "workload.synthetic.seed",
                                                     static_cast<double>(s.seed)));
    s.synthetic = syn;
  }
  if (auto it = t.find("workload.corpus_file"); it != t.end())
    s.corpus_file = it->second.as_string();

  if (auto it = t.find("agg.table_us"); it != t.end()) {
    for (const auto& row : it->second.as_array()) {
      const auto& cells = row.as_array();
      if (cells.size() != 3)
        throw ValidationError("scenario: agg.table_us rows are [corpus_bytes, batch, agg_us]");
      s.agg_table.push_back({cells[0].as_number(),
                             static_cast<int>(std::llround(cells[1].as_number())),
                             cells[2].as_number() * 1000.0});
    }
  }

  // Baselines appear as [baselines.<name>] sections.
  for (const auto& [key, value] : t) {
    const std::string prefix = "baselines.";
    if (key.rfind(prefix, 0) != 0) continue;
    const std::string rest = key.substr(prefix.size());
    const auto dot = rest.find('.');
    if (dot == std::string::npos) continue;
    const std::string name = rest.substr(0, dot);
    if (std::any_of(s.baselines.begin(), s.baselines.end(),
                    [&](const BaselineSpec& b) { return b.name == name; }))
      continue;
    BaselineSpec b;
    b.name = name;
    b.machine.name = name;
    b.machine.mem_bandwidth = get_number(t, prefix + name + ".bandwidth", 0.0);
    b.machine.peak_flops = get_number(t, prefix + name + ".peak_flops", 1e30);
    b.efficiency = get_number(t, prefix + name + ".efficiency", 1.0);
    if (b.machine.mem_bandwidth <= 0.0)
      throw ValidationError("scenario: baseline '" + name + "' needs a bandwidth");
    s.baselines.push_back(std::move(b));
  }

  s.output_dir = get_string(t, "output.dir", ".");
  s.validate();
  return s;
}

Corpus synthesize_corpus(std::uint64_t n, int vd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  Corpus corpus;
  corpus.vectors.resize(vd, static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < corpus.vectors.cols(); ++i)
    for (Eigen::Index j = 0; j < vd; ++j)
      corpus.vectors(j, i) = half(dist(rng));
  return corpus;
}

HalfMatrix synthesize_queries(int batch, int vd, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  HalfMatrix queries(vd, batch);
  for (Eigen::Index q = 0; q < batch; ++q)
    for (Eigen::Index j = 0; j < vd; ++j) queries(j, q) = half(dist(rng));
  return queries;
}

namespace {

DeviceConfig config_for_row(const Scenario& s, double corpus_bytes, int batch) {
  DeviceConfig cfg = s.device;
  for (const auto& row : s.agg_table) {
    if (row.batch == batch &&
        std::abs(row.corpus_bytes - corpus_bytes) <= 1e-6 * row.corpus_bytes) {
      cfg.calibrated_agg_ns = row.agg_ns;
      break;
    }
  }
  return cfg;
}

RowResult analytic_row(const Scenario& s, double corpus_bytes, int batch,
                       int units, int k) {
  const DeviceConfig cfg = config_for_row(s, corpus_bytes, batch);
  RowResult row;
  row.corpus_bytes = corpus_bytes;
  row.batch = batch;
  row.units = units;
  row.k = k;
  row.latency = analytic_latency(corpus_bytes, batch, s.vd, units, cfg);
  const PowerReport p = power_model(batch, s.vd, corpus_bytes / units, cfg);
  row.power_w = units * p.total_w;
  row.energy_j = units * p.energy_per_search_j;
  return row;
}

std::string jsonl_name(int batch, int units, int k) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "results_b%d_u%d_k%d.jsonl", batch, units, k);
  return buf;
}

}  // namespace

ScenarioReport run_scenario(const Scenario& scenario, EventTrace* trace) {
  scenario.validate();
  ScenarioReport report;
  report.area = area_model(scenario.area);

  struct Point {
    double corpus_bytes;
    int batch, units, k;
  };
  std::vector<Point> points;
  if (scenario.mode == Scenario::Mode::Analytic) {
    for (double cb : scenario.corpus_bytes)
      for (int b : scenario.batches)
        for (int u : scenario.units)
          for (int k : scenario.ks) points.push_back({cb, b, u, k});
    report.rows.reserve(points.size());
    for (const auto& p : points)
      report.rows.push_back(analytic_row(scenario, p.corpus_bytes, p.batch, p.units, p.k));
  } else {
    Corpus corpus;
    if (scenario.synthetic) {
      corpus = synthesize_corpus(scenario.synthetic->n, scenario.vd,
                                 scenario.synthetic->seed);
    } else {
      BlockedShard shard = read_shard_file(*scenario.corpus_file);
      if (shard.dim != static_cast<std::uint32_t>(scenario.vd))
        throw ValidationError("scenario: corpus file VD does not match workload.vd");
      corpus.vectors = unpack_shard(shard);
    }

    for (int b : scenario.batches)
      for (int u : scenario.units)
        for (int k : scenario.ks) points.push_back({0.0, b, u, k});
    report.rows.resize(points.size());
    report.functional.resize(points.size());

    std::filesystem::create_directories(scenario.output_dir);
    std::vector<int> oracle_fail(points.size(), 0);

    auto run_point = [&](std::size_t idx) {
      const Point& p = points[idx];
      DeviceConfig cfg = config_for_row(scenario, 0.0, p.batch);
      HostRuntime runtime(corpus, p.units, cfg);
      double packed_bytes = 0.0;
      for (const auto& sh : runtime.shards())
        packed_bytes += static_cast<double>(sh.bytes.size());

      SearchRequest request;
      request.queries = synthesize_queries(p.batch, scenario.vd, scenario.seed);
      request.k = p.k;
      SearchResult result = runtime.iks_search(request);

      if (scenario.oracle_check) {
        const auto truth = oracle_enns(corpus, request.queries, p.k);
        for (std::size_t q = 0; q < truth.size(); ++q) {
          const auto& a = result.topk.per_query[q].entries;
          const auto& b = truth[q].entries;
          bool same = a.size() == b.size();
          for (std::size_t i = 0; same && i < a.size(); ++i)
            same = half_to_bits(a[i].score) == half_to_bits(b[i].score) &&
                   a[i].global_id == b[i].global_id;
          if (!same) oracle_fail[idx] = 1;
        }
      }

      RowResult row;
      row.corpus_bytes = packed_bytes;
      row.batch = p.batch;
      row.units = p.units;
      row.k = p.k;
      row.latency = result.latency;
      const PowerReport pw = power_model(p.batch, scenario.vd, packed_bytes / p.units, cfg);
      row.power_w = p.units * pw.total_w;
      row.energy_j = p.units * pw.energy_per_search_j;
      report.rows[idx] = row;
      report.functional[idx] = std::move(result.topk);
      if (trace && idx == 0)
        for (const auto& r : runtime.trace().records())
          trace->record(r.time_ns, r.actor, r.event, r.state);
    };

    const int threads = std::max(1, scenario.threads);
    if (threads == 1 || points.size() <= 1) {
      for (std::size_t i = 0; i < points.size(); ++i) run_point(i);
    } else {
      std::vector<std::thread> pool;
      std::atomic<std::size_t> next{0};
      for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
          for (std::size_t i = next.fetch_add(1); i < points.size();
               i = next.fetch_add(1))
            run_point(i);
        });
      for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < points.size(); ++i) {
      if (oracle_fail[i]) report.oracle_ok = false;
      std::ofstream os(scenario.output_dir /
                       jsonl_name(points[i].batch, points[i].units, points[i].k));
      emit_results_jsonl(os, report.functional[i], report.rows[i].latency);
    }
  }

  for (const auto& b : scenario.baselines)
    for (const auto& row : report.rows)
      report.baselines.push_back(
          {b.name, row.corpus_bytes, row.batch,
           baseline_time_s(b.machine, row.corpus_bytes, row.batch, b.efficiency)});

  return report;
}

namespace {

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_report_csv(std::ostream& os, const ScenarioReport& report) {
  os << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    os << fmt_g(r.corpus_bytes) << ',' << r.batch << ',' << r.units << ','
       << r.k << ',' << fmt_g(r.latency.write_ns / 1e3) << ','
       << fmt_g(r.latency.dot_ns / 1e6) << ',' << fmt_g(r.latency.read_ns / 1e3)
       << ',' << fmt_g(r.latency.agg_ns / 1e3) << ','
       << fmt_g(r.latency.total_ns() / 1e6) << ',' << fmt_g(r.power_w) << ','
       << fmt_g(r.energy_j) << '\n';
  }
}

void write_report_json(std::ostream& os, const ScenarioReport& report) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"corpus_bytes", r.corpus_bytes},
                         {"batch", r.batch},
                         {"units", r.units},
                         {"K", r.k},
                         {"write_ns", r.latency.write_ns},
                         {"dot_ns", r.latency.dot_ns},
                         {"read_ns", r.latency.read_ns},
                         {"agg_ns", r.latency.agg_ns},
                         {"total_ns", r.latency.total_ns()},
                         {"power_w", r.power_w},
                         {"energy_j", r.energy_j}});
  }
  j["area"] = {{"logic_mm2", report.area.logic_mm2},
               {"phy_mc_mm2", report.area.phy_mc_mm2},
               {"shoreline_mm", report.area.shoreline_mm},
               {"min_die_mm2", report.area.min_die_mm2},
               {"reported_mm2", report.area.reported_mm2}};
  j["baselines"] = nlohmann::json::array();
  for (const auto& b : report.baselines)
    j["baselines"].push_back({{"name", b.name},
                              {"corpus_bytes", b.corpus_bytes},
                              {"batch", b.batch},
                              {"time_s", b.time_s}});
  j["oracle_ok"] = report.oracle_ok;
  os << j.dump(2) << '\n';
}

ScenarioReport read_report_json(std::istream& is) {
  nlohmann::json j;
  is >> j;
  ScenarioReport report;
  for (const auto& r : j.at("rows")) {
    RowResult row;
    row.corpus_bytes = r.at("corpus_bytes").get<double>();
    row.batch = r.at("batch").get<int>();
    row.units = r.at("units").get<int>();
    row.k = r.at("K").get<int>();
    row.latency.write_ns = r.at("write_ns").get<double>();
    row.latency.dot_ns = r.at("dot_ns").get<double>();
    row.latency.read_ns = r.at("read_ns").get<double>();
    row.latency.agg_ns = r.at("agg_ns").get<double>();
    row.power_w = r.at("power_w").get<double>();
    row.energy_j = r.at("energy_j").get<double>();
    report.rows.push_back(row);
  }
  const auto& a = j.at("area");
  report.area.logic_mm2 = a.at("logic_mm2").get<double>();
  report.area.phy_mc_mm2 = a.at("phy_mc_mm2").get<double>();
  report.area.shoreline_mm = a.at("shoreline_mm").get<double>();
  report.area.min_die_mm2 = a.at("min_die_mm2").get<double>();
  report.area.reported_mm2 = a.at("reported_mm2").get<double>();
  for (const auto& b : j.at("baselines"))
    report.baselines.push_back({b.at("name").get<std::string>(),
                                b.at("corpus_bytes").get<double>(),
                                b.at("batch").get<int>(),
                                b.at("time_s").get<double>()});
  report.oracle_ok = j.at("oracle_ok").get<bool>();
  return report;
}

}  // namespace iks
