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

#include "iks/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace iks {

std::vector<QueryResult> oracle_enns(const Corpus& corpus,
                                     const HalfMatrix& queries, int k) {
  if (k < 1) throw ValidationError("oracle_enns: k must be >= 1");
  const auto n = corpus.size();
  const auto vd = corpus.dim();
  if (queries.rows() != vd && n > 0)
    throw ValidationError("oracle_enns: query dimension mismatch");

  std::vector<QueryResult> out(static_cast<std::size_t>(queries.cols()));
  std::vector<float> qf(static_cast<std::size_t>(vd));
  for (Eigen::Index q = 0; q < queries.cols(); ++q) {
    for (Eigen::Index j = 0; j < vd; ++j)
      qf[static_cast<std::size_t>(j)] = static_cast<float>(queries(j, q));

    std::vector<GlobalEntry> scored(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      float acc = 0.0f;
      for (Eigen::Index j = 0; j < vd; ++j)
        acc += qf[static_cast<std::size_t>(j)] * static_cast<float>(corpus.vectors(j, i));
      scored[static_cast<std::size_t>(i)] = {half(acc), static_cast<std::uint64_t>(i)};
    }
    std::sort(scored.begin(), scored.end(), global_entry_better);
    if (scored.size() > static_cast<std::size_t>(k))
      scored.resize(static_cast<std::size_t>(k));
    out[static_cast<std::size_t>(q)].short_result =
        scored.size() < static_cast<std::size_t>(k);
    out[static_cast<std::size_t>(q)].entries = std::move(scored);
  }
  return out;
}

namespace {

// Wall-clock cost of reducing synthetic partial lists of the shape the
// device would produce, for analytic runs in measured-aggregation mode.
double measure_aggregation_ns(int batch, int lists, int hw_k) {
  std::mt19937_64 rng(0x1e5u);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<PartialTopK> partials(static_cast<std::size_t>(lists),
                                    PartialTopK(hw_k));
  for (auto& p : partials)
    for (int i = 0; i < hw_k; ++i)
      p.insert({half(dist(rng)), static_cast<std::uint32_t>(i)});
  std::vector<OffsetPartial> view;
  view.reserve(partials.size());
  for (std::size_t s = 0; s < partials.size(); ++s)
    view.push_back({&partials[s], s * 1000});

  const auto start = std::chrono::steady_clock::now();
  for (int q = 0; q < batch; ++q) {
    volatile std::size_t sink = aggregate_topk(view, hw_k).entries.size();
    (void)sink;
  }
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::nano>(end - start).count();
}

}  // namespace

LatencyBreakdown analytic_latency(double corpus_bytes, int batch, int vd,
                                  int units, const DeviceConfig& cfg) {
  if (units < 1) throw ValidationError("analytic_latency: units must be >= 1");
  if (batch < 1 || batch > cfg.nma.engines)
    throw ValidationError("analytic_latency: batch out of range");
  const double packages = static_cast<double>(units) * cfg.packages_per_unit;
  if (corpus_bytes > packages * static_cast<double>(cfg.package_capacity_bytes))
    throw CapacityError("analytic_latency: corpus exceeds device capacity");

  LatencyBreakdown lb;
  lb.write_ns = transfer_time_ns(static_cast<double>(batch) * 2.0 * vd,
                                 Direction::HostToDevice, cfg);
  lb.dot_ns = corpus_bytes / packages / cfg.package_bandwidth * 1e9;
  lb.read_ns = transfer_time_ns(packages * batch * cfg.nma.hw_k * 6.0,
                                Direction::DeviceToHost, cfg);
  lb.agg_ns = cfg.agg_mode == AggMode::Calibrated
                  ? cfg.calibrated_agg_ns
                  : measure_aggregation_ns(batch, static_cast<int>(packages),
                                           cfg.nma.hw_k);
  return lb;
}

PowerReport power_model(int batch, int vd, double corpus_bytes,
                        const DeviceConfig& cfg, const EnergyConstants& energy) {
  if (batch < 1 || batch > cfg.nma.engines)
    throw ValidationError("power_model: batch out of range");
  (void)vd;  // the 59 mW engine figure already includes scratchpad access

  PowerReport report;
  report.dram_w = cfg.packages_per_unit * cfg.package_bandwidth * 8.0 *
                  energy.dram_j_per_bit;
  report.engine_w = cfg.packages_per_unit * batch * energy.engine_w;
  report.total_w = report.engine_w + report.dram_w;
  const double dot_s =
      corpus_bytes / (cfg.packages_per_unit * cfg.package_bandwidth);
  report.energy_per_search_j = report.total_w * dot_s;
  return report;
}

AreaReport area_model(const AreaConfig& cfg) {
  AreaReport report;
  report.logic_mm2 = cfg.logic_mm2;
  report.phy_mc_mm2 = cfg.phy_mc_mm2;
  report.shoreline_mm = cfg.shoreline_mm;
  report.min_die_mm2 = (cfg.shoreline_mm / 4.0) * (cfg.shoreline_mm / 4.0);
  report.reported_mm2 = std::max(cfg.logic_mm2 + cfg.phy_mc_mm2, report.min_die_mm2);
  return report;
}

MachineModel iks_machine(const DeviceConfig& cfg) {
  MachineModel m;
  m.name = "IKS";
  m.mem_bandwidth = cfg.packages_per_unit * cfg.package_bandwidth;
  m.peak_flops = cfg.packages_per_unit * static_cast<double>(cfg.nma.engines) *
                 cfg.nma.macs_per_engine * 2.0 * cfg.nma.clock_hz;
  return m;
}

RooflinePoint roofline(const MachineModel& machine, int batch,
                       double effective_bandwidth) {
  if (batch < 1) throw ValidationError("roofline: batch must be >= 1");
  const double bw =
      effective_bandwidth > 0.0 ? effective_bandwidth : machine.mem_bandwidth;
  RooflinePoint p;
  p.arithmetic_intensity = static_cast<double>(batch);
  const double memory_roof = p.arithmetic_intensity * bw;
  p.attainable_flops = std::min(machine.peak_flops, memory_roof);
  p.bound = memory_roof < machine.peak_flops ? RooflineBound::Memory
                                             : RooflineBound::Compute;
  return p;
}

double baseline_time_s(const MachineModel& machine, double corpus_bytes,
                       int batch, double efficiency) {
  if (efficiency <= 0.0 || efficiency > 1.0)
    throw ValidationError("baseline_time: efficiency must be in (0, 1]");
  const double mem_s = corpus_bytes / (efficiency * machine.mem_bandwidth);
  const double flops = corpus_bytes * static_cast<double>(batch);
  const double compute_s = flops / (efficiency * machine.peak_flops);
  return std::max(mem_s, compute_s);
}

}  // namespace iks
