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

#include <string>
#include <vector>

#include "iks/device.hpp"
#include "iks/host.hpp"

namespace iks {

// Exhaustive maximum-inner-product search, the ground truth for every
// functional-equivalence test. Same arithmetic rule as the NMA datapath
// (binary32 accumulation in ascending dimension order, binary16 final
// round, ties by ascending id) but a fully independent implementation.
std::vector<QueryResult> oracle_enns(const Corpus& corpus,
                                     const HalfMatrix& queries, int k);

// Closed-form four-phase latency; the dot-product phase is
// corpus_bytes / (units * packages) / package_bandwidth.
LatencyBreakdown analytic_latency(double corpus_bytes, int batch, int vd,
                                  int units, const DeviceConfig& cfg);

struct EnergyConstants {
  double sram_j_per_bit = 39e-15;  // folded into engine_w, kept for sweeps
  double dram_j_per_bit = 4e-12;
  double engine_w = 59e-3;  // one engine incl. query scratchpad accesses
};

struct PowerReport {
  double engine_w = 0.0;
  double dram_w = 0.0;
  double total_w = 0.0;
  double energy_per_search_j = 0.0;
};

// Device power: constant DRAM streaming power plus one active engine per
// query in each NMA. Energy covers the dot-product phase only (the paper's
// accounting excludes CXL transfer energy).
PowerReport power_model(int batch, int vd, double corpus_bytes,
                        const DeviceConfig& cfg,
                        const EnergyConstants& energy = {});

struct AreaConfig {
  double logic_mm2 = 3.4;    // 64 engines, scratchpads, top-K units
  double phy_mc_mm2 = 14.0;  // PHYs and memory controllers
  double shoreline_mm = 21.0;  // 20 mm LPDDR5X PHY + 1 mm PCIe
};

struct AreaReport {
  double logic_mm2 = 0.0;
  double phy_mc_mm2 = 0.0;
  double shoreline_mm = 0.0;
  double min_die_mm2 = 0.0;   // (shoreline / 4)^2
  double reported_mm2 = 0.0;  // max(logic + phy, min die)
};

AreaReport area_model(const AreaConfig& cfg = {});

struct MachineModel {
  std::string name;
  double peak_flops = 0.0;
  double mem_bandwidth = 0.0;  // bytes/s
};

// Aggregate machine parameters of one IKS unit derived from the device
// config (8 x 136 GB/s, 8 x 64 x 68 x 2 GFLOP/s at defaults).
MachineModel iks_machine(const DeviceConfig& cfg);

enum class RooflineBound { Memory, Compute };

struct RooflinePoint {
  double arithmetic_intensity = 0.0;  // flop/byte, equals the batch size
  double attainable_flops = 0.0;
  RooflineBound bound = RooflineBound::Memory;
};

// ENNS arithmetic intensity is the batch size: each 2-byte element read
// feeds one MAC (2 flops) per active engine. An effective bandwidth below
// the machine peak models a CPU that cannot saturate its DRAM channels.
RooflinePoint roofline(const MachineModel& machine, int batch,
                       double effective_bandwidth = 0.0);

// Bandwidth/compute lower bound on scan time for what-if comparisons.
double baseline_time_s(const MachineModel& machine, double corpus_bytes,
                       int batch, double efficiency);

}  // namespace iks
