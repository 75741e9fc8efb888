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

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "iks/nma.hpp"

namespace iks {

// Affine transfer model: duration_ns = alpha_ns + bytes / bytes_per_ns.
struct TransferCoeffs {
  double alpha_ns = 0.0;
  double bytes_per_ns = 1.0;

  double time_ns(double bytes) const { return alpha_ns + bytes / bytes_per_ns; }
};

// Two observed (bytes, duration) points; the affine coefficients fall out.
struct TransferCalibration {
  double bytes_lo, ns_lo;
  double bytes_hi, ns_hi;

  TransferCoeffs fit() const {
    TransferCoeffs c;
    c.bytes_per_ns = (bytes_hi - bytes_lo) / (ns_hi - ns_lo);
    c.alpha_ns = ns_lo - bytes_lo / c.bytes_per_ns;
    return c;
  }
};

enum class Datapath { CacheCoherent, NonTemporalMmio };
enum class Direction { HostToDevice, DeviceToHost };
enum class AggMode { Measured, Calibrated };

struct DeviceConfig {
  int packages_per_unit = 8;
  std::uint64_t package_capacity_bytes = 64'000'000'000ull;  // 512 Gb LPDDR5X
  double package_bandwidth = 136e9;                          // bytes/s
  double uplink_bandwidth = 8e9;                             // bytes/s per NMA
  NmaConfig nma;
  Datapath datapath = Datapath::CacheCoherent;
  // Cache-coherent context writes carry 1.6x the throughput of the
  // non-temporal MMIO path; the non-temporal beta is derived, not refit.
  double coherent_write_speedup = 1.6;
  bool serial_context_write = false;  // broadcast by default

  // Measured endpoints for query-write and partial-read transfers
  // (bytes for B=1 and B=64 at VD=768, 8 packages, 6-byte entries).
  TransferCalibration write_cal{1536.0, 300.0, 98304.0, 1000.0};
  TransferCalibration read_cal{1536.0, 700.0, 98304.0, 22400.0};

  AggMode agg_mode = AggMode::Calibrated;
  double calibrated_agg_ns = 19000.0;

  TransferCoeffs write_coeffs() const {
    TransferCoeffs c = write_cal.fit();
    if (datapath == Datapath::NonTemporalMmio) c.bytes_per_ns /= coherent_write_speedup;
    return c;
  }
  TransferCoeffs read_coeffs() const { return read_cal.fit(); }
};

double transfer_time_ns(double bytes, Direction dir, const DeviceConfig& cfg);

// Memory-expander mode: interleaved read over all per-NMA uplinks.
double expander_read_time_ns(double bytes, const DeviceConfig& cfg);

// ---- Doorbell protocol -----------------------------------------------------

enum class DoorbellState {
  Idle,
  ContextWritten,
  DoorbellRung,
  NmaBusy,
  ResultsWritten,
  HostNotified,
};

enum class DoorbellEvent {
  WriteContext,   // host writes the offload context
  Ring,           // host writes the doorbell register
  DeviceObserve,  // NMAs observe the doorbell and start
  NmaComplete,    // all NMAs wrote their partial lists
  NotifyHost,     // device-side doorbell write
  HostAck,        // host consumed results, register returns to idle
};

const char* to_string(DoorbellState s);
const char* to_string(DoorbellEvent e);

// Returns the successor state, or nullopt if the event is illegal in `s`.
std::optional<DoorbellState> doorbell_next(DoorbellState s, DoorbellEvent e);

struct TraceRecord {
  double time_ns = 0.0;
  std::string actor;
  std::string event;
  std::string state;
};

class EventTrace {
 public:
  void record(double time_ns, std::string actor, std::string event, std::string state) {
    records_.push_back({time_ns, std::move(actor), std::move(event), std::move(state)});
  }
  const std::vector<TraceRecord>& records() const { return records_; }
  // One line per record: time_ns<TAB>actor<TAB>event<TAB>state
  void write(std::ostream& os) const;

 private:
  std::vector<TraceRecord> records_;
};

class DoorbellFsm {
 public:
  DoorbellState state() const { return state_; }
  // Advances the FSM; throws ProtocolError on an illegal event.
  void step(DoorbellEvent e, double time_ns, const std::string& actor,
            EventTrace* trace = nullptr);

 private:
  DoorbellState state_ = DoorbellState::Idle;
};

// ---- Offload ---------------------------------------------------------------

struct PackageDescriptor {
  std::uint64_t base_address = 0;
  std::uint64_t n_vectors = 0;
};

// Host-written descriptor: query batch, VD, per-package base and count.
struct OffloadContext {
  HalfMatrix queries;  // VD x B
  std::uint32_t dim = 0;
  std::vector<PackageDescriptor> packages;

  std::size_t byte_size() const {
    return static_cast<std::size_t>(queries.size()) * 2 +
           packages.size() * sizeof(PackageDescriptor) + sizeof(dim);
  }
};

struct DeviceOffloadResult {
  std::vector<NmaOffloadResult> per_package;
  double dot_ns = 0.0;  // max over packages
  std::uint64_t dram_bytes_read = 0;
};

// Runs the NMAs of one unit in parallel (max-combined time). The doorbell
// FSM must be in DoorbellRung; it is advanced to ResultsWritten.
DeviceOffloadResult execute_offload(std::span<const BlockedShard> shards,
                                    const OffloadContext& ctx,
                                    const DeviceConfig& cfg, DoorbellFsm& fsm,
                                    double start_ns, EventTrace* trace = nullptr);

// ---- Multi-tenancy ---------------------------------------------------------

struct TenantRequest {
  std::string tenant;
  std::set<int> packages;
  double search_ns = 0.0;
};

struct TenantCompletion {
  std::string tenant;
  double start_ns = 0.0;
  double finish_ns = 0.0;
};

struct TenantPlan {
  std::map<std::string, std::set<int>> assignments;
  std::vector<TenantCompletion> completions;  // in request order
};

// Spatial tenants (disjoint package sets) run concurrently; tenants sharing
// a package set are serialized FIFO at whole-search boundaries. Partially
// overlapping claims are a placement conflict.
TenantPlan schedule_tenants(std::span<const TenantRequest> requests,
                            const DeviceConfig& cfg, EventTrace* trace = nullptr);

}  // namespace iks
