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

#include "iks/device.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>

namespace iks {

namespace {

// Stable text form for trace timestamps: fixed 3 decimal places.
std::string format_ns(double t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", t);
  return buf;
}

}  // namespace

double transfer_time_ns(double bytes, Direction dir, const DeviceConfig& cfg) {
  if (bytes < 0) throw ValidationError("transfer_time: negative byte count");
  const TransferCoeffs c =
      dir == Direction::HostToDevice ? cfg.write_coeffs() : cfg.read_coeffs();
  return c.time_ns(bytes);
}

double expander_read_time_ns(double bytes, const DeviceConfig& cfg) {
  if (bytes < 0) throw ValidationError("expander_read_time: negative byte count");
  const double aggregate_bw_ns =
      cfg.packages_per_unit * cfg.uplink_bandwidth / 1e9;  // bytes per ns
  return bytes / aggregate_bw_ns + cfg.read_coeffs().alpha_ns;
}

const char* to_string(DoorbellState s) {
  switch (s) {
    case DoorbellState::Idle: return "Idle";
    case DoorbellState::ContextWritten: return "ContextWritten";
    case DoorbellState::DoorbellRung: return "DoorbellRung";
    case DoorbellState::NmaBusy: return "NmaBusy";
    case DoorbellState::ResultsWritten: return "ResultsWritten";
    case DoorbellState::HostNotified: return "HostNotified";
  }
  return "?";
}

const char* to_string(DoorbellEvent e) {
  switch (e) {
    case DoorbellEvent::WriteContext: return "write_context";
    case DoorbellEvent::Ring: return "ring";
    case DoorbellEvent::DeviceObserve: return "device_observe";
    case DoorbellEvent::NmaComplete: return "nma_complete";
    case DoorbellEvent::NotifyHost: return "notify_host";
    case DoorbellEvent::HostAck: return "host_ack";
  }
  return "?";
}

std::optional<DoorbellState> doorbell_next(DoorbellState s, DoorbellEvent e) {
  using S = DoorbellState;
  using E = DoorbellEvent;
  switch (s) {
    case S::Idle:
      if (e == E::WriteContext) return S::ContextWritten;
      break;
    case S::ContextWritten:
      if (e == E::Ring) return S::DoorbellRung;
      break;
    case S::DoorbellRung:
      if (e == E::DeviceObserve) return S::NmaBusy;
      break;
    case S::NmaBusy:
      if (e == E::NmaComplete) return S::ResultsWritten;
      break;
    case S::ResultsWritten:
      if (e == E::NotifyHost) return S::HostNotified;
      break;
    case S::HostNotified:
      if (e == E::HostAck) return S::Idle;
      break;
  }
  return std::nullopt;
}

void EventTrace::write(std::ostream& os) const {
  for (const auto& r : records_)
    os << format_ns(r.time_ns) << '\t' << r.actor << '\t' << r.event << '\t'
       << r.state << '\n';
}

void DoorbellFsm::step(DoorbellEvent e, double time_ns, const std::string& actor,
                       EventTrace* trace) {
  const auto next = doorbell_next(state_, e);
  if (!next)
    throw ProtocolError(std::string("doorbell: illegal event ") + to_string(e) +
                        " in state " + to_string(state_));
  state_ = *next;
  if (trace) trace->record(time_ns, actor, to_string(e), to_string(state_));
}

DeviceOffloadResult execute_offload(std::span<const BlockedShard> shards,
                                    const OffloadContext& ctx,
                                    const DeviceConfig& cfg, DoorbellFsm& fsm,
                                    double start_ns, EventTrace* trace) {
  if (fsm.state() != DoorbellState::DoorbellRung)
    throw ProtocolError("execute_offload: doorbell has not been rung");
  if (shards.size() != static_cast<std::size_t>(cfg.packages_per_unit))
    throw ValidationError("execute_offload: shard count != packages_per_unit");
  if (ctx.packages.size() != shards.size())
    throw ValidationError("execute_offload: context descriptor count mismatch");
  for (std::size_t p = 0; p < shards.size(); ++p) {
    if (ctx.packages[p].n_vectors != shards[p].n_vectors ||
        ctx.packages[p].base_address != shards[p].base_address)
      throw ValidationError("execute_offload: context/shard mismatch at package " +
                            std::to_string(p));
  }

  fsm.step(DoorbellEvent::DeviceObserve, start_ns, "device", trace);

  DeviceOffloadResult result;
  result.per_package.reserve(shards.size());
  for (const auto& shard : shards) {
    NmaOffloadResult r;
    if (shard.n_vectors == 0) {
      r.cycles = 0;
      r.dram_bytes_read = 0;
      r.partials.assign(static_cast<std::size_t>(ctx.queries.cols()),
                        PartialTopK(cfg.nma.hw_k));
    } else {
      r = run_nma_offload(shard, ctx.queries, cfg.nma);
    }
    result.dot_ns = std::max(result.dot_ns, r.cycles / cfg.nma.clock_hz * 1e9);
    result.dram_bytes_read += r.dram_bytes_read;
    result.per_package.push_back(std::move(r));
  }

  fsm.step(DoorbellEvent::NmaComplete, start_ns + result.dot_ns, "device", trace);
  return result;
}

TenantPlan schedule_tenants(std::span<const TenantRequest> requests,
                            const DeviceConfig& cfg, EventTrace* trace) {
  TenantPlan plan;
  for (const auto& req : requests) {
    for (int p : req.packages)
      if (p < 0 || p >= cfg.packages_per_unit)
        throw ValidationError("schedule_tenants: package index out of range");
    auto it = plan.assignments.find(req.tenant);
    if (it == plan.assignments.end()) {
      // Claims must be disjoint from, or identical to, every other tenant's.
      for (const auto& [other, pkgs] : plan.assignments) {
        if (pkgs == req.packages) continue;
        std::vector<int> overlap;
        std::set_intersection(pkgs.begin(), pkgs.end(), req.packages.begin(),
                              req.packages.end(), std::back_inserter(overlap));
        if (!overlap.empty())
          throw ValidationError("schedule_tenants: placement conflict between " +
                                other + " and " + req.tenant);
      }
      plan.assignments.emplace(req.tenant, req.packages);
    } else if (it->second != req.packages) {
      throw ValidationError("schedule_tenants: tenant " + req.tenant +
                            " changed its placement");
    }
  }

  // FIFO per package set; searches never preempt.
  std::map<std::set<int>, double> busy_until;
  for (const auto& req : requests) {
    double& t = busy_until[req.packages];
    const double start = t;
    const double finish = start + req.search_ns;
    t = finish;
    plan.completions.push_back({req.tenant, start, finish});
    if (trace) {
      trace->record(start, req.tenant, "search_start", "NmaBusy");
      trace->record(finish, req.tenant, "search_complete", "Idle");
    }
  }
  return plan;
}

}  // namespace iks
