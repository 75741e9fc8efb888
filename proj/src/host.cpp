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

#include "iks/host.hpp"

#include <algorithm>
#include <chrono>

#include <nlohmann/json.hpp>

namespace iks {

QueryResult aggregate_topk(std::span<const OffsetPartial> partials, int k) {
  if (k < 1) throw ValidationError("aggregate_topk: K must be >= 1");
  QueryResult out;
  std::size_t available = 0;
  for (const auto& p : partials) available += p.partial->entries().size();
  out.entries.reserve(available);
  for (const auto& p : partials)
    for (const auto& e : p.partial->entries())
      out.entries.push_back({e.score, p.offset + e.vector_id});
  std::sort(out.entries.begin(), out.entries.end(), global_entry_better);
  if (out.entries.size() > static_cast<std::size_t>(k))
    out.entries.resize(static_cast<std::size_t>(k));
  out.short_result = out.entries.size() < static_cast<std::size_t>(k);
  return out;
}

HostRuntime::HostRuntime(const Corpus& corpus, int units, DeviceConfig cfg)
    : cfg_(std::move(cfg)), units_(units) {
  if (units_ < 1) throw ValidationError("HostRuntime: units must be >= 1");
  cfg_.nma.validate();
  shards_ = shard_corpus(corpus, units_, cfg_.packages_per_unit,
                         cfg_.package_capacity_bytes);
  offsets_ = shard_offsets(shards_);
  fsms_.resize(static_cast<std::size_t>(units_));
}

void HostRuntime::mutate_vector(std::uint64_t global_id, const HalfVector& value) {
  std::size_t s = 0;
  while (s + 1 < shards_.size() && offsets_[s + 1] <= global_id) ++s;
  BlockedShard& shard = shards_[s];
  const std::uint64_t local = global_id - offsets_[s];
  if (local >= shard.n_vectors)
    throw ValidationError("mutate_vector: global id out of range");
  if (static_cast<std::uint32_t>(value.rows()) != shard.dim)
    throw ValidationError("mutate_vector: dimension mismatch");
  for (std::uint32_t j = 0; j < shard.dim; ++j) {
    const std::uint16_t bits = half_to_bits(value(j));
    std::byte* dst = shard.bytes.data() + element_offset(local, j, shard.dim);
    dst[0] = static_cast<std::byte>(bits & 0xff);
    dst[1] = static_cast<std::byte>(bits >> 8);
  }
  dirty_ = true;
}

std::uint64_t HostRuntime::flush_before_search() {
  dirty_ = false;
  trace_.record(now_ns_, "host", "cache_flush", "Idle");
  return ++flush_token_;
}

SearchResult HostRuntime::iks_search(const SearchRequest& request) {
  const auto b = request.queries.cols();
  const auto vd = static_cast<std::uint32_t>(request.queries.rows());
  if (request.k < 1 || request.k > cfg_.nma.hw_k)
    throw ValidationError("iks_search: K_requested must be in [1, hw K]");
  if (b < 1 || b > cfg_.nma.engines)
    throw ValidationError("iks_search: batch size out of range");

  if (dirty_) {
    diagnostics_.push_back("staleness-hazard: corpus mutated since last flush");
    trace_.record(now_ns_, "host", "staleness_hazard", "Idle");
  }

  const double query_bytes = static_cast<double>(b) * 2.0 * vd;
  double write_ns;
  if (cfg_.serial_context_write) {
    write_ns = 0.0;
    for (int p = 0; p < units_ * cfg_.packages_per_unit; ++p)
      write_ns += transfer_time_ns(query_bytes, Direction::HostToDevice, cfg_);
  } else {
    // One broadcast into the context buffers of all NMAs.
    write_ns = transfer_time_ns(query_bytes, Direction::HostToDevice, cfg_);
  }

  // Per-unit doorbell sequences; the units run concurrently.
  const double t0 = now_ns_;
  std::vector<DeviceOffloadResult> unit_results;
  unit_results.reserve(static_cast<std::size_t>(units_));
  double dot_ns = 0.0;
  for (int u = 0; u < units_; ++u) {
    DoorbellFsm& fsm = fsms_[static_cast<std::size_t>(u)];
    const std::string actor = "host/unit" + std::to_string(u);
    fsm.step(DoorbellEvent::WriteContext, t0, actor, &trace_);
    fsm.step(DoorbellEvent::Ring, t0 + write_ns, actor, &trace_);

    OffloadContext ctx;
    ctx.queries = request.queries;
    ctx.dim = vd;
    const std::size_t first = static_cast<std::size_t>(u) *
                              static_cast<std::size_t>(cfg_.packages_per_unit);
    for (int p = 0; p < cfg_.packages_per_unit; ++p) {
      const BlockedShard& s = shards_[first + static_cast<std::size_t>(p)];
      ctx.packages.push_back({s.base_address, s.n_vectors});
    }
    std::span<const BlockedShard> unit_shards(
        shards_.data() + first, static_cast<std::size_t>(cfg_.packages_per_unit));
    DeviceOffloadResult r =
        execute_offload(unit_shards, ctx, cfg_, fsm, t0 + write_ns, &trace_);
    dot_ns = std::max(dot_ns, r.dot_ns);
    unit_results.push_back(std::move(r));
  }

  // Partial top-32 read: one host-side stream over all units' scratchpads.
  std::size_t partial_bytes = 0;
  for (const auto& r : unit_results)
    for (const auto& pkg : r.per_package)
      for (const auto& pl : pkg.partials) partial_bytes += pl.entries().size() * 6;
  const double read_ns = transfer_time_ns(static_cast<double>(partial_bytes),
                                          Direction::DeviceToHost, cfg_);

  for (int u = 0; u < units_; ++u) {
    fsms_[static_cast<std::size_t>(u)].step(DoorbellEvent::NotifyHost,
                                            t0 + write_ns + dot_ns,
                                            "device/unit" + std::to_string(u),
                                            &trace_);
  }

  // Aggregation is always over the full 32-entry partial lists; K_requested
  // only truncates the output, so latency is K-independent.
  GlobalTopK topk;
  topk.per_query.resize(static_cast<std::size_t>(b));
  const auto agg_start = std::chrono::steady_clock::now();
  for (Eigen::Index q = 0; q < b; ++q) {
    std::vector<OffsetPartial> partials;
    partials.reserve(shards_.size());
    std::size_t shard_idx = 0;
    for (const auto& r : unit_results)
      for (const auto& pkg : r.per_package) {
        partials.push_back({&pkg.partials[static_cast<std::size_t>(q)],
                            offsets_[shard_idx]});
        ++shard_idx;
      }
    topk.per_query[static_cast<std::size_t>(q)] =
        aggregate_topk(partials, request.k);
  }
  const auto agg_end = std::chrono::steady_clock::now();

  double agg_ns;
  if (cfg_.agg_mode == AggMode::Calibrated) {
    agg_ns = cfg_.calibrated_agg_ns;
  } else {
    agg_ns = std::chrono::duration<double, std::nano>(agg_end - agg_start).count();
  }

  const double t_done = t0 + write_ns + dot_ns + read_ns + agg_ns;
  for (int u = 0; u < units_; ++u)
    fsms_[static_cast<std::size_t>(u)].step(DoorbellEvent::HostAck, t_done,
                                            "host/unit" + std::to_string(u),
                                            &trace_);
  now_ns_ = t_done;

  SearchResult result;
  result.topk = std::move(topk);
  result.latency = {write_ns, dot_ns, read_ns, agg_ns};
  return result;
}

SearchResult multi_unit_search(const Corpus& corpus, const SearchRequest& request,
                               int units, const DeviceConfig& cfg) {
  HostRuntime runtime(corpus, units, cfg);
  return runtime.iks_search(request);
}

void emit_results_jsonl(std::ostream& os, const GlobalTopK& topk,
                        const LatencyBreakdown& latency) {
  for (std::size_t q = 0; q < topk.per_query.size(); ++q) {
    nlohmann::json rec;
    rec["query_index"] = q;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : topk.per_query[q].entries)
      entries.push_back({{"score", static_cast<float>(e.score)},
                         {"global_id", e.global_id}});
    rec["entries"] = std::move(entries);
    rec["latency_ns"] = {{"write", latency.write_ns},
                         {"dot", latency.dot_ns},
                         {"read", latency.read_ns},
                         {"agg", latency.agg_ns},
                         {"total", latency.total_ns()}};
    os << rec.dump() << '\n';
  }
}

}  // namespace iks
