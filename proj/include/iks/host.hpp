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

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "iks/device.hpp"

namespace iks {

inline constexpr int kHardwareK = 32;

struct SearchRequest {
  HalfMatrix queries;  // VD x B
  int k = kHardwareK;  // 1..32
  std::string tenant = "default";
};

struct GlobalEntry {
  half score;
  std::uint64_t global_id = 0;
};

inline bool global_entry_better(const GlobalEntry& a, const GlobalEntry& b) {
  const float fa = static_cast<float>(a.score);
  const float fb = static_cast<float>(b.score);
  if (fa != fb) return fa > fb;
  return a.global_id < b.global_id;
}

struct QueryResult {
  std::vector<GlobalEntry> entries;  // sorted (score desc, global id asc)
  bool short_result = false;         // corpus had fewer than K vectors
};

struct GlobalTopK {
  std::vector<QueryResult> per_query;
};

struct OffsetPartial {
  const PartialTopK* partial = nullptr;
  std::uint64_t offset = 0;  // global id of the shard's first vector
};

// K best entries of the union of the partial lists. Returns all available
// entries (flagged short) when K exceeds their total.
QueryResult aggregate_topk(std::span<const OffsetPartial> partials, int k);

struct SearchResult {
  GlobalTopK topk;
  LatencyBreakdown latency;
};

// Host runtime for one placed corpus: owns the shards, the per-unit
// doorbell FSMs, and the staleness bookkeeping.
class HostRuntime {
 public:
  HostRuntime(const Corpus& corpus, int units, DeviceConfig cfg);

  // In-place update of one embedding vector. The write lands in shard
  // storage immediately but is not visible to a search until flushed.
  void mutate_vector(std::uint64_t global_id, const HalfVector& value);

  // Cache-flush ordering point; returns a monotonically increasing token.
  std::uint64_t flush_before_search();

  // Blocking search: full doorbell sequence, exact global top-K.
  SearchResult iks_search(const SearchRequest& request);

  int units() const { return units_; }
  const std::vector<BlockedShard>& shards() const { return shards_; }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }
  EventTrace& trace() { return trace_; }

 private:
  DeviceConfig cfg_;
  int units_;
  std::vector<BlockedShard> shards_;          // units * packages_per_unit
  std::vector<std::uint64_t> offsets_;        // global id base per shard
  std::vector<DoorbellFsm> fsms_;             // one per unit
  std::vector<std::string> diagnostics_;
  EventTrace trace_;
  bool dirty_ = false;
  std::uint64_t flush_token_ = 0;
  double now_ns_ = 0.0;
};

// One-shot convenience wrapper; units = 1 reduces to a plain iks_search.
SearchResult multi_unit_search(const Corpus& corpus, const SearchRequest& request,
                               int units, const DeviceConfig& cfg);

// JSON-lines result emission, one record per query:
// {"query_index":..,"entries":[{"score":..,"global_id":..}],"latency_ns":{..}}
void emit_results_jsonl(std::ostream& os, const GlobalTopK& topk,
                        const LatencyBreakdown& latency);

}  // namespace iks
