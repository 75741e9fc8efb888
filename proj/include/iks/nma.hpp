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

#include <cstdint>
#include <span>
#include <vector>

#include "iks/layout.hpp"
#include "iks/types.hpp"

namespace iks {

struct NmaConfig {
  int engines = 64;
  int macs_per_engine = 68;
  double clock_hz = 1e9;
  int hw_k = 32;
  int bytes_per_cycle = 136;  // must equal 2 * macs_per_engine
  int query_scratchpad_bytes = 2048;

  void validate() const {
    if (2 * macs_per_engine != bytes_per_cycle)
      throw ValidationError("NmaConfig: bytes_per_cycle must be 2 * macs_per_engine");
    if (hw_k < 1) throw ValidationError("NmaConfig: hw_k must be >= 1");
    if (engines < 1 || clock_hz <= 0)
      throw ValidationError("NmaConfig: engines and clock must be positive");
  }
};

struct ScoreEntry {
  half score;
  std::uint32_t vector_id = 0;
};

// Ranking order of the Top-K unit: larger score first, ties by lower id.
inline bool score_entry_better(const ScoreEntry& a, const ScoreEntry& b) {
  const float fa = static_cast<float>(a.score);
  const float fb = static_cast<float>(b.score);
  if (fa != fb) return fa > fb;
  return a.vector_id < b.vector_id;
}

// One engine's ordered list of the hw_k best (score, id) pairs.
class PartialTopK {
 public:
  explicit PartialTopK(int capacity = 32) : capacity_(capacity) {}

  void insert(const ScoreEntry& entry);
  const std::vector<ScoreEntry>& entries() const { return entries_; }
  int capacity() const { return capacity_; }

 private:
  std::vector<ScoreEntry> entries_;
  int capacity_;
};

inline PartialTopK topk_insert(PartialTopK list, const ScoreEntry& entry) {
  list.insert(entry);
  return list;
}

// Scores one 68-vector block against a query: binary32 accumulation in
// ascending dimension order, final round to binary16.
void dot_product_block(std::span<const float> query_f32,
                       std::span<const std::byte> block, std::uint32_t dim,
                       std::span<half> scores_out);

// Control-unit cycles to scan n_vectors: max(VD, 68) per block plus a final
// 68-cycle score drain. Top-K insertion is overlapped and adds nothing.
std::uint64_t nma_cycles(std::uint64_t n_vectors, std::uint32_t vd,
                         const NmaConfig& cfg);

struct NmaOffloadResult {
  std::vector<PartialTopK> partials;  // one per active engine
  std::uint64_t cycles = 0;
  std::uint64_t dram_bytes_read = 0;
};

// Scans the shard once, broadcasting each block to all active engines.
NmaOffloadResult run_nma_offload(const BlockedShard& shard,
                                 const HalfMatrix& batch, const NmaConfig& cfg);

}  // namespace iks
