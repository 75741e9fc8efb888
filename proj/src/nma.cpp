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

#include "iks/nma.hpp"

#include <algorithm>

namespace iks {

void PartialTopK::insert(const ScoreEntry& entry) {
  const bool full = entries_.size() >= static_cast<std::size_t>(capacity_);
  if (full && !score_entry_better(entry, entries_.back())) return;
  auto pos = std::lower_bound(
      entries_.begin(), entries_.end(), entry,
      [](const ScoreEntry& a, const ScoreEntry& b) { return score_entry_better(a, b); });
  entries_.insert(pos, entry);
  if (entries_.size() > static_cast<std::size_t>(capacity_)) entries_.pop_back();
}

void dot_product_block(std::span<const float> query_f32,
                       std::span<const std::byte> block, std::uint32_t dim,
                       std::span<half> scores_out) {
  if (block.size() != 2 * kBlockVectors * dim)
    throw ValidationError("dot_product_block: block length mismatch");
  if (query_f32.size() != dim)
    throw ValidationError("dot_product_block: query dimension mismatch");

  float acc[kBlockVectors] = {};
  const std::byte* p = block.data();
  for (std::uint32_t j = 0; j < dim; ++j) {
    const float q = query_f32[j];
    for (std::size_t c = 0; c < kBlockVectors; ++c) {
      const auto bits = static_cast<std::uint16_t>(
          static_cast<unsigned>(p[2 * c]) | (static_cast<unsigned>(p[2 * c + 1]) << 8));
      acc[c] += q * static_cast<float>(half_from_bits(bits));
    }
    p += 2 * kBlockVectors;
  }
  for (std::size_t c = 0; c < kBlockVectors; ++c)
    scores_out[c] = half(acc[c]);
}

std::uint64_t nma_cycles(std::uint64_t n_vectors, std::uint32_t vd,
                         const NmaConfig& cfg) {
  if (n_vectors == 0) return 0;
  const std::uint64_t blocks = (n_vectors + kBlockVectors - 1) / kBlockVectors;
  // Score drain (68 cycles/block) overlaps the next block's evaluation; only
  // the last block's drain is exposed. When VD < 68 the drain dominates.
  const std::uint64_t per_block = std::max<std::uint64_t>(vd, kBlockVectors);
  (void)cfg;
  return blocks * per_block + kBlockVectors;
}

NmaOffloadResult run_nma_offload(const BlockedShard& shard,
                                 const HalfMatrix& batch, const NmaConfig& cfg) {
  cfg.validate();
  const auto b = batch.cols();
  const auto vd = static_cast<std::uint32_t>(batch.rows());
  if (b < 1 || b > cfg.engines)
    throw ValidationError("run_nma_offload: batch size must be in [1, engines]");
  if (2 * batch.rows() > cfg.query_scratchpad_bytes)
    throw ValidationError("run_nma_offload: query exceeds scratchpad");
  if (shard.n_vectors > 0 && shard.dim != vd)
    throw ValidationError("run_nma_offload: shard/query dimension mismatch");

  NmaOffloadResult result;
  result.partials.assign(static_cast<std::size_t>(b), PartialTopK(cfg.hw_k));
  result.cycles = nma_cycles(shard.n_vectors, vd, cfg);
  result.dram_bytes_read = shard.block_count() * shard.block_bytes();

  std::vector<std::vector<float>> queries(static_cast<std::size_t>(b));
  for (Eigen::Index e = 0; e < b; ++e) {
    queries[static_cast<std::size_t>(e)].resize(vd);
    for (std::uint32_t j = 0; j < vd; ++j)
      queries[static_cast<std::size_t>(e)][j] = static_cast<float>(batch(j, e));
  }

  std::vector<half> scores(kBlockVectors);
  for (std::size_t blk = 0; blk < shard.block_count(); ++blk) {
    const std::span<const std::byte> block(
        shard.bytes.data() + blk * shard.block_bytes(), shard.block_bytes());
    for (Eigen::Index e = 0; e < b; ++e) {
      dot_product_block(queries[static_cast<std::size_t>(e)], block, vd, scores);
      for (std::size_t c = 0; c < kBlockVectors; ++c) {
        const std::uint64_t id = blk * kBlockVectors + c;
        if (id >= shard.n_vectors) break;  // pad lanes are suppressed
        result.partials[static_cast<std::size_t>(e)].insert(
            ScoreEntry{scores[c], static_cast<std::uint32_t>(id)});
      }
    }
  }
  return result;
}

}  // namespace iks
