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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "iks/types.hpp"

namespace iks {

// Vectors per DRAM block. One block is streamed at 136 B/cycle, two bytes
// (one binary16 element) per MAC lane.
inline constexpr std::size_t kBlockVectors = 68;
inline constexpr std::size_t kQueryScratchpadBytes = 2048;
inline constexpr std::size_t kMaxDim = kQueryScratchpadBytes / 2;
inline constexpr int kEngines = 64;

struct Corpus {
  HalfMatrix vectors;  // VD x N

  Eigen::Index dim() const { return vectors.rows(); }
  Eigen::Index size() const { return vectors.cols(); }
};

// A per-package corpus shard in the blocked column-major layout.
// Element (vector i, dimension j) lives at byte offset
//   (i / 68) * 136 * VD + j * 136 + 2 * (i % 68)
// from the start of the shard's block storage.
struct BlockedShard {
  std::vector<std::byte> bytes;
  std::uint32_t dim = 0;
  std::uint64_t n_vectors = 0;
  std::uint64_t base_address = 0;

  std::size_t block_bytes() const { return 2 * kBlockVectors * dim; }
  std::size_t block_count() const {
    return (n_vectors + kBlockVectors - 1) / kBlockVectors;
  }
  // Zero-filled vector slots in the final block.
  std::size_t pad_count() const {
    return block_count() * kBlockVectors - n_vectors;
  }
};

// Byte offset of element (vector i, dimension j) within the shard bytes.
std::size_t element_offset(std::uint64_t i, std::uint32_t j, std::uint32_t dim);

BlockedShard pack_shard(const HalfMatrix& vectors, std::uint64_t base_address);
HalfMatrix unpack_shard(const BlockedShard& shard);

// Contiguous balanced partition of the corpus into units*packages_per_unit
// shards. Splits on 68-vector block boundaries when the corpus has at least
// one block per shard, otherwise balances by vector count. Global vector id
// of (shard s, local i) is shard_offset(s) + i.
std::vector<BlockedShard> shard_corpus(const Corpus& corpus, int units,
                                       int packages_per_unit,
                                       std::uint64_t package_capacity_bytes);

// Global-id offset of each shard for a partition produced by shard_corpus.
std::vector<std::uint64_t> shard_offsets(const std::vector<BlockedShard>& shards);

struct ScratchpadImage {
  std::array<std::byte, kQueryScratchpadBytes> bytes{};
  bool active = false;
};

// Places query e into engine e's scratchpad as 2*VD sequential bytes at
// base; engines >= B are inactive.
std::vector<ScratchpadImage> layout_query_scratchpad(const HalfMatrix& batch);

// Shard fixture file: little-endian header {magic "IKS1", VD: u32, N: u64,
// base_address: u64} followed by raw block bytes.
void write_shard_file(const std::filesystem::path& path, const BlockedShard& shard);
BlockedShard read_shard_file(const std::filesystem::path& path);

}  // namespace iks
