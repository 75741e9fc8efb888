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

#include "iks/layout.hpp"

#include <cstring>
#include <fstream>

namespace iks {

namespace {

void store_u16(std::byte* dst, std::uint16_t v) {
  dst[0] = static_cast<std::byte>(v & 0xff);
  dst[1] = static_cast<std::byte>(v >> 8);
}

std::uint16_t load_u16(const std::byte* src) {
  return static_cast<std::uint16_t>(static_cast<unsigned>(src[0]) |
                                    (static_cast<unsigned>(src[1]) << 8));
}

template <typename T>
void write_le(std::ostream& os, T v) {
  std::array<char, sizeof(T)> buf;
  for (std::size_t b = 0; b < sizeof(T); ++b)
    buf[b] = static_cast<char>((v >> (8 * b)) & 0xff);
  os.write(buf.data(), buf.size());
}

template <typename T>
T read_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> buf;
  is.read(reinterpret_cast<char*>(buf.data()), buf.size());
  T v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b)
    v |= static_cast<T>(buf[b]) << (8 * b);
  return v;
}

}  // namespace

std::size_t element_offset(std::uint64_t i, std::uint32_t j, std::uint32_t dim) {
  const std::uint64_t block = i / kBlockVectors;
  const std::uint64_t lane = i % kBlockVectors;
  return block * (2 * kBlockVectors * dim) + std::size_t{j} * (2 * kBlockVectors) +
         2 * lane;
}

BlockedShard pack_shard(const HalfMatrix& vectors, std::uint64_t base_address) {
  const auto vd = static_cast<std::uint32_t>(vectors.rows());
  const auto n = static_cast<std::uint64_t>(vectors.cols());
  if (n > 0 && vd == 0) throw ValidationError("pack_shard: VD must be >= 1");
  if (vd > kMaxDim)
    throw ValidationError("pack_shard: VD exceeds query scratchpad capacity");

  BlockedShard shard;
  shard.dim = vd;
  shard.n_vectors = n;
  shard.base_address = base_address;
  shard.bytes.assign(shard.block_count() * shard.block_bytes(), std::byte{0});

  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < vd; ++j)
      store_u16(shard.bytes.data() + element_offset(i, j, vd),
                half_to_bits(vectors(j, static_cast<Eigen::Index>(i))));
  return shard;
}

HalfMatrix unpack_shard(const BlockedShard& shard) {
  if (shard.bytes.size() != shard.block_count() * shard.block_bytes())
    throw ValidationError("unpack_shard: block storage length mismatch");
  if (shard.n_vectors > 0 && shard.dim == 0)
    throw ValidationError("unpack_shard: VD must be >= 1");

  HalfMatrix out(shard.dim, static_cast<Eigen::Index>(shard.n_vectors));
  for (std::uint64_t i = 0; i < shard.n_vectors; ++i)
    for (std::uint32_t j = 0; j < shard.dim; ++j)
      out(j, static_cast<Eigen::Index>(i)) =
          half_from_bits(load_u16(shard.bytes.data() + element_offset(i, j, shard.dim)));
  return out;
}

std::vector<BlockedShard> shard_corpus(const Corpus& corpus, int units,
                                       int packages_per_unit,
                                       std::uint64_t package_capacity_bytes) {
  if (units < 1 || packages_per_unit < 1)
    throw ValidationError("shard_corpus: units and packages_per_unit must be >= 1");
  const std::size_t shards = static_cast<std::size_t>(units) * packages_per_unit;
  const auto n = static_cast<std::uint64_t>(corpus.size());

  // Per-shard vector counts: whole 68-vector blocks when there are enough,
  // otherwise balance by vectors so small corpora still spread out.
  std::vector<std::uint64_t> counts(shards, 0);
  const std::uint64_t total_blocks = (n + kBlockVectors - 1) / kBlockVectors;
  if (total_blocks >= shards) {
    const std::uint64_t per = total_blocks / shards;
    const std::uint64_t extra = total_blocks % shards;
    std::uint64_t remaining = n;
    for (std::size_t s = 0; s < shards; ++s) {
      const std::uint64_t blocks = per + (s < extra ? 1 : 0);
      counts[s] = std::min<std::uint64_t>(blocks * kBlockVectors, remaining);
      remaining -= counts[s];
    }
  } else {
    const std::uint64_t per = n / shards;
    const std::uint64_t extra = n % shards;
    for (std::size_t s = 0; s < shards; ++s) counts[s] = per + (s < extra ? 1 : 0);
  }

  std::vector<BlockedShard> out;
  out.reserve(shards);
  std::uint64_t start = 0;
  std::uint64_t byte_base = 0;
  for (std::size_t s = 0; s < shards; ++s) {
    const auto cols = static_cast<Eigen::Index>(counts[s]);
    HalfMatrix slice = corpus.vectors.middleCols(static_cast<Eigen::Index>(start), cols);
    BlockedShard shard = pack_shard(slice, byte_base);
    byte_base += shard.bytes.size();
    if (shard.bytes.size() > package_capacity_bytes)
      throw CapacityError("shard_corpus: shard exceeds per-package capacity");
    out.push_back(std::move(shard));
    start += counts[s];
  }
  return out;
}

std::vector<std::uint64_t> shard_offsets(const std::vector<BlockedShard>& shards) {
  std::vector<std::uint64_t> offsets(shards.size(), 0);
  std::uint64_t acc = 0;
  for (std::size_t s = 0; s < shards.size(); ++s) {
    offsets[s] = acc;
    acc += shards[s].n_vectors;
  }
  return offsets;
}

std::vector<ScratchpadImage> layout_query_scratchpad(const HalfMatrix& batch) {
  const auto b = batch.cols();
  const auto vd = batch.rows();
  if (b < 1) throw ValidationError("layout_query_scratchpad: empty batch");
  if (b > kEngines) throw ValidationError("layout_query_scratchpad: batch exceeds 64 engines");
  if (2 * static_cast<std::size_t>(vd) > kQueryScratchpadBytes)
    throw ValidationError("layout_query_scratchpad: query exceeds scratchpad");

  std::vector<ScratchpadImage> images(kEngines);
  for (Eigen::Index e = 0; e < b; ++e) {
    images[static_cast<std::size_t>(e)].active = true;
    for (Eigen::Index j = 0; j < vd; ++j)
      store_u16(images[static_cast<std::size_t>(e)].bytes.data() + 2 * j,
                half_to_bits(batch(j, e)));
  }
  return images;
}

void write_shard_file(const std::filesystem::path& path, const BlockedShard& shard) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_shard_file: cannot open " + path.string());
  os.write("IKS1", 4);
  write_le<std::uint32_t>(os, shard.dim);
  write_le<std::uint64_t>(os, shard.n_vectors);
  write_le<std::uint64_t>(os, shard.base_address);
  os.write(reinterpret_cast<const char*>(shard.bytes.data()),
           static_cast<std::streamsize>(shard.bytes.size()));
  if (!os) throw std::runtime_error("write_shard_file: short write to " + path.string());
}

BlockedShard read_shard_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_shard_file: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "IKS1", 4) != 0)
    throw std::runtime_error("read_shard_file: bad magic");
  BlockedShard shard;
  shard.dim = read_le<std::uint32_t>(is);
  shard.n_vectors = read_le<std::uint64_t>(is);
  shard.base_address = read_le<std::uint64_t>(is);
  shard.bytes.resize(shard.block_count() * shard.block_bytes());
  is.read(reinterpret_cast<char*>(shard.bytes.data()),
          static_cast<std::streamsize>(shard.bytes.size()));
  if (!is) throw std::runtime_error("read_shard_file: truncated block data");
  return shard;
}

}  // namespace iks
