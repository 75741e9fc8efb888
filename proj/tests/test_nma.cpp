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

#include <doctest.h>

#include <algorithm>
#include <random>

#include "iks/nma.hpp"
#include "test_util.hpp"

using namespace iks;

namespace {

// Sort-based reference ranking with the same arithmetic rule, used to
// check the streaming Top-K unit and the block datapath.
std::vector<ScoreEntry> reference_topk(const HalfMatrix& vectors,
                                       const HalfVector& query, int k) {
  std::vector<ScoreEntry> all;
  for (Eigen::Index i = 0; i < vectors.cols(); ++i) {
    float acc = 0.0f;
    for (Eigen::Index j = 0; j < vectors.rows(); ++j)
      acc += static_cast<float>(query(j)) * static_cast<float>(vectors(j, i));
    all.push_back({half(acc), static_cast<std::uint32_t>(i)});
  }
  std::sort(all.begin(), all.end(), score_entry_better);
  if (all.size() > static_cast<std::size_t>(k)) all.resize(static_cast<std::size_t>(k));
  return all;
}

}  // namespace

TEST_CASE("dot_product_block: zero query annihilates") {
  std::mt19937_64 rng(20);
  const HalfMatrix vecs = test::random_half_matrix(32, 68, rng);
  const BlockedShard shard = pack_shard(vecs, 0);
  std::vector<float> query(32, 0.0f);
  std::vector<half> scores(kBlockVectors);
  dot_product_block(query, shard.bytes, 32, scores);
  for (const half& s : scores) CHECK(static_cast<float>(s) == 0.0f);
}

TEST_CASE("dot_product_block: one-hot query projects a dimension") {
  std::mt19937_64 rng(21);
  const HalfMatrix vecs = test::random_half_matrix(16, 68, rng);
  const BlockedShard shard = pack_shard(vecs, 0);
  std::vector<float> query(16, 0.0f);
  query[7] = 1.0f;
  std::vector<half> scores(kBlockVectors);
  dot_product_block(query, shard.bytes, 16, scores);
  for (Eigen::Index c = 0; c < 68; ++c)
    CHECK(half_to_bits(scores[static_cast<std::size_t>(c)]) ==
          half_to_bits(vecs(7, c)));
}

TEST_CASE("dot_product_block: VD=768 matches binary32 reference") {
  std::mt19937_64 rng(22);
  const HalfMatrix vecs = test::random_half_matrix(768, 68, rng);
  const HalfVector query = test::random_half_matrix(768, 1, rng).col(0);
  const BlockedShard shard = pack_shard(vecs, 0);
  std::vector<float> qf(768);
  for (int j = 0; j < 768; ++j) qf[static_cast<std::size_t>(j)] = static_cast<float>(query(j));
  std::vector<half> scores(kBlockVectors);
  dot_product_block(qf, shard.bytes, 768, scores);
  for (Eigen::Index c = 0; c < 68; ++c) {
    float acc = 0.0f;
    for (Eigen::Index j = 0; j < 768; ++j)
      acc += static_cast<float>(query(j)) * static_cast<float>(vecs(j, c));
    CHECK(half_to_bits(scores[static_cast<std::size_t>(c)]) == half_to_bits(half(acc)));
  }
}

TEST_CASE("dot_product_block: dimension mismatch rejected") {
  std::mt19937_64 rng(23);
  const BlockedShard shard = pack_shard(test::random_half_matrix(8, 68, rng), 0);
  std::vector<float> query(9, 0.0f);
  std::vector<half> scores(kBlockVectors);
  CHECK_THROWS_AS(dot_product_block(query, shard.bytes, 8, scores), ValidationError);
}

TEST_CASE("topk_insert: grows from empty") {
  PartialTopK list(32);
  list = topk_insert(list, {half(1.5f), 7});
  REQUIRE(list.entries().size() == 1);
  CHECK(list.entries()[0].vector_id == 7);
}

TEST_CASE("topk_insert: rejected tail leaves list unchanged") {
  PartialTopK list(4);
  for (std::uint32_t i = 0; i < 4; ++i) list.insert({half(5.0f), i});
  const auto before = list.entries();
  list = topk_insert(list, {half(4.0f), 99});
  CHECK(list.entries().size() == before.size());
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(list.entries()[i].vector_id == before[i].vector_id);
}

TEST_CASE("topk_insert: 1000-entry stream equals sort-then-truncate") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  PartialTopK list(32);
  std::vector<ScoreEntry> all;
  for (std::uint32_t i = 0; i < 1000; ++i) {
    const ScoreEntry e{half(dist(rng)), i};
    all.push_back(e);
    list.insert(e);
  }
  std::sort(all.begin(), all.end(), score_entry_better);
  all.resize(32);
  REQUIRE(list.entries().size() == 32);
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(half_to_bits(list.entries()[i].score) == half_to_bits(all[i].score));
    CHECK(list.entries()[i].vector_id == all[i].vector_id);
  }
}

TEST_CASE("run_nma_offload: matches reference top-32 on 100 vectors") {
  std::mt19937_64 rng(25);
  const HalfMatrix vecs = test::random_half_matrix(64, 100, rng);
  const HalfMatrix batch = test::random_half_matrix(64, 1, rng);
  const BlockedShard shard = pack_shard(vecs, 0);
  const NmaOffloadResult result = run_nma_offload(shard, batch, NmaConfig{});
  REQUIRE(result.partials.size() == 1);
  const auto expect = reference_topk(vecs, batch.col(0), 32);
  const auto& got = result.partials[0].entries();
  REQUIRE(got.size() == 32);
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(half_to_bits(got[i].score) == half_to_bits(expect[i].score));
    CHECK(got[i].vector_id == expect[i].vector_id);
  }
}

TEST_CASE("run_nma_offload: fewer vectors than K returns all of them") {
  std::mt19937_64 rng(26);
  const BlockedShard shard = pack_shard(test::random_half_matrix(8, 10, rng), 0);
  const HalfMatrix batch = test::random_half_matrix(8, 1, rng);
  const auto result = run_nma_offload(shard, batch, NmaConfig{});
  CHECK(result.partials[0].entries().size() == 10);
}

TEST_CASE("run_nma_offload: identical queries yield identical partial lists") {
  std::mt19937_64 rng(27);
  const BlockedShard shard = pack_shard(test::random_half_matrix(16, 300, rng), 0);
  HalfMatrix batch(16, 64);
  const HalfMatrix one = test::random_half_matrix(16, 1, rng);
  for (int e = 0; e < 64; ++e) batch.col(e) = one.col(0);
  const auto result = run_nma_offload(shard, batch, NmaConfig{});
  REQUIRE(result.partials.size() == 64);
  for (const auto& p : result.partials) {
    REQUIRE(p.entries().size() == result.partials[0].entries().size());
    for (std::size_t i = 0; i < p.entries().size(); ++i) {
      CHECK(half_to_bits(p.entries()[i].score) ==
            half_to_bits(result.partials[0].entries()[i].score));
      CHECK(p.entries()[i].vector_id == result.partials[0].entries()[i].vector_id);
    }
  }
}

TEST_CASE("run_nma_offload: dram bytes independent of batch size") {
  std::mt19937_64 rng(28);
  const BlockedShard shard = pack_shard(test::random_half_matrix(16, 500, rng), 0);
  const auto r1 = run_nma_offload(shard, test::random_half_matrix(16, 1, rng), NmaConfig{});
  const auto r64 = run_nma_offload(shard, test::random_half_matrix(16, 64, rng), NmaConfig{});
  CHECK(r1.dram_bytes_read == r64.dram_bytes_read);
  CHECK(r1.dram_bytes_read == shard.block_count() * shard.block_bytes());
  CHECK(r1.cycles == r64.cycles);
}

TEST_CASE("nma_cycles: zero vectors cost nothing") {
  CHECK(nma_cycles(0, 768, NmaConfig{}) == 0);
}

TEST_CASE("nma_cycles: 64 GB shard scans in 470.6 ms") {
  // 64e9 bytes of blocks at VD=768: n = 64e9 / (2 * 768) vectors
  const std::uint64_t n = 64'000'000'000ull / (2 * 768);
  const NmaConfig cfg;
  const double seconds = static_cast<double>(nma_cycles(n, 768, cfg)) / cfg.clock_hz;
  CHECK(seconds == doctest::Approx(0.4706).epsilon(0.001));
}

TEST_CASE("nma_cycles: 6.25 GB shard scans in 45.96 ms") {
  const std::uint64_t n = 6'250'000'000ull / (2 * 768);
  const NmaConfig cfg;
  const double seconds = static_cast<double>(nma_cycles(n, 768, cfg)) / cfg.clock_hz;
  CHECK(seconds == doctest::Approx(0.04596).epsilon(0.001));
}

TEST_CASE("nma_cycles: VD below 68 is drain-limited") {
  const NmaConfig cfg;
  CHECK(nma_cycles(68, 4, cfg) == 68 + 68);
  CHECK(nma_cycles(68, 68, cfg) == 68 + 68);
  CHECK(nma_cycles(68, 100, cfg) == 100 + 68);
}

TEST_CASE("nma_cycles: strictly monotone in blocks and VD") {
  const NmaConfig cfg;
  std::uint64_t prev = 0;
  for (std::uint64_t n = 68; n <= 68 * 10; n += 68) {
    const std::uint64_t c = nma_cycles(n, 768, cfg);
    CHECK(c > prev);
    prev = c;
  }
  CHECK(nma_cycles(1000, 769, cfg) > nma_cycles(1000, 768, cfg));
}

TEST_CASE("modeled stream rate never exceeds 136 GB/s") {
  const NmaConfig cfg;
  std::mt19937_64 rng(29);
  for (int iter = 0; iter < 20; ++iter) {
    const std::uint64_t n = 1 + rng() % 5000;
    const std::uint32_t vd = 68 + static_cast<std::uint32_t>(rng() % 957);
    const std::uint64_t blocks = (n + 67) / 68;
    const double bytes = static_cast<double>(blocks) * 136.0 * vd;
    const double seconds = static_cast<double>(nma_cycles(n, vd, cfg)) / cfg.clock_hz;
    CHECK(bytes / seconds <= cfg.bytes_per_cycle * cfg.clock_hz * (1.0 + 1e-12));
  }
}

TEST_CASE("run_nma_offload: batch overflow and scratchpad overflow rejected") {
  std::mt19937_64 rng(30);
  const BlockedShard shard = pack_shard(test::random_half_matrix(8, 10, rng), 0);
  CHECK_THROWS_AS(run_nma_offload(shard, test::random_half_matrix(8, 65, rng), NmaConfig{}),
                  ValidationError);
  const BlockedShard big = pack_shard(test::random_half_matrix(1024, 10, rng), 0);
  NmaConfig small;
  small.query_scratchpad_bytes = 512;
  CHECK_THROWS_AS(run_nma_offload(big, test::random_half_matrix(1024, 1, rng), small),
                  ValidationError);
}
