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

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>

namespace iks {

// Embedding elements are IEEE binary16. Eigen::half converts to/from
// binary32 with round-to-nearest-even, which is the project-wide rule.
using half = Eigen::half;

// One embedding vector per column (VD rows x N columns).
using HalfMatrix = Eigen::Matrix<half, Eigen::Dynamic, Eigen::Dynamic>;
using HalfVector = Eigen::Matrix<half, Eigen::Dynamic, 1>;

inline half half_from_bits(std::uint16_t bits) {
  return Eigen::numext::bit_cast<half>(bits);
}

inline std::uint16_t half_to_bits(half h) {
  return Eigen::numext::bit_cast<std::uint16_t>(h);
}

// Per-phase retrieval timing. All durations are nanoseconds.
struct LatencyBreakdown {
  double write_ns = 0.0;
  double dot_ns = 0.0;
  double read_ns = 0.0;
  double agg_ns = 0.0;

  double total_ns() const { return write_ns + dot_ns + read_ns + agg_ns; }
};

inline bool operator==(const LatencyBreakdown& a, const LatencyBreakdown& b) {
  return a.write_ns == b.write_ns && a.dot_ns == b.dot_ns &&
         a.read_ns == b.read_ns && a.agg_ns == b.agg_ns;
}

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iks
