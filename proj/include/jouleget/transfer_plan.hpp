// Copyright 2026 The jouleget Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "jouleget/error.hpp"

namespace jouleget {

/// The tunable triple of a transfer: how many files move at once, how many
/// byte-range streams serve each file, and the unit size of application
/// I/O calls.
struct TransferPlan {
  int concurrency = 1;
  int parallelism = 1;
  std::uint64_t io_request_bytes = 8192;

  void validate() const {
    if (concurrency < 1) throw Error("concurrency must be >= 1");
    if (parallelism < 1) throw Error("parallelism must be >= 1");
    if (io_request_bytes < 1) throw Error("io_request_bytes must be >= 1");
  }
};

/// Inclusive byte range [first, last] of one chunk.
struct ByteRange {
  std::uint64_t first;
  std::uint64_t last;

  std::uint64_t length() const { return last - first + 1; }
};

/// Splits a file into min(parallelism, file_size) contiguous ranges that
/// are disjoint, cover [0, file_size), and differ in length by at most one
/// byte. A zero-size file yields no ranges.
inline std::vector<ByteRange> plan_chunks(std::uint64_t file_size,
                                          int parallelism) {
  if (parallelism < 1) throw Error("parallelism must be >= 1");
  std::vector<ByteRange> ranges;
  if (file_size == 0) return ranges;
  std::uint64_t n = std::min<std::uint64_t>(
      static_cast<std::uint64_t>(parallelism), file_size);
  std::uint64_t base = file_size / n;
  std::uint64_t extra = file_size % n; // first `extra` chunks get one more byte
  ranges.reserve(n);
  std::uint64_t offset = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t len = base + (i < extra ? 1 : 0);
    ranges.push_back({offset, offset + len - 1});
    offset += len;
  }
  return ranges;
}

} // namespace jouleget
