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

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "jouleget/clock.hpp"
#include "jouleget/digest.hpp"
#include "jouleget/error.hpp"
#include "jouleget/http_socket.hpp"
#include "jouleget/transfer_plan.hpp"

namespace jouleget::engine {

/// One download: source URL, destination, and optional expectations used
/// for verification.
struct FileJob {
  std::string source_url;
  std::filesystem::path destination_path;
  std::optional<std::uint64_t> expected_bytes;
  std::string checksum_hex; // empty = skip verification
};

struct FileRecord {
  std::string url;
  std::filesystem::path destination;
  double start_s = 0.0;
  double end_s = 0.0;
  std::uint64_t bytes = 0;
  bool ok = false;
  std::string error;
};

struct TransferResult {
  std::uint64_t total_bytes = 0;       // bytes of successfully completed files
  double wall_duration_s = 0.0;        // first dispatch to last completion
  double avg_throughput_mbps = 0.0;
  std::vector<FileRecord> files;       // input order
  std::vector<std::string> failures;   // one message per failed file
  std::vector<std::string> warnings;   // e.g. parallelism degraded
};

struct EngineOptions {
  int chunk_retries = 1;
  bool probe_ranges = true; // probe once per server before chunking
};

/// True iff the file's SHA-256 matches the expected hex digest.
inline bool verify_integrity(const std::filesystem::path &path,
                             const std::string &expected_hex) {
  std::string actual = sha256_file(path);
  std::string want = expected_hex;
  std::transform(want.begin(), want.end(), want.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return actual == want;
}

/// Asks the server for the first byte of the resource. A 206 reply means
/// byte ranges are honored; a 200 means the server ignored the range.
/// Unreachable servers throw, so "no support" and "no server" stay
/// distinguishable.
inline bool probe_range_support(const std::string &url) {
  http::Url u = http::parse_url(url);
  http::Socket sock = http::connect_tcp(u.host, u.port);
  http::Response r =
      http::send_request(sock, "GET", u, std::make_pair<std::uint64_t,
                                                        std::uint64_t>(0, 0),
                         1024);
  if (r.status == 206) return true;
  if (r.status == 200) return false; // close without draining the body
  throw Error("range probe got HTTP " + std::to_string(r.status) + " for " +
              url);
}

namespace detail {

// Streams one response body to the destination region. Every socket read
// requests io_bytes (short final read allowed) and every file write is a
// full io_bytes block, except the last.
inline void stream_body_to_file(const http::Socket &sock,
                                const std::string &head_bytes, int fd,
                                std::uint64_t offset, std::uint64_t expect_len,
                                std::uint64_t io_bytes) {
  std::vector<char> block(static_cast<std::size_t>(io_bytes));
  std::vector<char> scratch(static_cast<std::size_t>(io_bytes));
  std::size_t fill = 0;
  std::uint64_t written = 0;

  auto flush = [&]() {
    const char *p = block.data();
    std::size_t left = fill;
    while (left > 0) {
      ssize_t n = ::pwrite(fd, p, left,
                           static_cast<off_t>(offset + written));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(std::string("write failed: ") + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
      written += static_cast<std::uint64_t>(n);
    }
    fill = 0;
  };

  auto feed = [&](const char *data, std::size_t n) {
    while (n > 0) {
      std::size_t take = std::min(n, block.size() - fill);
      std::memcpy(block.data() + fill, data, take);
      fill += take;
      data += take;
      n -= take;
      if (fill == block.size()) flush();
    }
  };

  std::uint64_t received = 0;
  if (!head_bytes.empty()) {
    std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(
        head_bytes.size(), expect_len));
    feed(head_bytes.data(), take);
    received += take;
  }
  while (received < expect_len) {
    std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(
        expect_len - received, io_bytes));
    std::size_t n = sock.recv_some(scratch.data(), want);
    if (n == 0)
      throw Error("connection closed mid-body (" + std::to_string(received) +
                  "/" + std::to_string(expect_len) + " bytes)");
    feed(scratch.data(), n);
    received += n;
  }
  flush();
}

inline std::uint64_t resolve_size(const http::Url &u,
                                  std::uint64_t io_bytes) {
  http::Socket sock = http::connect_tcp(u.host, u.port);
  http::Response r =
      http::send_request(sock, "HEAD", u, std::nullopt, io_bytes);
  if (r.status != 200)
    throw Error("HEAD got HTTP " + std::to_string(r.status) + " for " +
                u.path);
  auto len = r.content_length();
  if (!len) throw Error("HEAD reply missing Content-Length for " + u.path);
  return *len;
}

} // namespace detail

/// Executes a batch of downloads under a transfer plan.
///
/// At most plan.concurrency files are in flight at once; each in-flight
/// file is served by plan.parallelism byte-range streams (degraded to one
/// stream when the server ignores ranges). All socket reads and file
/// writes are issued in io_request_bytes units. A finishing file's slot is
/// refilled immediately, so batches run back-to-back with no idle gap.
/// Files land under a temporary name and are renamed on completion.
///
/// Per-file failures (after one retry per chunk) are recorded without
/// aborting the batch; the call throws only if every job fails.
inline TransferResult execute_transfer(const std::vector<FileJob> &jobs,
                                       const TransferPlan &plan,
                                       const Clock &clock = SteadyClock{},
                                       const EngineOptions &options = {}) {
  plan.validate();
  if (jobs.empty()) throw Error("execute_transfer: no jobs");

  TransferResult result;
  result.files.resize(jobs.size());

  // one range probe per server
  std::map<std::string, bool> range_support;
  std::mutex probe_mutex;
  auto server_supports_ranges = [&](const http::Url &u) {
    std::lock_guard<std::mutex> lock(probe_mutex);
    std::string key = u.host + ":" + u.port;
    auto it = range_support.find(key);
    if (it != range_support.end()) return it->second;
    bool ok = probe_range_support("http://" + key + u.path);
    range_support[key] = ok;
    return ok;
  };

  std::mutex result_mutex;
  std::atomic<std::size_t> next_job{0};
  const double t_start = clock.now();

  auto download_chunk = [&](const http::Url &u, const ByteRange &range,
                            bool ranged, int fd) {
    std::string last_error;
    for (int attempt = 0; attempt <= options.chunk_retries; ++attempt) {
      try {
        http::Socket sock = http::connect_tcp(u.host, u.port);
        std::optional<std::pair<std::uint64_t, std::uint64_t>> req_range;
        if (ranged) req_range = std::make_pair(range.first, range.last);
        http::Response r = http::send_request(
            sock, "GET", u, req_range,
            static_cast<std::size_t>(plan.io_request_bytes));
        int want_status = ranged ? 206 : 200;
        if (r.status != want_status)
          throw Error("GET got HTTP " + std::to_string(r.status) +
                      " (expected " + std::to_string(want_status) + ")");
        std::uint64_t expect = range.length();
        if (auto cl = r.content_length(); cl && *cl != expect)
          throw Error("content length " + std::to_string(*cl) +
                      " does not match requested " + std::to_string(expect));
        detail::stream_body_to_file(sock, r.body_head, fd, range.first,
                                   expect, plan.io_request_bytes);
        return;
      } catch (const std::exception &e) {
        last_error = e.what();
      }
    }
    throw Error("chunk " + std::to_string(range.first) + "-" +
                std::to_string(range.last) + " failed after retry: " +
                last_error);
  };

  auto process_file = [&](std::size_t idx) {
    const FileJob &job = jobs[idx];
    FileRecord rec;
    rec.url = job.source_url;
    rec.destination = job.destination_path;
    rec.start_s = clock.now();
    auto tmp_path = job.destination_path;
    tmp_path += ".part";
    try {
      http::Url u = http::parse_url(job.source_url);
      std::uint64_t size = job.expected_bytes
                               ? *job.expected_bytes
                               : detail::resolve_size(
                                     u, plan.io_request_bytes);

      int p_eff = plan.parallelism;
      if (p_eff > 1 && size > 1) {
        if (options.probe_ranges && !server_supports_ranges(u)) {
          p_eff = 1;
          std::lock_guard<std::mutex> lock(result_mutex);
          if (result.warnings.empty())
            result.warnings.push_back(
                "server ignores byte ranges; parallelism degraded to 1");
        }
      } else {
        p_eff = 1;
      }

      if (!job.destination_path.parent_path().empty())
        std::filesystem::create_directories(
            job.destination_path.parent_path());
      int fd = ::open(tmp_path.c_str(), O_CREAT | O_WRONLY | O_TRUNC, 0644);
      if (fd < 0)
        throw Error("cannot create " + tmp_path.string() + ": " +
                    std::strerror(errno));
      struct FdGuard {
        int fd;
        ~FdGuard() { ::close(fd); }
      } guard{fd};

      if (size > 0) {
        auto chunks = plan_chunks(size, p_eff);
        bool ranged = chunks.size() > 1;
        std::vector<std::thread> helpers;
        std::vector<std::string> chunk_errors(chunks.size());
        for (std::size_t c = 1; c < chunks.size(); ++c) {
          helpers.emplace_back([&, c] {
            try {
              download_chunk(u, chunks[c], ranged, fd);
            } catch (const std::exception &e) {
              chunk_errors[c] = e.what();
            }
          });
        }
        try {
          download_chunk(u, chunks[0], ranged, fd);
        } catch (const std::exception &e) {
          chunk_errors[0] = e.what();
        }
        for (auto &h : helpers) h.join();
        for (const auto &err : chunk_errors)
          if (!err.empty()) throw Error(err);
      }

      std::filesystem::rename(tmp_path, job.destination_path);
      if (!job.checksum_hex.empty() &&
          !verify_integrity(job.destination_path, job.checksum_hex))
        throw Error("checksum mismatch for " +
                    job.destination_path.string());
      rec.bytes = size;
      rec.ok = true;
    } catch (const std::exception &e) {
      rec.ok = false;
      rec.error = e.what();
      std::error_code ec;
      std::filesystem::remove(tmp_path, ec);
    }
    rec.end_s = clock.now();
    std::lock_guard<std::mutex> lock(result_mutex);
    result.files[idx] = rec;
    if (rec.ok) {
      result.total_bytes += rec.bytes;
    } else {
      result.failures.push_back(rec.url + ": " + rec.error);
    }
  };

  // slot workers: each finishes a file and immediately pulls the next
  int slots = static_cast<int>(
      std::min<std::size_t>(plan.concurrency, jobs.size()));
  std::vector<std::thread> workers;
  workers.reserve(slots);
  for (int s = 0; s < slots; ++s) {
    workers.emplace_back([&] {
      for (;;) {
        std::size_t idx = next_job.fetch_add(1);
        if (idx >= jobs.size()) return;
        process_file(idx);
      }
    });
  }
  for (auto &w : workers) w.join();

  result.wall_duration_s = clock.now() - t_start;
  result.avg_throughput_mbps =
      result.wall_duration_s > 0.0
          ? static_cast<double>(result.total_bytes) * 8.0 /
                result.wall_duration_s / 1e6
          : 0.0;
  if (result.failures.size() == jobs.size())
    throw Error("all transfers failed; first error: " +
                result.failures.front());
  return result;
}

} // namespace jouleget::engine
