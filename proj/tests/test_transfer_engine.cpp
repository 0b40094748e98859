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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "jouleget/digest.hpp"
#include "jouleget/fixture_server.hpp"
#include "jouleget/transfer_engine.hpp"
#include "jouleget/transfer_plan.hpp"

using namespace jouleget;
using namespace jouleget::engine;

namespace {

struct FixtureDir {
  std::filesystem::path root;
  std::vector<std::pair<std::string, std::string>> digests; // name -> sha256

  explicit FixtureDir(const std::string &tag) {
    root = std::filesystem::temp_directory_path() / ("jouleget_fx_" + tag);
    std::filesystem::remove_all(root);
    std::filesystem::create_directories(root);
  }
  ~FixtureDir() { std::filesystem::remove_all(root); }

  void add_file(const std::string &name, std::size_t bytes,
                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::string content(bytes, '\0');
    for (auto &c : content) c = static_cast<char>(rng() & 0xff);
    std::ofstream out(root / name, std::ios::binary);
    out << content;
    out.close();
    digests.emplace_back(name, sha256_hex(content));
  }

  std::uint64_t size_of(const std::string &name) const {
    return std::filesystem::file_size(root / name);
  }
};

struct DownloadDir {
  std::filesystem::path root;
  explicit DownloadDir(const std::string &tag) {
    root = std::filesystem::temp_directory_path() / ("jouleget_dl_" + tag);
    std::filesystem::remove_all(root);
    std::filesystem::create_directories(root);
  }
  ~DownloadDir() { std::filesystem::remove_all(root); }
};

} // namespace

TEST(PlanChunks, EvenSplitAndIdentity) {
  auto two = plan_chunks(10, 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].first, 0u);
  EXPECT_EQ(two[0].last, 4u);
  EXPECT_EQ(two[1].first, 5u);
  EXPECT_EQ(two[1].last, 9u);

  auto one = plan_chunks(10, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].first, 0u);
  EXPECT_EQ(one[0].last, 9u);

  EXPECT_TRUE(plan_chunks(0, 4).empty());
  auto tiny = plan_chunks(3, 8); // more streams than bytes
  EXPECT_EQ(tiny.size(), 3u);
}

namespace {

// range-union oracle: disjoint, covering, balanced
void check_chunks(std::uint64_t size, int p) {
  auto chunks = plan_chunks(size, p);
  if (size == 0) {
    EXPECT_TRUE(chunks.empty());
    return;
  }
  ASSERT_EQ(chunks.size(), std::min<std::uint64_t>(p, size));
  std::uint64_t covered = 0, lo = ~0ULL, hi = 0;
  std::uint64_t min_len = ~0ULL, max_len = 0;
  std::uint64_t expect_next = 0;
  for (const auto &c : chunks) {
    ASSERT_LE(c.first, c.last);
    ASSERT_EQ(c.first, expect_next); // contiguous => disjoint + covering
    expect_next = c.last + 1;
    covered += c.length();
    lo = std::min(lo, c.first);
    hi = std::max(hi, c.last);
    min_len = std::min(min_len, c.length());
    max_len = std::max(max_len, c.length());
  }
  EXPECT_EQ(covered, size);
  EXPECT_EQ(lo, 0u);
  EXPECT_EQ(hi, size - 1);
  EXPECT_LE(max_len - min_len, 1u);
}

} // namespace

TEST(PlanChunks, ExhaustiveSmallSizes) {
  for (std::uint64_t size = 0; size <= 10000; size += (size < 64 ? 1 : 97))
    for (int p : {1, 2, 3, 7, 8})
      check_chunks(size, p);
}

TEST(PlanChunks, RandomLargeSizes) {
  check_chunks(10ULL << 30, 8); // 10 GiB
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i)
    check_chunks(rng() % (1ULL << 40), 1 + static_cast<int>(rng() % 32));
}

TEST(ParseUrl, Forms) {
  auto u = http::parse_url("http://localhost:8080/a/b.dat");
  EXPECT_EQ(u.host, "localhost");
  EXPECT_EQ(u.port, "8080");
  EXPECT_EQ(u.path, "/a/b.dat");
  auto bare = http::parse_url("http://example.org");
  EXPECT_EQ(bare.port, "80");
  EXPECT_EQ(bare.path, "/");
  EXPECT_THROW(http::parse_url("https://secure.example.org/x"), Error);
  EXPECT_THROW(http::parse_url("ftp://example.org/x"), Error);
}

TEST(ProbeRangeSupport, FixtureToggles) {
  FixtureDir fx("probe");
  fx.add_file("f.dat", 5000, 1);
  net::FixtureServer server(fx.root);
  server.start();
  std::string url = server.url() + "/f.dat";
  EXPECT_TRUE(probe_range_support(url));
  server.set_ranges_enabled(false);
  EXPECT_FALSE(probe_range_support(url)); // full body to a range probe
  server.stop();
  // unreachable server is an error, not "no support"
  EXPECT_THROW(probe_range_support("http://127.0.0.1:1/f.dat"), Error);
}

TEST(VerifyIntegrity, EmptyMutationAndError) {
  FixtureDir fx("verify");
  auto empty = fx.root / "empty.bin";
  std::ofstream(empty, std::ios::binary).close();
  EXPECT_TRUE(verify_integrity(
      empty,
      "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"));

  auto file = fx.root / "data.bin";
  {
    std::ofstream out(file, std::ios::binary);
    out << "the quick brown fox";
  }
  std::string digest = sha256_file(file);
  EXPECT_TRUE(verify_integrity(file, digest));
  {
    std::fstream out(file, std::ios::binary | std::ios::in | std::ios::out);
    out.seekp(4);
    out.put('Q'); // 1-byte mutation
  }
  EXPECT_FALSE(verify_integrity(file, digest));
  EXPECT_THROW(verify_integrity(fx.root / "missing.bin", digest), Error);
}

TEST(ExecuteTransfer, SingleFileDegeneratePlan) {
  FixtureDir fx("single");
  fx.add_file("a.dat", 40000, 11);
  net::FixtureServer server(fx.root);
  server.start();
  DownloadDir dl("single");

  std::vector<FileJob> jobs = {{server.url() + "/a.dat", dl.root / "a.dat",
                                std::nullopt, fx.digests[0].second}};
  auto result = execute_transfer(jobs, TransferPlan{1, 1, 4096});
  EXPECT_EQ(result.total_bytes, 40000u);
  EXPECT_TRUE(result.failures.empty());
  EXPECT_EQ(sha256_file(dl.root / "a.dat"), fx.digests[0].second);
  server.stop();
}

TEST(ExecuteTransfer, ReassemblyMatchesReferenceAcrossPlans) {
  FixtureDir fx("plans");
  fx.add_file("odd.dat", 12345, 21); // odd size exercises uneven chunks
  net::FixtureServer server(fx.root);
  server.start();

  for (int p : {1, 2, 8}) {
    for (std::uint64_t io : {512ULL, 65536ULL}) {
      DownloadDir dl("plans_p" + std::to_string(p) + "_" + std::to_string(io));
      std::vector<FileJob> jobs = {{server.url() + "/odd.dat",
                                    dl.root / "odd.dat", 12345ULL, ""}};
      auto result = execute_transfer(jobs, TransferPlan{1, p, io});
      EXPECT_TRUE(result.failures.empty());
      EXPECT_EQ(sha256_file(dl.root / "odd.dat"), fx.digests[0].second)
          << "p=" << p << " io=" << io;
    }
  }
  server.stop();
}

TEST(ExecuteTransfer, ConcurrencyCeilingAndConnectionLog) {
  FixtureDir fx("ceiling");
  for (int i = 0; i < 4; ++i)
    fx.add_file("f" + std::to_string(i) + ".dat", 300000 + i * 1000, 30 + i);
  net::FixtureServer server(fx.root);
  server.start();
  server.clear_stats();
  DownloadDir dl("ceiling");

  std::vector<FileJob> jobs;
  for (int i = 0; i < 4; ++i) {
    std::string name = "f" + std::to_string(i) + ".dat";
    jobs.push_back({server.url() + "/" + name, dl.root / name,
                    fx.size_of(name), fx.digests[i].second});
  }
  TransferPlan plan{2, 2, 4096};
  auto result = execute_transfer(jobs, plan);
  EXPECT_TRUE(result.failures.empty());
  for (int i = 0; i < 4; ++i)
    EXPECT_EQ(sha256_file(dl.root / ("f" + std::to_string(i) + ".dat")),
              fx.digests[i].second);

  // fixture-side ceiling: never more than cc*p simultaneous connections
  EXPECT_LE(server.max_concurrent_connections(),
            plan.concurrency * plan.parallelism);

  // per-file records: at most cc files in flight at any instant
  std::vector<std::pair<double, int>> edges;
  for (const auto &f : result.files) {
    edges.emplace_back(f.start_s, +1);
    edges.emplace_back(f.end_s, -1);
  }
  std::sort(edges.begin(), edges.end()); // -1 sorts before +1 at ties
  int in_flight = 0, peak = 0;
  for (const auto &[t, d] : edges) {
    in_flight += d;
    peak = std::max(peak, in_flight);
  }
  EXPECT_LE(peak, plan.concurrency);

  // every data request was a ranged chunk request (p=2 splits each file)
  int ranged = 0;
  for (const auto &r : server.request_log())
    if (r.method == "GET" && !r.range.empty()) ++ranged;
  EXPECT_GE(ranged, 8); // 4 files x 2 chunks (+probe)
  server.stop();
}

TEST(ExecuteTransfer, RangeDisabledServerDegradesToSingleStream) {
  FixtureDir fx("noranges");
  fx.add_file("a.dat", 50000, 44);
  fx.add_file("b.dat", 50001, 45);
  net::FixtureServer::Options opts;
  opts.ranges_enabled = false;
  net::FixtureServer server(fx.root, opts);
  server.start();
  server.clear_stats();
  DownloadDir dl("noranges");

  std::vector<FileJob> jobs = {
      {server.url() + "/a.dat", dl.root / "a.dat", 50000ULL,
       fx.digests[0].second},
      {server.url() + "/b.dat", dl.root / "b.dat", 50001ULL,
       fx.digests[1].second},
  };
  auto result = execute_transfer(jobs, TransferPlan{2, 8, 4096});
  EXPECT_TRUE(result.failures.empty());
  EXPECT_FALSE(result.warnings.empty()); // degraded with a warning
  EXPECT_EQ(sha256_file(dl.root / "a.dat"), fx.digests[0].second);
  EXPECT_EQ(sha256_file(dl.root / "b.dat"), fx.digests[1].second);

  // after the probe, data requests must carry no Range header
  int ranged_data = 0;
  for (const auto &r : server.request_log())
    if (r.method == "GET" && !r.range.empty() && r.range != "bytes=0-0")
      ++ranged_data;
  EXPECT_EQ(ranged_data, 0);
  server.stop();
}

TEST(ExecuteTransfer, FaultInjectionFailsOneFileNotTheBatch) {
  FixtureDir fx("fault");
  fx.add_file("big.dat", 8000, 50);
  fx.add_file("small.dat", 1000, 51);
  net::FixtureServer::Options opts;
  opts.fault_after_bytes = 2000; // cuts any body larger than 2000 bytes
  net::FixtureServer server(fx.root, opts);
  server.start();
  server.clear_stats();
  DownloadDir dl("fault");

  std::vector<FileJob> jobs = {
      {server.url() + "/big.dat", dl.root / "big.dat", 8000ULL,
       fx.digests[0].second},
      {server.url() + "/small.dat", dl.root / "small.dat", 1000ULL,
       fx.digests[1].second},
  };
  auto result = execute_transfer(jobs, TransferPlan{1, 2, 1024});
  ASSERT_EQ(result.failures.size(), 1u);
  EXPECT_FALSE(result.files[0].ok);
  EXPECT_TRUE(result.files[1].ok);
  EXPECT_EQ(sha256_file(dl.root / "small.dat"), fx.digests[1].second);
  EXPECT_FALSE(std::filesystem::exists(dl.root / "big.dat"));

  // each of the two 4000-byte chunks was attempted twice (one retry)
  int big_gets = 0;
  for (const auto &r : server.request_log())
    if (r.method == "GET" && r.path == "/big.dat" && r.range != "bytes=0-0")
      ++big_gets;
  EXPECT_EQ(big_gets, 4);
  server.stop();
}

TEST(ExecuteTransfer, AllFailuresRaiseBatchError) {
  FixtureDir fx("allfail");
  fx.add_file("present.dat", 100, 60);
  net::FixtureServer server(fx.root);
  server.start();
  DownloadDir dl("allfail");
  std::vector<FileJob> jobs = {
      {server.url() + "/missing1.dat", dl.root / "m1.dat", std::nullopt, ""},
      {server.url() + "/missing2.dat", dl.root / "m2.dat", std::nullopt, ""},
  };
  EXPECT_THROW(execute_transfer(jobs, TransferPlan{2, 1, 4096}), Error);
  EXPECT_THROW(execute_transfer({}, TransferPlan{1, 1, 4096}), Error);
  server.stop();
}

TEST(ExecuteTransfer, BackToBackDispatchHasNoIdleGap) {
  FixtureDir fx("gap");
  for (int i = 0; i < 6; ++i)
    fx.add_file("g" + std::to_string(i) + ".dat", 20000, 70 + i);
  net::FixtureServer server(fx.root);
  server.start();
  DownloadDir dl("gap");

  std::vector<FileJob> jobs;
  for (int i = 0; i < 6; ++i) {
    std::string name = "g" + std::to_string(i) + ".dat";
    jobs.push_back({server.url() + "/" + name, dl.root / name, 20000ULL, ""});
  }
  auto result = execute_transfer(jobs, TransferPlan{1, 1, 8192});
  EXPECT_TRUE(result.failures.empty());

  std::vector<std::pair<double, double>> spans;
  for (const auto &f : result.files) spans.emplace_back(f.start_s, f.end_s);
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    double gap = spans[i].first - spans[i - 1].second;
    EXPECT_GE(gap, -1e-9);
    EXPECT_LE(gap, 0.010); // one scheduler tick
  }
  server.stop();
}

TEST(ExecuteTransfer, EmptyFileAndHeadSizeResolution) {
  FixtureDir fx("empty");
  fx.add_file("zero.dat", 0, 80);
  fx.add_file("sized.dat", 7777, 81);
  net::FixtureServer server(fx.root);
  server.start();
  DownloadDir dl("empty");

  // no expected_bytes: engine must resolve sizes via HEAD
  std::vector<FileJob> jobs = {
      {server.url() + "/zero.dat", dl.root / "zero.dat", std::nullopt,
       fx.digests[0].second},
      {server.url() + "/sized.dat", dl.root / "sized.dat", std::nullopt,
       fx.digests[1].second},
  };
  auto result = execute_transfer(jobs, TransferPlan{2, 4, 2048});
  EXPECT_TRUE(result.failures.empty());
  EXPECT_EQ(std::filesystem::file_size(dl.root / "zero.dat"), 0u);
  EXPECT_EQ(sha256_file(dl.root / "sized.dat"), fx.digests[1].second);
  server.stop();
}
