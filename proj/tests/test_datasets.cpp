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

#include "jouleget/datasets.hpp"
#include "jouleget/digest.hpp"

using namespace jouleget;
using namespace jouleget::data;

TEST(BuiltinSpecs, TableShapes) {
  const auto &specs = builtin_specs();
  ASSERT_EQ(specs.size(), 6u);
  for (const auto &s : specs) s.validate();

  const auto &html = builtin_spec("HTML");
  EXPECT_EQ(html.file_count, 1500u);
  EXPECT_EQ(html.min_bytes, 102 * kKiB);
  EXPECT_EQ(html.max_bytes, 153 * kKiB);
  // average target is 128 KB: the bounds midpoint sits within 1%
  double mid = 0.5 * (html.min_bytes + html.max_bytes);
  EXPECT_NEAR(mid, 128.0 * kKiB, 0.01 * 128.0 * kKiB);

  const auto &three = builtin_spec("3GB");
  EXPECT_EQ(three.file_count, 1u);
  EXPECT_EQ(three.min_bytes, three.max_bytes);
  EXPECT_EQ(three.min_bytes, 3 * kGiB);

  // the published total is about 43.5 GB; the per-dataset figures are
  // rounded, so allow a wide band
  std::uint64_t sum = 0;
  for (const auto &s : specs) sum += s.declared_total_bytes;
  double gib = static_cast<double>(sum) / kGiB;
  EXPECT_NEAR(gib, 43.5, 0.08 * 43.5);
}

TEST(BuiltinSpecs, LookupIsCaseInsensitive) {
  EXPECT_EQ(builtin_spec("html").name, "HTML");
  EXPECT_EQ(builtin_spec("Video").name, "VIDEO");
  EXPECT_THROW(builtin_spec("nope"), Error);
}

TEST(GenerateDataset, DeterministicManifests) {
  const auto &spec = builtin_spec("HTML");
  Manifest a = generate_dataset(spec, 7, 0.05, {}, /*materialize=*/false);
  Manifest b = generate_dataset(spec, 7, 0.05, {}, /*materialize=*/false);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].name, b.entries[i].name);
    EXPECT_EQ(a.entries[i].bytes, b.entries[i].bytes);
    EXPECT_EQ(a.entries[i].digest_hex, b.entries[i].digest_hex);
  }
  // a different seed moves at least the digests
  Manifest c = generate_dataset(spec, 8, 0.05, {}, false);
  EXPECT_NE(a.entries[0].digest_hex, c.entries[0].digest_hex);
}

TEST(GenerateDataset, SizesInScaledBoundsWithExpectedMean) {
  const auto &spec = builtin_spec("HTML");
  Manifest m = generate_dataset(spec, 7, 0.05, {}, false);
  ASSERT_EQ(m.entries.size(), 1500u);
  double sum = 0.0;
  auto lo = static_cast<std::uint64_t>(spec.min_bytes * 0.05);
  auto hi = static_cast<std::uint64_t>(spec.max_bytes * 0.05);
  for (const auto &e : m.entries) {
    EXPECT_GE(e.bytes, lo);
    EXPECT_LE(e.bytes, hi);
    sum += static_cast<double>(e.bytes);
  }
  double mean = sum / m.entries.size();
  EXPECT_NEAR(mean, 0.05 * 128.0 * kKiB, 0.05 * 0.05 * 128.0 * kKiB);
}

TEST(GenerateDataset, VideoAtOneSixtyFourthScale) {
  const auto &spec = builtin_spec("VIDEO");
  Manifest m = generate_dataset(spec, 3, 1.0 / 64.0, {}, false);
  ASSERT_EQ(m.entries.size(), 64u);
  for (const auto &e : m.entries) {
    EXPECT_GE(e.bytes, 160 * kKiB);
    EXPECT_LE(e.bytes, 320 * kKiB);
  }
}

TEST(GenerateDataset, FilesOnDiskMatchManifestDigests) {
  auto dir = std::filesystem::temp_directory_path() / "jouleget_ds_test";
  std::filesystem::remove_all(dir);
  DatasetSpec tiny{"tiny", 12, 2000, 5000, 42000};
  Manifest m = generate_dataset(tiny, 99, 1.0, dir);
  ASSERT_EQ(m.entries.size(), 12u);
  for (const auto &e : m.entries) {
    auto path = dir / e.name;
    ASSERT_TRUE(std::filesystem::exists(path));
    EXPECT_EQ(std::filesystem::file_size(path), e.bytes);
    EXPECT_EQ(sha256_file(path), e.digest_hex);
  }
  // manifest round trip
  Manifest loaded = load_manifest(dir / "manifest.csv");
  ASSERT_EQ(loaded.entries.size(), m.entries.size());
  EXPECT_EQ(loaded.total_bytes(), m.total_bytes());
  EXPECT_EQ(loaded.entries[5].digest_hex, m.entries[5].digest_hex);
  std::filesystem::remove_all(dir);
}

TEST(GenerateDataset, MaterializedAndManifestOnlyAgree) {
  auto dir = std::filesystem::temp_directory_path() / "jouleget_ds_agree";
  std::filesystem::remove_all(dir);
  DatasetSpec tiny{"tiny", 5, 1000, 3000, 10000};
  Manifest on_disk = generate_dataset(tiny, 4, 1.0, dir);
  Manifest dry = generate_dataset(tiny, 4, 1.0, {}, false);
  ASSERT_EQ(on_disk.entries.size(), dry.entries.size());
  for (std::size_t i = 0; i < dry.entries.size(); ++i)
    EXPECT_EQ(on_disk.entries[i].digest_hex, dry.entries[i].digest_hex);
  std::filesystem::remove_all(dir);
}

TEST(GenerateDataset, RejectsBadScale) {
  const auto &spec = builtin_spec("HTML");
  EXPECT_THROW(generate_dataset(spec, 1, 0.0, {}, false), Error);
  EXPECT_THROW(generate_dataset(spec, 1, 1.5, {}, false), Error);
  // scaled minimum below one byte
  EXPECT_THROW(generate_dataset(spec, 1, 1e-9, {}, false), Error);
}

TEST(DatasetSpec, ValidatesDeclaredTotals) {
  DatasetSpec bad{"bad", 10, 1000, 2000, 50000}; // 50 KB >> 10 * 2 KB
  EXPECT_THROW(bad.validate(), Error);
  DatasetSpec good{"good", 10, 1000, 2000, 15000};
  EXPECT_NO_THROW(good.validate());
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(std::string("")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex(std::string("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
