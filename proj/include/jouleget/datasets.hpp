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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "jouleget/digest.hpp"
#include "jouleget/error.hpp"

namespace jouleget::data {

constexpr std::uint64_t kKiB = 1024;
constexpr std::uint64_t kMiB = 1024 * kKiB;
constexpr std::uint64_t kGiB = 1024 * kMiB;

/// Shape of one benchmark dataset: file count and per-file size bounds.
struct DatasetSpec {
  std::string name;
  std::uint64_t file_count;
  std::uint64_t min_bytes;
  std::uint64_t max_bytes;
  std::uint64_t declared_total_bytes;

  void validate() const {
    if (file_count < 1) throw Error("dataset needs at least one file");
    if (min_bytes > max_bytes) throw Error("dataset min size > max size");
    // declared totals are rounded figures; allow 2% slack
    double lo = static_cast<double>(file_count) * min_bytes * 0.98;
    double hi = static_cast<double>(file_count) * max_bytes * 1.02;
    auto d = static_cast<double>(declared_total_bytes);
    if (d < lo || d > hi)
      throw Error("dataset declared total inconsistent with bounds: " + name);
  }
};

/// The six benchmark dataset shapes, from many small HTML pages up to a
/// single 10 GB blob.
inline const std::vector<DatasetSpec> &builtin_specs() {
  static const std::vector<DatasetSpec> specs = {
      {"HTML", 1500, 102 * kKiB, 153 * kKiB, 196 * kMiB},
      {"IMAGE", 200, 524 * kKiB, 786 * kKiB, 128 * kMiB},
      {"VIDEO", 64, 10 * kMiB, 20 * kMiB, 1124 * kMiB},
      {"32GB", 32, 1 * kGiB, 1 * kGiB, 32768 * kMiB},
      {"3GB", 1, 3 * kGiB, 3 * kGiB, 3072 * kMiB},
      {"10GB", 1, 10 * kGiB, 10 * kGiB, 10240 * kMiB},
  };
  return specs;
}

inline const DatasetSpec &builtin_spec(const std::string &name) {
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  std::string want = lower(name);
  for (const auto &spec : builtin_specs())
    if (lower(spec.name) == want) return spec;
  throw Error("unknown dataset: " + name);
}

struct ManifestEntry {
  std::string name;
  std::uint64_t bytes;
  std::string digest_hex;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::uint64_t total_bytes() const {
    std::uint64_t sum = 0;
    for (const auto &e : entries) sum += e.bytes;
    return sum;
  }
};

inline void save_manifest(const Manifest &m,
                          const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest: " + path.string());
  out << "name,bytes,digest\n";
  for (const auto &e : m.entries)
    out << e.name << ',' << e.bytes << ',' << e.digest_hex << '\n';
  if (!out) throw Error("failed writing manifest: " + path.string());
}

inline Manifest load_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("empty manifest: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "name,bytes,digest")
    throw Error("bad manifest header: " + line);
  Manifest m;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 == std::string::npos ? 0 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw Error("bad manifest line: " + line);
    ManifestEntry e;
    e.name = line.substr(0, c1);
    e.bytes = std::stoull(line.substr(c1 + 1, c2 - c1 - 1));
    e.digest_hex = line.substr(c2 + 1);
    m.entries.push_back(std::move(e));
  }
  return m;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded pseudorandom byte stream, fed to the digest and (optionally) the
// file writer in fixed-size blocks. Byte order is pinned so the stream is
// identical on any platform.
template <typename Consume>
inline void fill_random_bytes(std::uint64_t seed, std::uint64_t n_bytes,
                              Consume &&consume) {
  std::mt19937_64 rng(seed);
  std::vector<unsigned char> block(1 << 16);
  std::uint64_t left = n_bytes;
  while (left > 0) {
    std::size_t take = static_cast<std::size_t>(
        std::min<std::uint64_t>(left, block.size()));
    std::size_t i = 0;
    while (i < take) {
      std::uint64_t w = rng();
      for (int b = 0; b < 8 && i < take; ++b, ++i)
        block[i] = static_cast<unsigned char>(w >> (8 * b));
    }
    consume(block.data(), take);
    left -= take;
  }
}

} // namespace detail

/// File sizes the generator would draw for (spec, seed, scale): uniform
/// over the scaled [min, max] interval, deterministic in the seed. The
/// simulator consumes these directly; generate_dataset uses the same draw.
inline std::vector<std::uint64_t> draw_sizes(const DatasetSpec &spec,
                                             std::uint64_t seed,
                                             double scale) {
  spec.validate();
  if (!(scale > 0.0 && scale <= 1.0)) throw Error("scale must be in (0, 1]");
  auto smin = static_cast<std::uint64_t>(
      std::floor(static_cast<double>(spec.min_bytes) * scale));
  auto smax = static_cast<std::uint64_t>(
      std::floor(static_cast<double>(spec.max_bytes) * scale));
  if (smin < 1) throw Error("scale too small: scaled min size is below 1 byte");
  if (smax < smin) smax = smin;
  std::mt19937_64 size_rng(seed);
  std::vector<std::uint64_t> sizes(spec.file_count);
  std::uint64_t span = smax - smin + 1;
  for (auto &s : sizes) s = smin + size_rng() % span;
  return sizes;
}

/// Deterministically generates a dataset: sizes drawn uniformly from the
/// scaled [min, max] interval, contents a seeded pseudorandom stream. The
/// same (spec, seed, scale) always produces bit-identical files and
/// manifest. With materialize=false only the manifest (sizes + digests) is
/// computed and nothing touches disk.
inline Manifest generate_dataset(const DatasetSpec &spec, std::uint64_t seed,
                                 double scale,
                                 const std::filesystem::path &out_dir,
                                 bool materialize = true) {
  std::vector<std::uint64_t> sizes = draw_sizes(spec, seed, scale);
  std::uint64_t total = 0;
  for (auto s : sizes) total += s;

  std::string stem = spec.name;
  std::transform(stem.begin(), stem.end(), stem.begin(),
                 [](unsigned char c) { return std::tolower(c); });

  if (materialize) {
    std::filesystem::create_directories(out_dir);
    std::error_code ec;
    auto info = std::filesystem::space(out_dir, ec);
    if (!ec && info.available < total)
      throw Error("insufficient disk space for dataset: need " +
                  std::to_string(total) + " bytes");
  }

  Manifest manifest;
  manifest.entries.reserve(spec.file_count);
  char idx[32];
  for (std::uint64_t i = 0; i < spec.file_count; ++i) {
    std::snprintf(idx, sizeof(idx), "%06llu",
                  static_cast<unsigned long long>(i));
    ManifestEntry entry;
    entry.name = stem + "_" + idx + ".dat";
    entry.bytes = sizes[i];
    std::uint64_t file_seed =
        detail::splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
    Sha256 digest;
    if (materialize) {
      auto path = out_dir / entry.name;
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot create dataset file: " + path.string());
      detail::fill_random_bytes(
          file_seed, sizes[i], [&](const unsigned char *p, std::size_t n) {
            digest.update(p, n);
            out.write(reinterpret_cast<const char *>(p),
                      static_cast<std::streamsize>(n));
          });
      if (!out)
        throw Error("short write (disk full?) generating: " + path.string());
    } else {
      detail::fill_random_bytes(
          file_seed, sizes[i],
          [&](const unsigned char *p, std::size_t n) { digest.update(p, n); });
    }
    entry.digest_hex = digest.hex();
    manifest.entries.push_back(std::move(entry));
  }

  if (materialize) save_manifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

} // namespace jouleget::data
