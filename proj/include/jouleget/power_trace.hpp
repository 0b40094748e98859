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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "jouleget/error.hpp"

namespace jouleget {

/// One instantaneous power-meter reading.
struct PowerSample {
  double t; ///< seconds since trace start
  double p; ///< watts, >= 0
};

/// An ordered series of power samples with strictly increasing timestamps.
///
/// Traces come either from a meter (CSV file) or from the simulator. The
/// nominal sampling rate is a hint only; analysis works at the native
/// sample spacing.
class PowerTrace {
public:
  PowerTrace() = default;

  /// Takes ownership of `samples`. Timestamps must be strictly increasing
  /// and powers non-negative. If `nominal_rate_hz` <= 0 the rate is
  /// inferred as the reciprocal of the median inter-sample gap.
  explicit PowerTrace(std::vector<PowerSample> samples,
                      double nominal_rate_hz = 0.0)
      : samples_(std::move(samples)), nominal_rate_hz_(nominal_rate_hz) {
    validate();
    if (nominal_rate_hz_ <= 0.0) nominal_rate_hz_ = infer_rate();
  }

  const std::vector<PowerSample> &samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double nominal_rate_hz() const { return nominal_rate_hz_; }

  double t_begin() const {
    if (empty()) throw Error("power trace is empty");
    return samples_.front().t;
  }
  double t_end() const {
    if (empty()) throw Error("power trace is empty");
    return samples_.back().t;
  }
  double span_s() const { return t_end() - t_begin(); }

  /// Linear interpolation of power at time `t`; `t` must lie within the
  /// trace range.
  double power_at(double t) const {
    if (empty()) throw Error("power trace is empty");
    if (t < t_begin() || t > t_end())
      throw Error("time outside trace range");
    auto it = std::lower_bound(
        samples_.begin(), samples_.end(), t,
        [](const PowerSample &s, double v) { return s.t < v; });
    if (it == samples_.end()) return samples_.back().p;
    if (it->t == t || it == samples_.begin()) return it->p;
    auto prev = std::prev(it);
    double frac = (t - prev->t) / (it->t - prev->t);
    return prev->p + frac * (it->p - prev->p);
  }

  /// Reads the canonical trace CSV: header `t_seconds,watts`, one sample
  /// per line, '.' decimal point, strictly increasing first column.
  static PowerTrace load_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trace file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("empty trace file: " + path.string());
    strip_cr(line);
    if (line != "t_seconds,watts")
      throw Error("bad trace header (expected t_seconds,watts): " + line);
    std::vector<PowerSample> samples;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      strip_cr(line);
      if (line.empty()) continue;
      auto comma = line.find(',');
      if (comma == std::string::npos)
        throw Error("trace line " + std::to_string(lineno) + ": missing comma");
      samples.push_back({parse_double(line.substr(0, comma), lineno),
                         parse_double(line.substr(comma + 1), lineno)});
    }
    return PowerTrace(std::move(samples));
  }

  void save_csv(const std::filesystem::path &path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write trace file: " + path.string());
    out << "t_seconds,watts\n";
    char buf[80];
    for (const auto &s : samples_) {
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", s.t, s.p);
      out << buf;
    }
    if (!out) throw Error("failed writing trace file: " + path.string());
  }

private:
  void validate() const {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (samples_[i].p < 0.0)
        throw Error("negative power sample at index " + std::to_string(i));
      if (i > 0 && samples_[i].t <= samples_[i - 1].t)
        throw Error("timestamps not strictly increasing at index " +
                    std::to_string(i));
    }
  }

  double infer_rate() const {
    if (samples_.size() < 2) return 0.0;
    std::vector<double> gaps;
    gaps.reserve(samples_.size() - 1);
    for (std::size_t i = 1; i < samples_.size(); ++i)
      gaps.push_back(samples_[i].t - samples_[i - 1].t);
    auto mid = gaps.begin() + gaps.size() / 2;
    std::nth_element(gaps.begin(), mid, gaps.end());
    double median = *mid;
    if (gaps.size() % 2 == 0) {
      auto lo = std::max_element(gaps.begin(), mid);
      median = 0.5 * (*lo + median);
    }
    return median > 0.0 ? 1.0 / median : 0.0;
  }

  static void strip_cr(std::string &s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  static double parse_double(const std::string &field, std::size_t lineno) {
    double v = 0.0;
    const char *first = field.data();
    const char *last = field.data() + field.size();
    while (first != last && *first == ' ') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
      throw Error("trace line " + std::to_string(lineno) +
                  ": bad number '" + field + "'");
    return v;
  }

  std::vector<PowerSample> samples_;
  double nominal_rate_hz_ = 0.0;
};

/// Half-open-in-spirit transfer interval [t_start, t_end] on the trace
/// timeline.
struct TransferWindow {
  double t_start;
  double t_end;

  TransferWindow(double start, double end) : t_start(start), t_end(end) {
    if (!(t_start < t_end))
      throw Error("transfer window requires t_start < t_end");
  }

  double length_s() const { return t_end - t_start; }
};

/// Energy figures for one transfer. Total splits into base and dynamic
/// parts; the tail is the post-transfer high-power residue and is tracked
/// separately from the in-window split.
struct EnergyReport {
  double e_total_j = 0.0;
  double e_base_j = 0.0;
  double e_dynamic_j = 0.0;
  double e_tail_j = 0.0;
  std::uint64_t bytes_transferred = 0;
  double e_per_100mb_j = 0.0;
};

} // namespace jouleget
