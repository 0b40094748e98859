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
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "jouleget/error.hpp"
#include "jouleget/power_trace.hpp"

namespace jouleget::energy {

namespace detail {

// Trapezoid of raw power over [a, b], edges linearly interpolated.
// Tolerates windows that enclose fewer than two samples (both edges are
// interpolated), which the public integration entry point rejects.
inline double integrate_power_interp(const PowerTrace &trace, double a,
                                     double b) {
  const auto &s = trace.samples();
  double pa = trace.power_at(a);
  double pb = trace.power_at(b);
  auto first = std::lower_bound(
      s.begin(), s.end(), a,
      [](const PowerSample &x, double v) { return x.t < v; });
  double sum = 0.0;
  double prev_t = a, prev_p = pa;
  for (auto it = first; it != s.end() && it->t <= b; ++it) {
    if (it->t <= prev_t) continue;
    sum += 0.5 * (prev_p + it->p) * (it->t - prev_t);
    prev_t = it->t;
    prev_p = it->p;
  }
  if (b > prev_t) sum += 0.5 * (prev_p + pb) * (b - prev_t);
  return sum;
}

inline std::size_t count_samples_in(const PowerTrace &trace, double a,
                                    double b) {
  const auto &s = trace.samples();
  auto first = std::lower_bound(
      s.begin(), s.end(), a,
      [](const PowerSample &x, double v) { return x.t < v; });
  auto last = std::upper_bound(
      s.begin(), s.end(), b,
      [](double v, const PowerSample &x) { return v < x.t; });
  return static_cast<std::size_t>(last - first);
}

inline void require_window_in_trace(const PowerTrace &trace,
                                    const TransferWindow &window) {
  if (trace.size() < 2) throw Error("trace has fewer than 2 samples");
  if (window.t_start < trace.t_begin() || window.t_end > trace.t_end())
    throw Error("window outside trace range");
}

} // namespace detail

/// Median sample power within the window. The median is used instead of
/// the mean so that isolated meter spikes do not drag the estimate.
/// Requires the window to lie within the trace and to enclose at least
/// three samples.
inline double estimate_base_power(const PowerTrace &trace,
                                  const TransferWindow &window) {
  detail::require_window_in_trace(trace, window);
  std::vector<double> powers;
  for (const auto &s : trace.samples())
    if (s.t >= window.t_start && s.t <= window.t_end) powers.push_back(s.p);
  if (powers.size() < 3)
    throw Error("base-power window encloses fewer than 3 samples");
  auto mid = powers.begin() + powers.size() / 2;
  std::nth_element(powers.begin(), mid, powers.end());
  if (powers.size() % 2 == 1) return *mid;
  double hi = *mid;
  double lo = *std::max_element(powers.begin(), mid);
  return 0.5 * (lo + hi);
}

/// Trapezoidal approximation of the integral of (P(t) - base_power) over
/// the window, window edges interpolated linearly. The integrand is not
/// clamped: samples below base power contribute negatively, which keeps
/// the integral additive across adjacent windows and leaves meter noise
/// visible in the result.
inline double integrate_dynamic_energy(const PowerTrace &trace,
                                       double base_power_w,
                                       const TransferWindow &window) {
  if (base_power_w < 0.0) throw Error("base power must be >= 0");
  detail::require_window_in_trace(trace, window);
  if (detail::count_samples_in(trace, window.t_start, window.t_end) < 2)
    throw Error("window encloses fewer than 2 samples");
  double raw =
      detail::integrate_power_interp(trace, window.t_start, window.t_end);
  return raw - base_power_w * window.length_s();
}

/// E_total = E_base + E_dynamic.
inline double total_energy(double e_base_j, double e_dynamic_j) {
  if (e_base_j < 0.0) throw Error("base energy must be >= 0");
  return e_base_j + e_dynamic_j;
}

/// Rescales an energy figure to joules per 100 MB (MB = 10^6 bytes) so
/// transfers of different sizes compare fairly.
inline double normalize_per_100mb(double e_j, std::uint64_t bytes) {
  if (bytes == 0)
    throw Error("cannot normalize energy over zero bytes");
  return e_j * (100.0e6 / static_cast<double>(bytes));
}

struct TailSegment {
  double duration_s = 0.0;
  double energy_j = 0.0;
};

/// Locates and integrates the post-transfer high-power residue.
///
/// The tail starts at `last_byte_t` and ends at the beginning of the first
/// stretch where power stays below base_power + threshold_w continuously
/// for `max_hold_s`. A quiet stretch that runs into the end of the trace
/// also qualifies, so a trace that drops to base right after the last byte
/// yields (0, 0). If power never settles, the tail extends to the trace
/// end. Tail energy is the dynamic-energy integral over the tail interval.
inline TailSegment segment_tail(const PowerTrace &trace, double last_byte_t,
                                double base_power_w, double threshold_w = 0.1,
                                double max_hold_s = 2.0) {
  if (threshold_w <= 0.0) throw Error("tail threshold must be > 0");
  if (trace.size() < 2) throw Error("trace has fewer than 2 samples");
  if (last_byte_t < trace.t_begin() || last_byte_t > trace.t_end())
    throw Error("last-byte time outside trace range");

  const double quiet_below = base_power_w + threshold_w;
  std::optional<double> run_start;
  std::optional<double> tail_end;
  for (const auto &s : trace.samples()) {
    if (s.t < last_byte_t) continue;
    if (s.p < quiet_below) {
      if (!run_start) run_start = std::max(s.t, last_byte_t);
      if (s.t - *run_start >= max_hold_s) {
        tail_end = *run_start;
        break;
      }
    } else {
      run_start.reset();
    }
  }
  if (!tail_end) tail_end = run_start ? *run_start : trace.t_end();

  TailSegment tail;
  tail.duration_s = std::max(0.0, *tail_end - last_byte_t);
  if (tail.duration_s > 0.0) {
    double raw = detail::integrate_power_interp(trace, last_byte_t, *tail_end);
    tail.energy_j = raw - base_power_w * tail.duration_s;
  }
  return tail;
}

/// Finds the transfer window from the power signature alone: t_start is
/// the beginning of the first stretch where power exceeds base + threshold
/// for at least hold_s, t_end the end of the last such stretch. Used when
/// the transfer engine's own clock is not aligned with the meter.
inline TransferWindow detect_transfer_window(const PowerTrace &trace,
                                             double base_power_w,
                                             double threshold_w = 0.1,
                                             double hold_s = 1.0) {
  if (trace.size() < 2) throw Error("trace has fewer than 2 samples");
  if (trace.span_s() < hold_s)
    throw Error("trace shorter than detection hold time");

  const double high_above = base_power_w + threshold_w;
  const auto &s = trace.samples();

  std::optional<double> t_start;
  std::optional<double> run_start;
  for (const auto &x : s) {
    if (x.p > high_above) {
      if (!run_start) run_start = x.t;
      if (x.t - *run_start >= hold_s) {
        t_start = *run_start;
        break;
      }
    } else {
      run_start.reset();
    }
  }

  std::optional<double> t_end;
  std::optional<double> run_end;
  for (auto it = s.rbegin(); it != s.rend(); ++it) {
    if (it->p > high_above) {
      if (!run_end) run_end = it->t;
      if (*run_end - it->t >= hold_s) {
        t_end = *run_end;
        break;
      }
    } else {
      run_end.reset();
    }
  }

  if (!t_start || !t_end || !(*t_start < *t_end))
    throw Error("no activity above base power found in trace");
  return TransferWindow(*t_start, *t_end);
}

struct ReportParams {
  double base_power_w = 0.0;
  std::uint64_t bytes_transferred = 0;
  double tail_threshold_w = 0.1;
  double tail_hold_s = 2.0;
};

/// Assembles the full energy report for one transfer window. E_base is
/// base power times window length; the tail is segmented from the window
/// end and clamped at zero (a noisy tail interval may integrate slightly
/// negative). The per-100MB figure normalizes the transfer-attributable
/// energy, i.e. dynamic plus tail.
inline EnergyReport build_report(const PowerTrace &trace,
                                 const TransferWindow &window,
                                 const ReportParams &params) {
  if (params.bytes_transferred == 0)
    throw Error("report requires bytes_transferred > 0");
  EnergyReport r;
  r.e_base_j = params.base_power_w * window.length_s();
  r.e_dynamic_j = integrate_dynamic_energy(trace, params.base_power_w, window);
  r.e_total_j = total_energy(r.e_base_j, r.e_dynamic_j);
  TailSegment tail =
      segment_tail(trace, window.t_end, params.base_power_w,
                   params.tail_threshold_w, params.tail_hold_s);
  r.e_tail_j = std::max(0.0, tail.energy_j);
  r.bytes_transferred = params.bytes_transferred;
  r.e_per_100mb_j =
      normalize_per_100mb(r.e_dynamic_j + r.e_tail_j, r.bytes_transferred);
  return r;
}

} // namespace jouleget::energy
