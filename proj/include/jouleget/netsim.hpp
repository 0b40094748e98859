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
#include <deque>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "jouleget/energy_accounting.hpp"
#include "jouleget/error.hpp"
#include "jouleget/power_trace.hpp"
#include "jouleget/transfer_plan.hpp"

namespace jouleget::sim {

/// Shared-link parameters of the simulated path. The model is fluid: per
/// stream rate is the minimum of the TCP window limit (buffer/RTT), the
/// fair share of link capacity, and the client-side I/O drain cap.
struct NetworkConfig {
  double link_capacity_mbps = 100.0;
  double rtt_s = 0.05;
  double tcp_buffer_bytes = 4.0e6;
  /// RTTs charged per file/chunk request before payload flows
  /// (connection + request round trips).
  double per_request_setup_rtts = 2.0;
  /// Client-side drain cap vs I/O request size: (io_bytes, mbps) points,
  /// interpolated linearly and clamped at the ends. Empty table = no cap.
  std::vector<std::pair<double, double>> io_drain_table;

  double bdp_bytes() const { return link_capacity_mbps * 1e6 / 8.0 * rtt_s; }

  double window_limit_mbps() const {
    return tcp_buffer_bytes * 8.0 / (rtt_s * 1e6);
  }

  double io_drain_mbps(double io_bytes) const {
    if (io_drain_table.empty())
      return std::numeric_limits<double>::infinity();
    if (io_bytes <= io_drain_table.front().first)
      return io_drain_table.front().second;
    for (std::size_t i = 1; i < io_drain_table.size(); ++i) {
      if (io_bytes <= io_drain_table[i].first) {
        const auto &[x0, y0] = io_drain_table[i - 1];
        const auto &[x1, y1] = io_drain_table[i];
        return y0 + (y1 - y0) * (io_bytes - x0) / (x1 - x0);
      }
    }
    return io_drain_table.back().second;
  }

  void validate() const {
    if (link_capacity_mbps <= 0.0) throw Error("link capacity must be > 0");
    if (rtt_s <= 0.0) throw Error("rtt must be > 0");
    if (tcp_buffer_bytes <= 0.0) throw Error("tcp buffer must be > 0");
    if (per_request_setup_rtts < 0.0)
      throw Error("per-request setup rtts must be >= 0");
    for (std::size_t i = 1; i < io_drain_table.size(); ++i)
      if (io_drain_table[i].first <= io_drain_table[i - 1].first)
        throw Error("io drain table not sorted by io size");
  }
};

enum class RadioKind { wifi, lte };

/// Additive device power model: base draw, a radio-active term while any
/// stream is open, a per-open-connection term, and a fixed high-power tail
/// held after the last byte.
struct DevicePowerModel {
  double p_base_w = 1.0;
  double p_radio_active_w = 0.7;
  double p_per_connection_w = 0.02;
  double tail_power_w = 0.6;
  double tail_duration_s = 0.24;
  RadioKind radio_kind = RadioKind::wifi;

  void validate() const {
    if (p_base_w < 0.0 || p_radio_active_w < 0.0 ||
        p_per_connection_w < 0.0 || tail_power_w < 0.0)
      throw Error("power model fields must be >= 0");
    if (tail_duration_s < 0.0) throw Error("tail duration must be >= 0");
  }
};

/// Wi-Fi radio defaults: short, mild tail. Calibration knobs, not
/// measurements; override via scenario files.
inline DevicePowerModel wifi_power_profile() {
  DevicePowerModel m;
  m.p_base_w = 1.0;
  m.p_radio_active_w = 0.7;
  m.p_per_connection_w = 0.02;
  m.tail_power_w = 0.6;
  m.tail_duration_s = 0.24;
  m.radio_kind = RadioKind::wifi;
  return m;
}

/// LTE radio defaults: hotter active state and a much longer tail than
/// Wi-Fi, which is what makes tail amortization matter on cellular.
inline DevicePowerModel lte_power_profile() {
  DevicePowerModel m;
  m.p_base_w = 1.0;
  m.p_radio_active_w = 1.2;
  m.p_per_connection_w = 0.03;
  m.tail_power_w = 1.1;
  m.tail_duration_s = 11.5;
  m.radio_kind = RadioKind::lte;
  return m;
}

enum class SimEventKind {
  file_start,
  chunk_open,    // connection opened, request setup begins
  chunk_active,  // setup done, payload flowing
  chunk_done,    // connection closed
  file_done,
  file_skipped_empty,
  last_byte,
};

struct SimEvent {
  double t = 0.0;
  SimEventKind kind = SimEventKind::file_start;
  int file = -1;
  int chunk = -1;
};

struct SimResult {
  double duration_s = 0.0;
  double avg_throughput_mbps = 0.0;
  std::uint64_t total_bytes = 0;
  PowerTrace trace;
  EnergyReport report;
  std::vector<SimEvent> events;
};

/// Steady-state rate of one stream when n_active streams share the link:
/// min(window limit, fair share).
inline double per_stream_throughput(const NetworkConfig &config,
                                    int n_active) {
  if (n_active < 1) throw Error("n_active must be >= 1");
  config.validate();
  return std::min(config.window_limit_mbps(),
                  config.link_capacity_mbps / n_active);
}

struct SimOptions {
  double trace_rate_hz = 20.0;
  /// Flat base-power padding appended after the tail so detection and
  /// segmentation see the settle.
  double trace_pad_s = 1.0;
};

namespace detail {

// Piecewise-constant power level while transferring.
inline double open_power(const DevicePowerModel &power, int n_open) {
  return power.p_base_w + (n_open > 0 ? power.p_radio_active_w : 0.0) +
         power.p_per_connection_w * n_open;
}

struct PowerSegment {
  double t0, t1, p;
};

// Turns the event list into constant-power segments over [0, last_byte],
// then the tail plateau, then base padding.
inline std::vector<PowerSegment> power_segments(
    const std::vector<SimEvent> &events, const DevicePowerModel &power,
    double pad_s) {
  double last_byte_t = 0.0;
  double last_event_t = 0.0;
  for (const auto &e : events) {
    last_event_t = std::max(last_event_t, e.t);
    if (e.kind == SimEventKind::last_byte)
      last_byte_t = std::max(last_byte_t, e.t);
  }
  if (last_byte_t == 0.0) last_byte_t = last_event_t;

  std::vector<PowerSegment> segs;
  double t = 0.0;
  int n_open = 0;
  for (const auto &e : events) {
    if (e.t > last_byte_t) break;
    if (e.kind != SimEventKind::chunk_open &&
        e.kind != SimEventKind::chunk_done)
      continue;
    if (e.t > t) {
      segs.push_back({t, e.t, open_power(power, n_open)});
      t = e.t;
    }
    n_open += (e.kind == SimEventKind::chunk_open) ? 1 : -1;
  }
  if (last_byte_t > t)
    segs.push_back({t, last_byte_t, open_power(power, n_open)});

  if (power.tail_duration_s > 0.0)
    segs.push_back({last_byte_t, last_byte_t + power.tail_duration_s,
                    power.p_base_w + power.tail_power_w});
  double tail_end = last_byte_t + power.tail_duration_s;
  segs.push_back({tail_end, tail_end + std::max(pad_s, 1e-3),
                  power.p_base_w});

  // merge zero-length and equal-power neighbours
  std::vector<PowerSegment> merged;
  for (const auto &s : segs) {
    if (s.t1 <= s.t0) continue;
    if (!merged.empty() && merged.back().p == s.p &&
        merged.back().t1 == s.t0) {
      merged.back().t1 = s.t1;
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

inline double segments_dynamic_energy(const std::vector<PowerSegment> &segs,
                                      double base_w, double t_limit) {
  double e = 0.0;
  for (const auto &s : segs) {
    double t1 = std::min(s.t1, t_limit);
    if (t1 <= s.t0) break;
    e += (s.p - base_w) * (t1 - s.t0);
  }
  return e;
}

} // namespace detail

/// Renders the event list into a sampled power trace. The trace is the
/// piecewise-constant device power sampled on a regular grid, with an
/// extra sample pair straddling every power step so that trapezoidal
/// integration of the trace reproduces the exact segment energies. An
/// empty event list with idle_span_s > 0 yields a flat base trace.
inline PowerTrace synthesize_trace(const std::vector<SimEvent> &events,
                                   const DevicePowerModel &power,
                                   double rate_hz, double idle_span_s = 0.0) {
  if (rate_hz <= 0.0) throw Error("trace rate must be > 0");
  power.validate();

  std::vector<PowerSample> samples;
  const double dt = 1.0 / rate_hz;

  if (events.empty()) {
    if (idle_span_s <= 0.0)
      throw Error("no events and no idle span to synthesize");
    for (double t = 0.0; t <= idle_span_s + 1e-12; t += dt)
      samples.push_back({t, power.p_base_w});
    return PowerTrace(std::move(samples), rate_hz);
  }

  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].t < events[i - 1].t - 1e-12)
      throw Error("events not time-ordered");

  auto segs = detail::power_segments(events, power, 1.0);
  const double delta = std::min(1e-6, dt / 64.0);
  double last_t = -1.0;
  auto push = [&](double t, double p) {
    if (t > last_t + delta / 8.0) {
      samples.push_back({t, p});
      last_t = t;
    }
  };
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto &s = segs[i];
    push(s.t0, s.p);
    long k = static_cast<long>(std::ceil((s.t0 + delta) / dt));
    for (double t = k * dt; t < s.t1 - 1.5 * delta; t += dt) push(t, s.p);
    bool is_last = (i + 1 == segs.size());
    if (is_last) {
      push(s.t1, s.p);
    } else if (s.t1 - s.t0 > 3.0 * delta) {
      push(s.t1 - delta, s.p); // pre-step sample keeps the step sharp
    }
  }
  return PowerTrace(std::move(samples), rate_hz);
}

/// Event-driven fluid simulation of one batch transfer.
///
/// At most plan.concurrency files are in flight; each is split into
/// plan.parallelism byte-range chunks, one stream per chunk. Every chunk
/// pays per_request_setup_rtts * rtt of setup before payload flows. All
/// payload-carrying streams share the link equally at
/// per_stream_throughput(config, n_active), further capped by the I/O
/// drain rate for plan.io_request_bytes. A completing file's slot is
/// refilled at the same instant (back-to-back dispatch), so the whole
/// batch pays for exactly one radio tail. Identical inputs produce
/// bit-identical results.
inline SimResult simulate_transfer(const TransferPlan &plan,
                                   const std::vector<std::uint64_t> &file_bytes,
                                   const NetworkConfig &config,
                                   const DevicePowerModel &power,
                                   const SimOptions &options = {}) {
  plan.validate();
  config.validate();
  power.validate();
  if (file_bytes.empty()) throw Error("simulate_transfer: no files");

  struct Stream {
    int file;
    int chunk;
    double remaining;
    bool active;
    double setup_done_t;
  };

  const double setup_s = config.per_request_setup_rtts * config.rtt_s;
  const double drain_mbps =
      config.io_drain_mbps(static_cast<double>(plan.io_request_bytes));

  SimResult result;
  std::vector<SimEvent> &events = result.events;
  std::vector<Stream> streams;
  std::vector<int> chunks_left(file_bytes.size(), 0);
  std::deque<int> pending;
  for (std::size_t i = 0; i < file_bytes.size(); ++i)
    pending.push_back(static_cast<int>(i));

  double t = 0.0;
  int in_flight = 0;
  std::uint64_t total_bytes = 0;

  auto admit = [&]() {
    while (in_flight < plan.concurrency && !pending.empty()) {
      int f = pending.front();
      pending.pop_front();
      if (file_bytes[f] == 0) {
        events.push_back({t, SimEventKind::file_skipped_empty, f, -1});
        continue;
      }
      events.push_back({t, SimEventKind::file_start, f, -1});
      auto ranges = plan_chunks(file_bytes[f], plan.parallelism);
      chunks_left[f] = static_cast<int>(ranges.size());
      for (std::size_t c = 0; c < ranges.size(); ++c) {
        events.push_back({t, SimEventKind::chunk_open, f,
                          static_cast<int>(c)});
        Stream s{f, static_cast<int>(c),
                 static_cast<double>(ranges[c].length()), false,
                 t + setup_s};
        if (setup_s <= 0.0) {
          s.active = true;
          events.push_back({t, SimEventKind::chunk_active, f,
                            static_cast<int>(c)});
        }
        streams.push_back(s);
      }
      ++in_flight;
      total_bytes += file_bytes[f];
    }
  };

  admit();

  const double kDoneEps = 1e-6; // bytes
  bool any_data = false;
  while (!streams.empty()) {
    int n_active = 0;
    for (const auto &s : streams) n_active += s.active ? 1 : 0;

    double rate_bps = 0.0;
    double dt_next = std::numeric_limits<double>::infinity();
    if (n_active > 0) {
      double per_mbps =
          std::min(per_stream_throughput(config, n_active), drain_mbps);
      rate_bps = per_mbps * 1e6 / 8.0;
      for (const auto &s : streams)
        if (s.active) dt_next = std::min(dt_next, s.remaining / rate_bps);
    }
    for (const auto &s : streams)
      if (!s.active) dt_next = std::min(dt_next, s.setup_done_t - t);
    dt_next = std::max(dt_next, 0.0);

    t += dt_next;
    if (rate_bps > 0.0) {
      for (auto &s : streams)
        if (s.active) s.remaining -= rate_bps * dt_next;
      any_data = true;
    }

    // setup completions first, then chunk completions, then refills
    for (auto &s : streams) {
      if (!s.active && s.setup_done_t <= t + 1e-12) {
        s.active = true;
        events.push_back({t, SimEventKind::chunk_active, s.file, s.chunk});
      }
    }
    std::vector<int> done_files;
    for (std::size_t i = 0; i < streams.size();) {
      if (streams[i].active && streams[i].remaining <= kDoneEps) {
        events.push_back(
            {t, SimEventKind::chunk_done, streams[i].file, streams[i].chunk});
        if (--chunks_left[streams[i].file] == 0)
          done_files.push_back(streams[i].file);
        streams[i] = streams.back();
        streams.pop_back();
      } else {
        ++i;
      }
    }
    std::sort(done_files.begin(), done_files.end());
    for (int f : done_files) {
      events.push_back({t, SimEventKind::file_done, f, -1});
      --in_flight;
    }
    if (!done_files.empty() || streams.empty()) admit();
  }

  result.duration_s = t;
  result.total_bytes = total_bytes;

  if (!any_data) {
    // every file was empty: nothing flowed, no radio tail to pay
    result.trace =
        synthesize_trace({}, power, options.trace_rate_hz, 1.0);
    result.report.bytes_transferred = 0;
    result.report.e_per_100mb_j = std::numeric_limits<double>::quiet_NaN();
    return result;
  }

  events.push_back({t, SimEventKind::last_byte, -1, -1});
  result.avg_throughput_mbps =
      static_cast<double>(total_bytes) * 8.0 / t / 1e6;
  result.trace = synthesize_trace(events, power, options.trace_rate_hz);

  // Energy report from the exact segment areas, not the sampled trace.
  auto segs = detail::power_segments(events, power, options.trace_pad_s);
  EnergyReport rep;
  rep.e_base_j = power.p_base_w * result.duration_s;
  rep.e_dynamic_j = detail::segments_dynamic_energy(segs, power.p_base_w,
                                                    result.duration_s);
  rep.e_total_j = rep.e_base_j + rep.e_dynamic_j;
  rep.e_tail_j = power.tail_power_w * power.tail_duration_s;
  rep.bytes_transferred = total_bytes;
  rep.e_per_100mb_j = energy::normalize_per_100mb(
      rep.e_dynamic_j + rep.e_tail_j, total_bytes);
  result.report = rep;
  return result;
}

} // namespace jouleget::sim
