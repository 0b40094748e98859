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

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "jouleget/error.hpp"
#include "jouleget/netsim.hpp"
#include "jouleget/transfer_plan.hpp"

namespace jouleget::sim {

/// A complete simulation setup: link, device power, default plan, and the
/// dataset it runs against. Serialized as a human-editable JSON tree.
struct Scenario {
  std::string name = "custom";
  NetworkConfig network;
  DevicePowerModel power;
  TransferPlan plan;
  std::string dataset = "HTML";
  double scale = 1.0;
  std::uint64_t seed = 7;
  double trace_rate_hz = 20.0;
};

/// Long-RTT Wi-Fi path calibrated to reproduce the qualitative
/// concurrency/parallelism trade-off shapes: a 290 ms round trip, a
/// per-stream TCP window well below the link capacity, and two setup RTTs
/// per request. Power constants are plausible handset figures, not
/// measurements.
inline Scenario sydney_wifi_scenario() {
  Scenario s;
  s.name = "sydney-wifi";
  s.network.link_capacity_mbps = 140.0;
  s.network.rtt_s = 0.29;
  s.network.tcp_buffer_bytes = 1123750.0; // 31 Mbps per-stream window
  s.network.per_request_setup_rtts = 2.0;
  s.network.io_drain_table = {{1024, 14.0},  {2048, 20.0},  {4096, 27.0},
                              {8192, 33.0},  {16384, 35.0}, {65536, 35.0}};
  s.power = wifi_power_profile();
  return s;
}

/// Same path over a cellular radio: slightly lower achievable throughput,
/// hotter active power, and the long post-transfer tail.
inline Scenario sydney_lte_scenario() {
  Scenario s = sydney_wifi_scenario();
  s.name = "sydney-lte";
  s.network.link_capacity_mbps = 120.0;
  s.power = lte_power_profile();
  return s;
}

inline Scenario builtin_scenario(const std::string &name) {
  if (name == "sydney-wifi") return sydney_wifi_scenario();
  if (name == "sydney-lte") return sydney_lte_scenario();
  throw Error("unknown builtin scenario: " + name);
}

inline nlohmann::json scenario_to_json(const Scenario &s) {
  nlohmann::json j;
  j["name"] = s.name;
  auto &net = j["network"];
  net["link_capacity_mbps"] = s.network.link_capacity_mbps;
  net["rtt_s"] = s.network.rtt_s;
  net["tcp_buffer_bytes"] = s.network.tcp_buffer_bytes;
  net["per_request_setup_rtts"] = s.network.per_request_setup_rtts;
  net["io_drain_table"] = s.network.io_drain_table;
  auto &pw = j["power"];
  pw["p_base_w"] = s.power.p_base_w;
  pw["p_radio_active_w"] = s.power.p_radio_active_w;
  pw["p_per_connection_w"] = s.power.p_per_connection_w;
  pw["tail_power_w"] = s.power.tail_power_w;
  pw["tail_duration_s"] = s.power.tail_duration_s;
  pw["radio_kind"] = s.power.radio_kind == RadioKind::lte ? "lte" : "wifi";
  auto &plan = j["plan"];
  plan["concurrency"] = s.plan.concurrency;
  plan["parallelism"] = s.plan.parallelism;
  plan["io_request_bytes"] = s.plan.io_request_bytes;
  auto &ds = j["dataset"];
  ds["name"] = s.dataset;
  ds["scale"] = s.scale;
  ds["seed"] = s.seed;
  j["trace_rate_hz"] = s.trace_rate_hz;
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json &j) {
  Scenario s;
  try {
    s.name = j.value("name", std::string("custom"));
    if (j.contains("network")) {
      const auto &net = j.at("network");
      s.network.link_capacity_mbps =
          net.value("link_capacity_mbps", s.network.link_capacity_mbps);
      s.network.rtt_s = net.value("rtt_s", s.network.rtt_s);
      s.network.tcp_buffer_bytes =
          net.value("tcp_buffer_bytes", s.network.tcp_buffer_bytes);
      s.network.per_request_setup_rtts = net.value(
          "per_request_setup_rtts", s.network.per_request_setup_rtts);
      if (net.contains("io_drain_table"))
        s.network.io_drain_table =
            net.at("io_drain_table")
                .get<std::vector<std::pair<double, double>>>();
    }
    if (j.contains("power")) {
      const auto &pw = j.at("power");
      s.power.p_base_w = pw.value("p_base_w", s.power.p_base_w);
      s.power.p_radio_active_w =
          pw.value("p_radio_active_w", s.power.p_radio_active_w);
      s.power.p_per_connection_w =
          pw.value("p_per_connection_w", s.power.p_per_connection_w);
      s.power.tail_power_w = pw.value("tail_power_w", s.power.tail_power_w);
      s.power.tail_duration_s =
          pw.value("tail_duration_s", s.power.tail_duration_s);
      std::string kind = pw.value("radio_kind", std::string("wifi"));
      if (kind == "lte")
        s.power.radio_kind = RadioKind::lte;
      else if (kind == "wifi")
        s.power.radio_kind = RadioKind::wifi;
      else
        throw Error("unknown radio_kind: " + kind);
    }
    if (j.contains("plan")) {
      const auto &plan = j.at("plan");
      s.plan.concurrency = plan.value("concurrency", s.plan.concurrency);
      s.plan.parallelism = plan.value("parallelism", s.plan.parallelism);
      s.plan.io_request_bytes =
          plan.value("io_request_bytes", s.plan.io_request_bytes);
    }
    if (j.contains("dataset")) {
      const auto &ds = j.at("dataset");
      s.dataset = ds.value("name", s.dataset);
      s.scale = ds.value("scale", s.scale);
      s.seed = ds.value("seed", s.seed);
    }
    s.trace_rate_hz = j.value("trace_rate_hz", s.trace_rate_hz);
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("bad scenario file: ") + e.what());
  }
  s.network.validate();
  s.power.validate();
  s.plan.validate();
  return s;
}

inline Scenario load_scenario(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("bad scenario JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario(const Scenario &s,
                          const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write scenario file: " + path.string());
  out << scenario_to_json(s).dump(2) << '\n';
}

} // namespace jouleget::sim
