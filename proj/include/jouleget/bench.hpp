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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "jouleget/datasets.hpp"
#include "jouleget/energy_accounting.hpp"
#include "jouleget/error.hpp"
#include "jouleget/netsim.hpp"
#include "jouleget/scenario.hpp"
#include "jouleget/transfer_engine.hpp"
#include "jouleget/transfer_plan.hpp"
#include "jouleget/tuner.hpp"

namespace jouleget::bench {

enum class Mode { live, sim };

/// One parameter-sweep request: dataset, plan grid, repetition protocol,
/// and either a simulation scenario or a live server.
struct ExperimentConfig {
  Mode mode = Mode::sim;

  std::string dataset = "HTML";
  double scale = 1.0;
  std::uint64_t seed = 7;

  std::vector<int> cc_levels = {1, 2, 4, 8, 16, 32};
  std::vector<int> p_levels = {1};
  std::vector<std::uint64_t> io_levels = {8192};
  int repetitions = 5;

  // sim mode
  sim::Scenario scenario = sim::sydney_wifi_scenario();

  // live mode
  std::string server_url;                // e.g. http://127.0.0.1:8080
  std::filesystem::path trace_dir;       // empty = throughput only
  std::filesystem::path workdir;         // scratch for downloads
  double cooldown_s = 0.0;               // pause between repetitions

  // trace alignment knobs for live mode
  double base_window_s = 5.0;
  double detect_threshold_w = 0.1;
  double detect_hold_s = 1.0;
  double tail_threshold_w = 0.1;
  double tail_hold_s = 2.0;

  void validate() const {
    if (repetitions < 1) throw Error("repetitions must be >= 1");
    if (cc_levels.empty() || p_levels.empty() || io_levels.empty())
      throw Error("parameter grid must be non-empty");
    if (mode == Mode::live && server_url.empty())
      throw Error("live mode requires a server URL");
  }
};

struct SweepCell {
  int cc = 1;
  int p = 1;
  std::uint64_t io_bytes = 8192;
  double mean_mbps = std::numeric_limits<double>::quiet_NaN();
  double sd_mbps = std::numeric_limits<double>::quiet_NaN();
  double mean_j_per_100mb = std::numeric_limits<double>::quiet_NaN();
  double sd_j = std::numeric_limits<double>::quiet_NaN();
  int runs = 0;
  bool ok = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepCell> cells; // ascending (cc, p, io), each cell once

  bool all_ok() const {
    return std::all_of(cells.begin(), cells.end(),
                       [](const SweepCell &c) { return c.ok; });
  }

  std::vector<tuner::GridPoint> grid_points() const {
    std::vector<tuner::GridPoint> pts;
    for (const auto &c : cells)
      if (c.ok)
        pts.push_back({c.cc, c.p, c.io_bytes, c.mean_mbps,
                       c.mean_j_per_100mb});
    return pts;
  }
};

namespace detail {

struct MeanSd {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
};

inline MeanSd mean_sd(const std::vector<double> &xs) {
  MeanSd r;
  if (xs.empty()) return r;
  bool all_equal = std::all_of(xs.begin(), xs.end(),
                               [&](double x) { return x == xs.front(); });
  if (all_equal) {
    // deterministic repetitions stay exact: no summation round-off
    r.mean = xs.front();
    r.sd = 0.0;
    return r;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / xs.size();
  if (xs.size() < 2) {
    r.sd = 0.0;
    return r;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(ss / (xs.size() - 1));
  return r;
}

inline std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline std::vector<std::uint64_t> sorted_unique(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// GET a small resource (manifest) into a string.
inline std::string http_get_string(const std::string &url) {
  http::Url u = http::parse_url(url);
  http::Socket sock = http::connect_tcp(u.host, u.port);
  http::Response r = http::send_request(sock, "GET", u, std::nullopt, 65536);
  if (r.status != 200)
    throw Error("GET " + url + " returned HTTP " + std::to_string(r.status));
  std::string body = r.body_head;
  auto cl = r.content_length();
  std::vector<char> buf(65536);
  while (!cl || body.size() < *cl) {
    std::size_t n = sock.recv_some(buf.data(), buf.size());
    if (n == 0) break;
    body.append(buf.data(), n);
  }
  if (cl && body.size() < *cl)
    throw Error("short body fetching " + url);
  return body;
}

inline data::Manifest fetch_manifest(const std::string &server_url) {
  std::string body = http_get_string(server_url + "/manifest.csv");
  auto tmp = std::filesystem::temp_directory_path() /
             ("jouleget_manifest_" + std::to_string(::getpid()) + ".csv");
  std::ofstream out(tmp, std::ios::binary);
  out << body;
  out.close();
  data::Manifest m = data::load_manifest(tmp);
  std::filesystem::remove(tmp);
  return m;
}

inline std::string trace_file_name(int cc, int p, std::uint64_t io, int rep) {
  std::ostringstream os;
  os << "trace_cc" << cc << "_p" << p << "_io" << io << "_rep" << rep
     << ".csv";
  return os.str();
}

} // namespace detail

/// Runs the full parameter grid with the repetition protocol: every cell
/// executes `repetitions` runs and records mean and sample standard
/// deviation of throughput and energy per 100 MB. Sim cells are
/// deterministic, so their deviations are exactly zero. A failing cell is
/// recorded and the sweep continues; only configuration errors throw.
inline SweepResult run_experiment(const ExperimentConfig &config) {
  config.validate();
  const auto &spec = data::builtin_spec(config.dataset);

  SweepResult result;
  auto cc_levels = detail::sorted_unique(config.cc_levels);
  auto p_levels = detail::sorted_unique(config.p_levels);
  auto io_levels = detail::sorted_unique(config.io_levels);

  // sim mode needs only the file sizes; live mode needs the server's
  // manifest to know what to fetch
  std::vector<std::uint64_t> sim_sizes;
  data::Manifest live_manifest;
  if (config.mode == Mode::sim) {
    sim_sizes = data::draw_sizes(spec, config.seed, config.scale);
  } else {
    live_manifest = detail::fetch_manifest(config.server_url);
    if (live_manifest.entries.empty())
      throw Error("server manifest lists no files");
  }

  std::filesystem::path workdir = config.workdir;
  if (config.mode == Mode::live) {
    if (workdir.empty())
      workdir = std::filesystem::temp_directory_path() / "jouleget_live";
    std::filesystem::create_directories(workdir);
  }

  for (int cc : cc_levels) {
    for (int p : p_levels) {
      for (std::uint64_t io : io_levels) {
        SweepCell cell;
        cell.cc = cc;
        cell.p = p;
        cell.io_bytes = io;
        TransferPlan plan{cc, p, io};
        std::vector<double> mbps, joules;
        try {
          for (int rep = 0; rep < config.repetitions; ++rep) {
            if (rep > 0 && config.cooldown_s > 0.0)
              std::this_thread::sleep_for(
                  std::chrono::duration<double>(config.cooldown_s));
            if (config.mode == Mode::sim) {
              sim::SimOptions opts;
              opts.trace_rate_hz = config.scenario.trace_rate_hz;
              sim::SimResult r = sim::simulate_transfer(
                  plan, sim_sizes, config.scenario.network,
                  config.scenario.power, opts);
              mbps.push_back(r.avg_throughput_mbps);
              joules.push_back(r.report.e_per_100mb_j);
            } else {
              std::vector<engine::FileJob> jobs;
              auto rep_dir = workdir / ("run_cc" + std::to_string(cc) + "_p" +
                                        std::to_string(p) + "_io" +
                                        std::to_string(io) + "_r" +
                                        std::to_string(rep));
              std::filesystem::create_directories(rep_dir);
              for (const auto &e : live_manifest.entries)
                jobs.push_back({config.server_url + "/" + e.name,
                                rep_dir / e.name, e.bytes, e.digest_hex});
              engine::TransferResult tr =
                  engine::execute_transfer(jobs, plan);
              if (!tr.failures.empty())
                throw Error(std::to_string(tr.failures.size()) +
                            " file(s) failed: " + tr.failures.front());
              mbps.push_back(tr.avg_throughput_mbps);
              if (!config.trace_dir.empty()) {
                auto trace_path =
                    config.trace_dir /
                    detail::trace_file_name(cc, p, io, rep);
                if (!std::filesystem::exists(trace_path))
                  throw Error("missing trace file: " + trace_path.string());
                PowerTrace trace = PowerTrace::load_csv(trace_path);
                double base_end = std::min(
                    trace.t_begin() + config.base_window_s, trace.t_end());
                double base = energy::estimate_base_power(
                    trace, TransferWindow(trace.t_begin(), base_end));
                TransferWindow window = energy::detect_transfer_window(
                    trace, base, config.detect_threshold_w,
                    config.detect_hold_s);
                energy::ReportParams params;
                params.base_power_w = base;
                params.bytes_transferred = tr.total_bytes;
                params.tail_threshold_w = config.tail_threshold_w;
                params.tail_hold_s = config.tail_hold_s;
                EnergyReport report =
                    energy::build_report(trace, window, params);
                joules.push_back(report.e_per_100mb_j);
              }
              std::filesystem::remove_all(rep_dir);
            }
          }
          auto th = detail::mean_sd(mbps);
          cell.mean_mbps = th.mean;
          cell.sd_mbps = th.sd;
          auto en = detail::mean_sd(joules);
          cell.mean_j_per_100mb = en.mean;
          cell.sd_j = en.sd;
          cell.runs = static_cast<int>(mbps.size());
          cell.ok = true;
        } catch (const std::exception &e) {
          cell.ok = false;
          cell.error = e.what();
          cell.runs = 0;
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

enum class ReportFormat { csv, json };

namespace detail {

inline std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

} // namespace detail

/// Writes the sweep in the canonical report schema. CSV columns are
/// exactly cc,p,io_bytes,mean_mbps,sd_mbps,mean_j_per_100mb,sd_j,runs in
/// ascending (cc, p, io) order; JSON mirrors the same fields. Identical
/// results serialize byte-identically.
inline void emit_report(const SweepResult &result,
                        const std::filesystem::path &path,
                        ReportFormat format) {
  if (result.cells.empty()) throw Error("refusing to emit empty sweep");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write report: " + path.string());
  if (format == ReportFormat::csv) {
    out << "cc,p,io_bytes,mean_mbps,sd_mbps,mean_j_per_100mb,sd_j,runs\n";
    for (const auto &c : result.cells) {
      out << c.cc << ',' << c.p << ',' << c.io_bytes << ','
          << detail::num(c.mean_mbps) << ',' << detail::num(c.sd_mbps) << ','
          << detail::num(c.mean_j_per_100mb) << ',' << detail::num(c.sd_j)
          << ',' << c.runs << '\n';
    }
  } else {
    nlohmann::json j = nlohmann::json::array();
    for (const auto &c : result.cells) {
      nlohmann::json cell;
      cell["cc"] = c.cc;
      cell["p"] = c.p;
      cell["io_bytes"] = c.io_bytes;
      cell["mean_mbps"] = c.mean_mbps;
      cell["sd_mbps"] = c.sd_mbps;
      cell["mean_j_per_100mb"] = c.mean_j_per_100mb;
      cell["sd_j"] = c.sd_j;
      cell["runs"] = c.runs;
      j.push_back(std::move(cell));
    }
    out << j.dump(2) << '\n';
  }
  if (!out) throw Error("failed writing report: " + path.string());
}

/// Parses a CSV report back into a SweepResult (the inverse of
/// emit_report for the csv format).
inline SweepResult parse_report_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("empty report: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "cc,p,io_bytes,mean_mbps,sd_mbps,mean_j_per_100mb,sd_j,runs")
    throw Error("unexpected report header: " + line);
  SweepResult result;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8)
      throw Error("bad report row (need 8 fields): " + line);
    SweepCell c;
    c.cc = std::stoi(fields[0]);
    c.p = std::stoi(fields[1]);
    c.io_bytes = std::stoull(fields[2]);
    c.mean_mbps = std::stod(fields[3]);
    c.sd_mbps = std::stod(fields[4]);
    c.mean_j_per_100mb = std::stod(fields[5]);
    c.sd_j = std::stod(fields[6]);
    c.runs = std::stoi(fields[7]);
    c.ok = c.runs > 0;
    result.cells.push_back(std::move(c));
  }
  return result;
}

enum class FigureKind {
  throughput_vs_cc,
  energy_vs_cc,
  throughput_vs_p,
  energy_vs_p,
  surface_cc_p,
};

inline FigureKind figure_kind_from_string(const std::string &s) {
  if (s == "throughput_vs_cc") return FigureKind::throughput_vs_cc;
  if (s == "energy_vs_cc") return FigureKind::energy_vs_cc;
  if (s == "throughput_vs_p") return FigureKind::throughput_vs_p;
  if (s == "energy_vs_p") return FigureKind::energy_vs_p;
  if (s == "surface_cc_p") return FigureKind::surface_cc_p;
  throw Error("unknown figure kind: " + s);
}

/// Writes gnuplot-style plot data for one figure. Curves along one
/// parameter hold the other parameters at their lowest swept level; a
/// figure whose axis has fewer than two levels in the sweep is an error.
inline void emit_plot_data(const SweepResult &result, FigureKind kind,
                           const std::filesystem::path &path) {
  if (result.cells.empty()) throw Error("empty sweep, nothing to plot");
  auto ok_cells = result.cells;
  ok_cells.erase(std::remove_if(ok_cells.begin(), ok_cells.end(),
                                [](const SweepCell &c) { return !c.ok; }),
                 ok_cells.end());
  if (ok_cells.empty()) throw Error("no successful cells to plot");

  int min_cc = ok_cells.front().cc, min_p = ok_cells.front().p;
  std::uint64_t min_io = ok_cells.front().io_bytes;
  for (const auto &c : ok_cells) {
    min_cc = std::min(min_cc, c.cc);
    min_p = std::min(min_p, c.p);
    min_io = std::min(min_io, c.io_bytes);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write plot data: " + path.string());

  auto curve = [&](bool along_cc, bool energy) {
    std::vector<const SweepCell *> rows;
    for (const auto &c : ok_cells) {
      if (along_cc && c.p == min_p && c.io_bytes == min_io)
        rows.push_back(&c);
      if (!along_cc && c.cc == min_cc && c.io_bytes == min_io)
        rows.push_back(&c);
    }
    std::set<int> levels;
    for (auto *c : rows) levels.insert(along_cc ? c->cc : c->p);
    if (levels.size() < 2)
      throw Error("sweep does not vary the requested axis");
    out << "# " << (along_cc ? "cc" : "p") << ' '
        << (energy ? "mean_j_per_100mb sd_j (joules per 100 MB)"
                   : "mean_mbps sd_mbps (Mbps)")
        << '\n';
    for (auto *c : rows) {
      out << (along_cc ? c->cc : c->p) << ' '
          << detail::num(energy ? c->mean_j_per_100mb : c->mean_mbps) << ' '
          << detail::num(energy ? c->sd_j : c->sd_mbps) << '\n';
    }
  };

  switch (kind) {
    case FigureKind::throughput_vs_cc:
      curve(true, false);
      break;
    case FigureKind::energy_vs_cc:
      curve(true, true);
      break;
    case FigureKind::throughput_vs_p:
      curve(false, false);
      break;
    case FigureKind::energy_vs_p:
      curve(false, true);
      break;
    case FigureKind::surface_cc_p: {
      std::set<int> ccs, ps;
      for (const auto &c : ok_cells)
        if (c.io_bytes == min_io) {
          ccs.insert(c.cc);
          ps.insert(c.p);
        }
      if (ccs.size() < 2 || ps.size() < 2)
        throw Error("sweep does not span a cc x p surface");
      out << "# cc p mean_mbps mean_j_per_100mb\n";
      bool first_block = true;
      for (int cc : ccs) {
        if (!first_block) out << '\n'; // gnuplot grid separator
        first_block = false;
        for (int p : ps) {
          for (const auto &c : ok_cells)
            if (c.cc == cc && c.p == p && c.io_bytes == min_io)
              out << c.cc << ' ' << c.p << ' ' << detail::num(c.mean_mbps)
                  << ' ' << detail::num(c.mean_j_per_100mb) << '\n';
        }
      }
      break;
    }
  }
  if (!out) throw Error("failed writing plot data: " + path.string());
}

} // namespace jouleget::bench
