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

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "jouleget/jouleget.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;
void handle_sigint(int) { g_stop = 1; }

std::vector<int> parse_int_list(const std::string &s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  if (out.empty()) throw jouleget::Error("empty list: " + s);
  return out;
}

std::vector<std::uint64_t> parse_size_list(const std::string &s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::uint64_t mult = 1;
    if (item.back() == 'k' || item.back() == 'K') {
      mult = 1024;
      item.pop_back();
    }
    out.push_back(std::stoull(item) * mult);
  }
  if (out.empty()) throw jouleget::Error("empty list: " + s);
  return out;
}

// host:port for the fixture bind address; accepts ":8080" and "8080" too
std::pair<std::string, int> parse_bind(const std::string &s) {
  std::string host = "127.0.0.1";
  std::string port = s;
  auto colon = s.rfind(':');
  if (colon != std::string::npos) {
    if (colon > 0) host = s.substr(0, colon);
    port = s.substr(colon + 1);
  }
  return {host, port.empty() ? 8080 : std::stoi(port)};
}

int run_fixture(const std::string &fixture_arg, const std::string &dataset,
                double scale, std::uint64_t seed, const std::string &bind,
                const std::filesystem::path &out_dir, bool no_ranges) {
  using namespace jouleget;
  std::uint64_t fault_bytes = 0;
  if (fixture_arg.rfind("fault:", 0) == 0) {
    fault_bytes = std::stoull(fixture_arg.substr(6));
  } else if (fixture_arg != "serve") {
    throw Error("--fixture expects 'serve' or 'fault:<n>', got " +
                fixture_arg);
  }

  auto dir = out_dir.empty() ? std::filesystem::path("fixture_data") : out_dir;
  if (std::filesystem::exists(dir / "manifest.csv")) {
    std::fprintf(stderr, "reusing dataset in %s\n", dir.string().c_str());
  } else {
    const auto &spec = data::builtin_spec(dataset);
    std::fprintf(stderr, "generating %s at scale %g into %s ...\n",
                 spec.name.c_str(), scale, dir.string().c_str());
    auto manifest = data::generate_dataset(spec, seed, scale, dir);
    std::fprintf(stderr, "%zu files, %llu bytes\n", manifest.entries.size(),
                 static_cast<unsigned long long>(manifest.total_bytes()));
  }

  auto [host, port] = parse_bind(bind.empty() ? "127.0.0.1:8080" : bind);
  net::FixtureOptions options;
  options.bind_host = host;
  options.port = port;
  options.ranges_enabled = !no_ranges;
  options.fault_after_bytes = fault_bytes;
  net::FixtureServer server(dir, options);
  server.start();
  std::printf("serving %s on %s (ranges %s%s)\n", dir.string().c_str(),
              server.url().c_str(), no_ranges ? "off" : "on",
              fault_bytes ? (", fault after " + std::to_string(fault_bytes) +
                             " bytes")
                                .c_str()
                          : "");
  std::fflush(stdout);

  std::signal(SIGINT, handle_sigint);
  std::signal(SIGTERM, handle_sigint);
  while (!g_stop)
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  using namespace jouleget;
  CLI::App app{
      "jouleget - energy-aware HTTP transfer benchmarking and simulation"};

  std::string mode;
  std::string dataset = "HTML";
  double scale = 1.0;
  std::uint64_t seed = 7;
  std::string cc_list = "1,2,4,8,16,32";
  std::string p_list = "1,2,4,8,16,32";
  std::string io_list = "1k,2k,4k,8k,16k,32k,64k";
  int reps = 5;
  std::string server_url;
  std::string scenario_path;
  std::string trace_dir;
  std::string out_path;
  std::string format = "csv";
  std::vector<std::string> plots;
  std::string fixture_arg;
  bool no_ranges = false;

  app.add_option("--mode", mode, "experiment mode: live or sim")
      ->check(CLI::IsMember({"live", "sim"}));
  auto *dataset_opt =
      app.add_option("--dataset", dataset, "builtin dataset name");
  auto *scale_opt =
      app.add_option("--scale", scale, "dataset size scale in (0,1]");
  auto *seed_opt = app.add_option("--seed", seed, "dataset generator seed");
  app.add_option("--cc", cc_list, "comma list of concurrency levels");
  app.add_option("--p", p_list, "comma list of parallelism levels");
  app.add_option("--io", io_list,
                 "comma list of I/O request sizes in bytes (k suffix = KiB)");
  app.add_option("--reps", reps, "repetitions per grid cell");
  app.add_option("--server", server_url,
                 "live: server base URL; fixture: bind host:port");
  app.add_option("--scenario", scenario_path,
                 "sim: scenario JSON file (default: builtin sydney-wifi)");
  app.add_option("--trace-dir", trace_dir,
                 "live: directory of per-run power trace CSVs");
  app.add_option("--out", out_path, "report (or fixture dataset) path");
  app.add_option("--format", format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--plot", plots,
                 "emit plot data: throughput_vs_cc, energy_vs_cc, "
                 "throughput_vs_p, energy_vs_p, surface_cc_p");
  app.add_option("--fixture", fixture_arg,
                 "run the local fixture server: 'serve' or 'fault:<n>'");
  app.add_flag("--no-ranges", no_ranges,
               "fixture: do not honor byte-range requests");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!fixture_arg.empty()) {
      return run_fixture(fixture_arg, dataset, scale, seed, server_url,
                         out_path, no_ranges);
    }

    if (mode.empty())
      throw Error("either --mode or --fixture is required (see --help)");

    bench::ExperimentConfig config;
    config.mode = mode == "live" ? bench::Mode::live : bench::Mode::sim;
    if (!scenario_path.empty())
      config.scenario = sim::load_scenario(scenario_path);
    // CLI values win over the scenario's dataset block
    config.dataset = dataset_opt->count() ? dataset : config.scenario.dataset;
    config.scale = scale_opt->count() ? scale : config.scenario.scale;
    config.seed = seed_opt->count() ? seed : config.scenario.seed;
    config.cc_levels = parse_int_list(cc_list);
    config.p_levels = parse_int_list(p_list);
    config.io_levels = parse_size_list(io_list);
    config.repetitions = reps;
    config.server_url = server_url;
    config.trace_dir = trace_dir;
    if (config.mode == bench::Mode::live) config.cooldown_s = 5.0;

    bench::SweepResult result = bench::run_experiment(config);

    bench::ReportFormat fmt = format == "json" ? bench::ReportFormat::json
                                               : bench::ReportFormat::csv;
    std::filesystem::path out =
        out_path.empty()
            ? std::filesystem::path(format == "json" ? "sweep.json"
                                                     : "sweep.csv")
            : std::filesystem::path(out_path);
    bench::emit_report(result, out, fmt);
    std::printf("wrote %s (%zu cells)\n", out.string().c_str(),
                result.cells.size());

    for (const auto &plot : plots) {
      auto kind = bench::figure_kind_from_string(plot);
      std::filesystem::path plot_path = out;
      plot_path.replace_extension("");
      plot_path += "." + plot + ".dat";
      bench::emit_plot_data(result, kind, plot_path);
      std::printf("wrote %s\n", plot_path.string().c_str());
    }

    for (const auto &cell : result.cells) {
      if (!cell.ok)
        std::fprintf(stderr, "cell cc=%d p=%d io=%llu failed: %s\n", cell.cc,
                     cell.p, static_cast<unsigned long long>(cell.io_bytes),
                     cell.error.c_str());
    }
    return result.all_ok() ? 0 : 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
