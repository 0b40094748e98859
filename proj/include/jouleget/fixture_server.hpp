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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "jouleget/error.hpp"
#include "jouleget/http_socket.hpp"

namespace jouleget::net {

struct FixtureOptions {
  std::string bind_host = "127.0.0.1";
  int port = 0; // 0 = ephemeral
  bool ranges_enabled = true;
  std::uint64_t fault_after_bytes = 0; // 0 = off
};

/// Local HTTP file server for tests and live-mode experiments.
///
/// Serves a directory tree with switchable byte-range support and optional
/// fault injection: with fault_after_bytes = N, any response body larger
/// than N bytes is cut off after N bytes by closing the connection. Tracks
/// the concurrent-connection high-water mark and a per-request log so
/// tests can verify client-side scheduling behaviour.
class FixtureServer {
public:
  using Options = FixtureOptions;

  struct RequestRecord {
    std::string method;
    std::string path;
    std::string range; // raw Range header value, empty if none
  };

  FixtureServer(std::filesystem::path root, Options options = Options())
      : root_(std::move(root)), options_(options) {
    ranges_enabled_ = options_.ranges_enabled;
    fault_after_bytes_ = options_.fault_after_bytes;
  }

  ~FixtureServer() { stop(); }

  /// Binds and starts the accept loop; returns the bound port.
  int start() {
    if (running_) throw Error("fixture server already running");
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error("fixture: socket() failed");
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(options_.port));
    if (::inet_pton(AF_INET, options_.bind_host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      throw Error("fixture: bad bind host " + options_.bind_host);
    }
    if (::bind(fd, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0) {
      ::close(fd);
      throw Error(std::string("fixture: bind failed: ") + std::strerror(errno));
    }
    if (::listen(fd, 256) != 0) {
      ::close(fd);
      throw Error("fixture: listen failed");
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr *>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    listen_fd_ = fd;
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
    return port_;
  }

  void stop() {
    if (!running_) return;
    running_ = false;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
    if (accept_thread_.joinable()) accept_thread_.join();
    // workers are detached; wait for in-flight responses to drain
    for (int i = 0; i < 5000 && current_conns_.load() > 0; ++i)
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }

  int port() const { return port_; }
  std::string url() const {
    return "http://" + options_.bind_host + ":" + std::to_string(port_);
  }

  void set_ranges_enabled(bool enabled) { ranges_enabled_ = enabled; }
  void set_fault_after_bytes(std::uint64_t n) { fault_after_bytes_ = n; }

  int current_connections() const { return current_conns_.load(); }
  int max_concurrent_connections() const { return max_conns_.load(); }
  std::uint64_t total_requests() const { return total_requests_.load(); }

  std::vector<RequestRecord> request_log() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return request_log_;
  }

  void clear_stats() {
    std::lock_guard<std::mutex> lock(mutex_);
    request_log_.clear();
    max_conns_ = current_conns_.load();
    total_requests_ = 0;
  }

private:
  void accept_loop() {
    while (running_) {
      int conn = ::accept(listen_fd_, nullptr, nullptr);
      if (conn < 0) {
        if (running_ && (errno == EINTR || errno == ECONNABORTED)) continue;
        break;
      }
      int cur = ++current_conns_;
      int prev = max_conns_.load();
      while (cur > prev && !max_conns_.compare_exchange_weak(prev, cur)) {
      }
      std::thread([this, conn] {
        serve_connection(http::Socket(conn));
        --current_conns_;
      }).detach();
    }
  }

  static std::optional<std::pair<std::uint64_t, std::int64_t>> parse_range(
      const std::string &value, std::uint64_t size) {
    // supports "bytes=a-b" and "bytes=a-"
    if (value.rfind("bytes=", 0) != 0) return std::nullopt;
    std::string spec = value.substr(6);
    if (spec.find(',') != std::string::npos) return std::nullopt;
    auto dash = spec.find('-');
    if (dash == std::string::npos || dash == 0) return std::nullopt;
    try {
      std::uint64_t first = std::stoull(spec.substr(0, dash));
      std::int64_t last = dash + 1 < spec.size()
                              ? static_cast<std::int64_t>(
                                    std::stoull(spec.substr(dash + 1)))
                              : -1;
      if (last >= 0 && static_cast<std::uint64_t>(last) >= size)
        last = static_cast<std::int64_t>(size) - 1;
      return std::make_pair(first, last);
    } catch (const std::exception &) {
      return std::nullopt;
    }
  }

  void serve_connection(http::Socket sock) {
    try {
      std::string buf;
      char chunk[4096];
      std::size_t header_end = std::string::npos;
      while (header_end == std::string::npos) {
        std::size_t n = sock.recv_some(chunk, sizeof(chunk));
        if (n == 0) return;
        buf.append(chunk, n);
        header_end = buf.find("\r\n\r\n");
        if (buf.size() > (1 << 16)) return;
      }
      std::istringstream head(buf.substr(0, header_end));
      std::string method, target, version;
      head >> method >> target >> version;
      std::string range_header;
      std::string line;
      std::getline(head, line); // rest of request line
      while (std::getline(head, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string key = http::detail::to_lower(
            http::detail::trim(line.substr(0, colon)));
        if (key == "range") range_header = http::detail::trim(line.substr(colon + 1));
      }

      ++total_requests_;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        request_log_.push_back({method, target, range_header});
      }

      if (method != "GET" && method != "HEAD") {
        send_simple(sock, 405, "Method Not Allowed");
        return;
      }
      auto file = resolve(target);
      if (!file) {
        send_simple(sock, 404, "Not Found");
        return;
      }
      std::uint64_t size = std::filesystem::file_size(*file);

      const bool ranges = ranges_enabled_.load();
      std::uint64_t first = 0, last = size > 0 ? size - 1 : 0;
      bool partial = false;
      if (ranges && !range_header.empty()) {
        auto parsed = parse_range(range_header, size);
        if (parsed && size > 0) {
          if (parsed->first >= size) {
            send_simple(sock, 416, "Range Not Satisfiable",
                        "Content-Range: bytes */" + std::to_string(size) +
                            "\r\n");
            return;
          }
          first = parsed->first;
          last = parsed->second < 0 ? size - 1
                                    : static_cast<std::uint64_t>(parsed->second);
          partial = true;
        }
      }
      std::uint64_t body_len = size == 0 ? 0 : last - first + 1;

      std::string head_out = partial ? "HTTP/1.1 206 Partial Content\r\n"
                                     : "HTTP/1.1 200 OK\r\n";
      head_out += "Content-Type: application/octet-stream\r\n";
      head_out += "Content-Length: " + std::to_string(body_len) + "\r\n";
      if (ranges) head_out += "Accept-Ranges: bytes\r\n";
      if (partial)
        head_out += "Content-Range: bytes " + std::to_string(first) + "-" +
                    std::to_string(last) + "/" + std::to_string(size) + "\r\n";
      head_out += "Connection: close\r\n\r\n";
      sock.send_all(head_out.data(), head_out.size());
      if (method == "HEAD" || body_len == 0) return;

      std::ifstream in(*file, std::ios::binary);
      if (!in) return;
      in.seekg(static_cast<std::streamoff>(first));
      // fault injection targets payload transfers, not the manifest
      std::uint64_t fault =
          target == "/manifest.csv" ? 0 : fault_after_bytes_.load();
      std::uint64_t budget =
          (fault > 0 && body_len > fault) ? fault : body_len;
      std::vector<char> out(64 * 1024);
      std::uint64_t sent = 0;
      while (sent < budget && in) {
        std::size_t take = static_cast<std::size_t>(
            std::min<std::uint64_t>(budget - sent, out.size()));
        in.read(out.data(), static_cast<std::streamsize>(take));
        std::streamsize got = in.gcount();
        if (got <= 0) break;
        sock.send_all(out.data(), static_cast<std::size_t>(got));
        sent += static_cast<std::uint64_t>(got);
      }
      // budget < body_len means the fault fired: hard close mid-body
    } catch (const std::exception &) {
      // connection-level failures just drop the connection
    }
  }

  std::optional<std::filesystem::path> resolve(const std::string &target) const {
    std::string path = target;
    auto q = path.find('?');
    if (q != std::string::npos) path.resize(q);
    if (path.empty() || path[0] != '/') return std::nullopt;
    if (path.find("..") != std::string::npos) return std::nullopt;
    auto full = root_ / path.substr(1);
    std::error_code ec;
    if (!std::filesystem::is_regular_file(full, ec)) return std::nullopt;
    return full;
  }

  void send_simple(const http::Socket &sock, int status,
                   const std::string &reason,
                   const std::string &extra_headers = "") {
    std::string body = reason + "\n";
    std::string head = "HTTP/1.1 " + std::to_string(status) + " " + reason +
                       "\r\nContent-Length: " + std::to_string(body.size()) +
                       "\r\n" + extra_headers + "Connection: close\r\n\r\n";
    sock.send_all(head.data(), head.size());
    sock.send_all(body.data(), body.size());
  }

  std::filesystem::path root_;
  Options options_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<bool> ranges_enabled_{true};
  std::atomic<std::uint64_t> fault_after_bytes_{0};
  std::thread accept_thread_;
  mutable std::mutex mutex_;
  std::vector<RequestRecord> request_log_;
  std::atomic<int> current_conns_{0};
  std::atomic<int> max_conns_{0};
  std::atomic<std::uint64_t> total_requests_{0};
};

} // namespace jouleget::net
