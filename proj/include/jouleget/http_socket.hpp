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

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <csignal>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jouleget/error.hpp"

// Minimal blocking HTTP/1.1 plumbing over POSIX sockets. The transfer
// engine needs to issue socket reads in exact io_request_bytes units and
// the test fixture needs to cut connections mid-body, so both sides work
// on the raw socket rather than through an HTTP library.

namespace jouleget::http {

struct Url {
  std::string host;
  std::string port;
  std::string path; // begins with '/'
};

inline Url parse_url(const std::string &url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0)
    throw Error("only http:// URLs are supported: " + url);
  std::string rest = url.substr(scheme.size());
  auto slash = rest.find('/');
  Url u;
  std::string authority = slash == std::string::npos ? rest : rest.substr(0, slash);
  u.path = slash == std::string::npos ? "/" : rest.substr(slash);
  auto colon = authority.rfind(':');
  if (colon == std::string::npos) {
    u.host = authority;
    u.port = "80";
  } else {
    u.host = authority.substr(0, colon);
    u.port = authority.substr(colon + 1);
  }
  if (u.host.empty()) throw Error("URL has no host: " + url);
  return u;
}

/// Owning socket handle.
class Socket {
public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket &&other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket &operator=(Socket &&other) noexcept {
    if (this != &other) {
      close_fd();
      fd_ = other.fd_;
      other.fd_ = -1;
    }
    return *this;
  }
  Socket(const Socket &) = delete;
  Socket &operator=(const Socket &) = delete;
  ~Socket() { close_fd(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

  void close_fd() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

  void send_all(const void *data, std::size_t len) const {
    const char *p = static_cast<const char *>(data);
    while (len > 0) {
      ssize_t n = ::send(fd_, p, len, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(std::string("send failed: ") + std::strerror(errno));
      }
      p += n;
      len -= static_cast<std::size_t>(n);
    }
  }

  /// One receive call asking for up to `len` bytes; returns 0 at EOF.
  std::size_t recv_some(void *buf, std::size_t len) const {
    for (;;) {
      ssize_t n = ::recv(fd_, buf, len, 0);
      if (n >= 0) return static_cast<std::size_t>(n);
      if (errno == EINTR) continue;
      throw Error(std::string("recv failed: ") + std::strerror(errno));
    }
  }

private:
  int fd_ = -1;
};

inline Socket connect_tcp(const std::string &host, const std::string &port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo *res = nullptr;
  int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0)
    throw Error("cannot resolve " + host + ":" + port + ": " +
                gai_strerror(rc));
  Socket sock;
  std::string last_err = "no addresses";
  for (addrinfo *ai = res; ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_err = std::strerror(errno);
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      sock = Socket(fd);
      break;
    }
    last_err = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (!sock.valid())
    throw Error("cannot connect to " + host + ":" + port + ": " + last_err);
  return sock;
}

struct Response {
  int status = 0;
  std::string reason;
  std::map<std::string, std::string> headers; // keys lowercased
  std::string body_head; // bytes past the header block already received

  std::optional<std::string> header(const std::string &name) const {
    auto it = headers.find(name);
    if (it == headers.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::uint64_t> content_length() const {
    auto v = header("content-length");
    if (!v) return std::nullopt;
    return std::stoull(*v);
  }
};

namespace detail {

inline std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline std::string trim(const std::string &s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

} // namespace detail

inline Response parse_response_head(const std::string &head) {
  Response r;
  std::size_t pos = 0;
  auto next_line = [&]() -> std::optional<std::string> {
    if (pos >= head.size()) return std::nullopt;
    auto eol = head.find("\r\n", pos);
    if (eol == std::string::npos) eol = head.size();
    std::string line = head.substr(pos, eol - pos);
    pos = eol + 2;
    return line;
  };
  auto status_line = next_line();
  if (!status_line || status_line->rfind("HTTP/1.", 0) != 0)
    throw Error("bad HTTP status line");
  auto sp1 = status_line->find(' ');
  auto sp2 = status_line->find(' ', sp1 + 1);
  if (sp1 == std::string::npos)
    throw Error("bad HTTP status line: " + *status_line);
  r.status = std::stoi(status_line->substr(
      sp1 + 1, sp2 == std::string::npos ? std::string::npos : sp2 - sp1 - 1));
  if (sp2 != std::string::npos) r.reason = status_line->substr(sp2 + 1);
  while (auto line = next_line()) {
    if (line->empty()) break;
    auto colon = line->find(':');
    if (colon == std::string::npos) continue;
    r.headers[detail::to_lower(detail::trim(line->substr(0, colon)))] =
        detail::trim(line->substr(colon + 1));
  }
  return r;
}

/// Sends a GET or HEAD and reads the response head. Socket reads are
/// issued in io_request_bytes units; any body bytes that arrive with the
/// header block are returned in Response::body_head.
inline Response send_request(const Socket &sock, const std::string &method,
                             const Url &url,
                             const std::optional<std::pair<std::uint64_t,
                                                           std::uint64_t>>
                                 &range,
                             std::size_t io_request_bytes) {
  std::string req = method + " " + url.path + " HTTP/1.1\r\n";
  req += "Host: " + url.host + ":" + url.port + "\r\n";
  if (range)
    req += "Range: bytes=" + std::to_string(range->first) + "-" +
           std::to_string(range->second) + "\r\n";
  req += "User-Agent: jouleget\r\n";
  req += "Connection: close\r\n\r\n";
  sock.send_all(req.data(), req.size());

  std::string buf;
  std::vector<char> chunk(std::max<std::size_t>(io_request_bytes, 1));
  std::size_t header_end = std::string::npos;
  while (header_end == std::string::npos) {
    std::size_t n = sock.recv_some(chunk.data(), chunk.size());
    if (n == 0)
      throw Error("connection closed before response headers completed");
    std::size_t scan_from = buf.size() > 3 ? buf.size() - 3 : 0;
    buf.append(chunk.data(), n);
    header_end = buf.find("\r\n\r\n", scan_from);
    if (buf.size() > (1 << 20))
      throw Error("response header block too large");
  }
  Response r = parse_response_head(buf.substr(0, header_end + 2));
  r.body_head = buf.substr(header_end + 4);
  return r;
}

} // namespace jouleget::http
