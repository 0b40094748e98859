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

#include <openssl/evp.h>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "jouleget/error.hpp"

namespace jouleget {

/// Streaming SHA-256, hex-encoded. Thin RAII wrapper over OpenSSL EVP.
class Sha256 {
public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw Error("sha256 init failed");
  }
  Sha256(const Sha256 &) = delete;
  Sha256 &operator=(const Sha256 &) = delete;
  ~Sha256() { EVP_MD_CTX_free(ctx_); }

  void update(const void *data, std::size_t len) {
    if (EVP_DigestUpdate(ctx_, data, len) != 1)
      throw Error("sha256 update failed");
  }

  std::string hex() {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int out_len = 0;
    if (EVP_DigestFinal_ex(ctx_, out, &out_len) != 1)
      throw Error("sha256 final failed");
    static const char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(out_len * 2);
    for (unsigned int i = 0; i < out_len; ++i) {
      s.push_back(digits[out[i] >> 4]);
      s.push_back(digits[out[i] & 0xf]);
    }
    return s;
  }

private:
  EVP_MD_CTX *ctx_;
};

inline std::string sha256_hex(const void *data, std::size_t len) {
  Sha256 h;
  h.update(data, len);
  return h.hex();
}

inline std::string sha256_hex(const std::string &s) {
  return sha256_hex(s.data(), s.size());
}

/// Digest of a file's contents, read in io_chunk-sized units.
inline std::string sha256_file(const std::filesystem::path &path,
                               std::size_t io_chunk = 1 << 16) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file for digest: " + path.string());
  Sha256 h;
  std::vector<char> buf(io_chunk);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    std::streamsize got = in.gcount();
    if (got > 0) h.update(buf.data(), static_cast<std::size_t>(got));
  }
  if (in.bad()) throw Error("read error while digesting: " + path.string());
  return h.hex();
}

} // namespace jouleget
