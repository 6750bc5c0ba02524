// Copyright 2026 The zsql Authors.
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

#include "zsql/manifest.h"

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

namespace zsql {

std::string Sha256File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 init failed");
  }
  std::array<char, 1 << 16> buf;
  while (in.read(buf.data(), buf.size()) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

void RunManifest::AddInput(const std::string& role, const std::filesystem::path& path) {
  inputs_.push_back({{"role", role}, {"path", path.string()}, {"sha256", Sha256File(path)}});
}

void RunManifest::AddOutput(const std::string& role, const std::filesystem::path& path) {
  outputs_.push_back({{"role", role}, {"path", path.string()}});
}

nlohmann::json RunManifest::ToJson() const {
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
  return {{"command", command_}, {"config", config_},  {"seed", seed_},
          {"inputs", inputs_},   {"outputs", outputs_}, {"duration_seconds", elapsed.count()}};
}

void RunManifest::Write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << ToJson().dump(2) << "\n";
}

}  // namespace zsql
