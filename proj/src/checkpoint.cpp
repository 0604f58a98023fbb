// Copyright 2026 The pidgin-asr Authors.
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

#include "asr/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace asr {
namespace {

constexpr char kMagic[] = "CKPT1\n";
constexpr size_t kMagicLen = 6;

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(const std::string& buf, std::string path)
      : buf_(buf), path_(std::move(path)) {}

  void need(size_t n) const {
    if (pos_ + n > buf_.size()) {
      throw DataError("truncated checkpoint '" + path_ + "'");
    }
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(buf_[pos_ + i]);
    }
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(buf_[pos_ + i]);
    }
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::string bytes(size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  const std::string& buf_;
  std::string path_;
  size_t pos_ = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string config_text;
  for (const auto& [k, v] : ckpt.config) {
    if (k.find_first_of("=\n") != std::string::npos ||
        v.find('\n') != std::string::npos) {
      throw std::invalid_argument("checkpoint config entry '" + k +
                                  "' contains a reserved character");
    }
    config_text += k + " = " + v + "\n";
  }
  std::string out(kMagic, kMagicLen);
  put_u32(out, static_cast<uint32_t>(config_text.size()));
  out += config_text;
  put_u32(out, static_cast<uint32_t>(ckpt.params.size()));
  for (const auto& [name, t] : ckpt.params) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<uint32_t>(t.shape.size()));
    for (size_t d : t.shape) put_u32(out, static_cast<uint32_t>(d));
  }
  for (const auto& [name, t] : ckpt.params) {
    for (double v : t.data) put_f64(out, v);
  }
  return out;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(ckpt);
  // Write-then-rename so an interrupted save never clobbers a good file.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DataError("cannot write checkpoint '" + path.string() + "'");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw DataError("write failed for checkpoint '" + path.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open checkpoint '" + path.string() + "'");
  }
  const std::string buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (buf.compare(0, kMagicLen, kMagic) != 0) {
    throw DataError("not a CKPT1 checkpoint: '" + path.string() + "'");
  }
  Reader r(buf, path.string());
  r.bytes(kMagicLen);

  Checkpoint ckpt;
  const std::string config_text = r.bytes(r.u32());
  size_t start = 0;
  while (start < config_text.size()) {
    size_t end = config_text.find('\n', start);
    if (end == std::string::npos) end = config_text.size();
    const std::string line = config_text.substr(start, end - start);
    start = end + 1;
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("malformed checkpoint config line '" + line + "'");
    }
    ckpt.config[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  const uint32_t n = r.u32();
  std::vector<std::string> order;
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = r.bytes(r.u32());
    const uint32_t rank = r.u32();
    std::vector<size_t> shape(rank);
    for (auto& d : shape) d = r.u32();
    if (ckpt.params.contains(name)) {
      throw DataError("duplicate tensor '" + name + "' in checkpoint");
    }
    ckpt.params.emplace(name, Tensor(shape));
    order.push_back(std::move(name));
  }
  for (const auto& name : order) {
    for (double& v : ckpt.params.at(name).data) v = r.f64();
  }
  if (!r.done()) {
    throw DataError("trailing bytes in checkpoint '" + path.string() + "'");
  }
  return ckpt;
}

}  // namespace asr
