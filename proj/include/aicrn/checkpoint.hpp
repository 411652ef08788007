// Copyright 2026 The AICRN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary checkpoint layout (all integers little-endian):
//
//   "AICN"  u32 version(=1)  u32 tensor_count
//   per tensor: u16 name_len, name (UTF-8), u8 rank, u32 dims[rank],
//               float32 data[prod(dims)] row-major
//   u32 config_len, config JSON (UTF-8)
//
// A sidecar "<stem>.meta.json" next to the checkpoint carries the target,
// normalization statistics and training metrics.

#ifndef AICRN_CHECKPOINT_HPP_
#define AICRN_CHECKPOINT_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aicrn/error.hpp"
#include "aicrn/network.hpp"

namespace aicrn {

inline constexpr char kCheckpointMagic[4] = {'A', 'I', 'C', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class ByteWriter {
 public:
  template <typename U>
  void put(U v) {
    char buf[sizeof(U)];
    std::memcpy(buf, &v, sizeof(U));
    bytes_.insert(bytes_.end(), buf, buf + sizeof(U));
  }
  void put_bytes(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CorruptCheckpointError("checkpoint truncated");
  }
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Path of the metadata sidecar for a checkpoint: "model.aicn" -> "model.meta.json".
inline std::filesystem::path meta_path_for(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p.replace_extension(".meta.json");
  return p;
}

template <typename T>
void save_weights(AicrnModel<T>& model, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.put_bytes(std::string(kCheckpointMagic, 4));
  w.put<std::uint32_t>(kCheckpointVersion);
  auto state = model.state();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(state.size()));
  for (const auto& entry : state) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(entry.name.size()));
    w.put_bytes(entry.name);
    const auto dims = entry.tensor.shape().dims();
    w.put<std::uint8_t>(static_cast<std::uint8_t>(dims.size()));
    for (auto d : dims) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (T v : entry.tensor.data()) w.put<float>(static_cast<float>(v));
  }
  const std::string config = nlohmann::json(model.config).dump();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(config.size()));
  w.put_bytes(config);

  // Write to a sibling temp file first so a failed write never leaves a
  // half-written checkpoint under the final name.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw IoError("failed writing checkpoint: " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + path.string() + ": " + ec.message());
}

/// Reads a checkpoint. When `expected` is given, the stored tensors must
/// match the layout that config implies, otherwise a CorruptCheckpointError
/// reports the shape disagreement. No partially-loaded model escapes.
template <typename T>
AicrnModel<T> load_weights(const std::filesystem::path& path, const std::optional<AicrnConfig>& expected = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  detail::ByteReader r(std::move(bytes));

  if (r.get_string(4) != std::string(kCheckpointMagic, 4)) throw CorruptCheckpointError("bad checkpoint magic");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CorruptCheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>();
  struct Stored {
    std::string name;
    Shape shape;
    std::vector<float> data;
  };
  std::vector<Stored> stored;
  stored.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Stored s;
    s.name = r.get_string(r.get<std::uint16_t>());
    const auto rank = r.get<std::uint8_t>();
    if (rank > Shape::kMaxRank) throw CorruptCheckpointError("tensor '" + s.name + "' has rank " + std::to_string(rank));
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = r.get<std::uint32_t>();
    s.shape = Shape::from(dims);
    s.data.resize(s.shape.numel());
    for (auto& v : s.data) v = r.get<float>();
    stored.push_back(std::move(s));
  }
  const auto config_len = r.get<std::uint32_t>();
  const std::string config_text = r.get_string(config_len);
  if (!r.at_end()) throw CorruptCheckpointError("trailing bytes after checkpoint config");

  AicrnConfig config;
  try {
    config = nlohmann::json::parse(config_text).get<AicrnConfig>();
    config.validate();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpointError(std::string("checkpoint config unreadable: ") + e.what());
  } catch (const ConfigError& e) {
    throw CorruptCheckpointError(std::string("checkpoint config invalid: ") + e.what());
  }

  auto check_layout = [&](AicrnModel<T>& skeleton, const char* what) {
    auto state = skeleton.state();
    if (state.size() != stored.size()) {
      throw CorruptCheckpointError(std::string("shape disagreement with ") + what + ": " +
                                   std::to_string(stored.size()) + " stored tensors, expected " +
                                   std::to_string(state.size()));
    }
    for (std::size_t i = 0; i < state.size(); ++i) {
      if (state[i].name != stored[i].name || !(state[i].tensor.shape() == stored[i].shape)) {
        throw CorruptCheckpointError(std::string("shape disagreement with ") + what + ": stored '" + stored[i].name +
                                     "' " + stored[i].shape.str() + ", expected '" + state[i].name + "' " +
                                     state[i].tensor.shape().str());
      }
    }
  };

  Rng unused(0);
  if (expected) {
    auto skeleton = build<T>(*expected, unused);
    check_layout(skeleton, "expected config");
  }
  auto model = build<T>(config, unused);
  check_layout(model, "embedded config");
  auto state = model.state();
  for (std::size_t i = 0; i < state.size(); ++i) {
    auto dst = state[i].tensor.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<T>(stored[i].data[k]);
  }
  return model;
}

}  // namespace aicrn

#endif  // AICRN_CHECKPOINT_HPP_
