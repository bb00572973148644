/*
 * Copyright 2026 The satpatch Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "satpatch/common.hpp"
#include "satpatch/sha256.hpp"

namespace satpatch {

/// Content-defined chunking parameters. Travels in every package header.
struct ChunkBoundarySpec {
  std::uint32_t window_bytes = 48;
  std::uint32_t boundary_mask_bits = 11;
  std::uint32_t min_chunk_bytes = 256;
  std::uint32_t max_chunk_bytes = 16384;

  void validate() const {
    if (window_bytes < 1) throw Error(ErrorCode::InvalidArgument, "chunk window must be >= 1");
    if (boundary_mask_bits < 1 || boundary_mask_bits > 63) {
      throw Error(ErrorCode::InvalidArgument, "boundary mask bits must be in [1, 63]");
    }
    if (min_chunk_bytes == 0 || min_chunk_bytes > max_chunk_bytes) {
      throw Error(ErrorCode::InvalidArgument, "need 0 < min_chunk_bytes <= max_chunk_bytes");
    }
  }

  /// Parses "window,maskbits,min,max".
  static ChunkBoundarySpec parse(std::string_view text) {
    std::array<std::uint32_t, 4> v{};
    std::size_t field = 0;
    while (field < 4) {
      auto comma = text.find(',');
      std::string_view part = text.substr(0, comma);
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v[field]);
      if (ec != std::errc{} || p != part.data() + part.size() || part.empty()) {
        throw Error(ErrorCode::InvalidArgument, "bad chunk spec '" + std::string(text) + "'");
      }
      ++field;
      if (comma == std::string_view::npos) break;
      text.remove_prefix(comma + 1);
    }
    if (field != 4) throw Error(ErrorCode::InvalidArgument, "chunk spec needs 4 fields");
    ChunkBoundarySpec s{v[0], v[1], v[2], v[3]};
    s.validate();
    return s;
  }

  friend bool operator==(const ChunkBoundarySpec&, const ChunkBoundarySpec&) = default;
};

namespace detail {

inline constexpr std::array<std::uint64_t, 256> make_byte_table() {
  std::array<std::uint64_t, 256> t{};
  std::uint64_t x = 0x5A7E11E5ULL;  // splitmix64 stream
  for (auto& v : t) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    v = z ^ (z >> 31);
  }
  return t;
}

inline constexpr std::array<std::uint64_t, 256> kByteTable = make_byte_table();

}  // namespace detail

/// Polynomial rolling hash (mod 2^64) over the trailing `window` bytes.
class RollingHash {
 public:
  static constexpr std::uint64_t kBase = 0x100000001B3ULL;

  explicit RollingHash(std::uint32_t window) : window_(window), ring_(window, 0) {
    out_factor_ = 1;
    for (std::uint32_t i = 0; i < window; ++i) out_factor_ *= kBase;
  }

  std::uint64_t roll(std::uint8_t in) {
    value_ = value_ * kBase + detail::kByteTable[in];
    if (filled_ == window_) {
      value_ -= detail::kByteTable[ring_[pos_]] * out_factor_;
    } else {
      ++filled_;
    }
    ring_[pos_] = in;
    pos_ = (pos_ + 1) % window_;
    return value_;
  }

  std::uint64_t value() const noexcept { return value_; }

 private:
  std::uint32_t window_;
  std::vector<std::uint8_t> ring_;
  std::uint64_t out_factor_ = 1;
  std::uint64_t value_ = 0;
  std::uint32_t filled_ = 0;
  std::uint32_t pos_ = 0;
};

/// A chunk is a view into the content passed to chunkify.
struct Chunk {
  ByteView bytes;
  std::size_t offset = 0;
  Digest hash{};

  std::size_t length() const noexcept { return bytes.size(); }
  bool operator==(const Chunk& o) const { return hash == o.hash && bytes.size() == o.bytes.size(); }
};

/// Splits content at content-defined boundaries. The hash rolls across the
/// whole stream, so boundary decisions depend only on nearby bytes and on the
/// distance from the previous boundary.
inline std::vector<Chunk> chunkify(ByteView content, const ChunkBoundarySpec& spec = {}) {
  spec.validate();
  std::vector<Chunk> chunks;
  if (content.empty()) return chunks;
  const std::uint64_t mask = (std::uint64_t{1} << spec.boundary_mask_bits) - 1;
  RollingHash rh(spec.window_bytes);
  std::size_t start = 0;
  auto cut = [&](std::size_t end) {
    ByteView bytes = content.subspan(start, end - start);
    chunks.push_back(Chunk{bytes, start, sha256(bytes)});
    start = end;
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    const std::uint64_t h = rh.roll(content[i]);
    const std::size_t len = i - start + 1;
    if (len >= spec.max_chunk_bytes || (len >= spec.min_chunk_bytes && (h & mask) == 0)) cut(i + 1);
  }
  if (start < content.size()) cut(content.size());
  return chunks;
}

}  // namespace satpatch
