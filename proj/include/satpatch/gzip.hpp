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
#include <cstring>
#include <string>

#include <zlib.h>

#include "satpatch/common.hpp"

namespace satpatch::gzip {

// Canonical member header: no flags, mtime 0, XFL 2 (max compression), OS 255.
inline constexpr std::array<std::uint8_t, 10> kCanonicalHeader = {0x1f, 0x8b, 0x08, 0x00, 0x00,
                                                                  0x00, 0x00, 0x00, 0x02, 0xff};

/// Deterministic gzip at level 9. Output depends only on `data`.
inline Bytes compress(ByteView data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(ErrorCode::Io, "deflateInit2 failed");
  }
  gz_header header{};
  header.os = 255;
  deflateSetHeader(&zs, &header);

  Bytes out(deflateBound(&zs, static_cast<uLong>(data.size())) + 32);
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&zs, Z_FINISH);
  std::size_t produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorCode::Io, "deflate did not finish");
  out.resize(produced);
  return out;
}

/// Inflates exactly one gzip member. With `strict_header` the member header
/// must be byte-identical to the one `compress` writes.
inline Bytes decompress(ByteView data, bool strict_header = false) {
  if (data.size() < 18) throw Error(ErrorCode::Truncated, "gzip stream shorter than header+trailer");
  if (data[0] != 0x1f || data[1] != 0x8b) throw Error(ErrorCode::CorruptStream, "not a gzip stream");
  if (strict_header && std::memcmp(data.data(), kCanonicalHeader.data(), kCanonicalHeader.size()) != 0) {
    throw Error(ErrorCode::CorruptStream, "non-canonical gzip header");
  }

  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) throw Error(ErrorCode::Io, "inflateInit2 failed");
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());

  Bytes out;
  std::array<std::uint8_t, 1 << 16> buf;
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = buf.data();
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    std::size_t got = buf.size() - zs.avail_out;
    out.insert(out.end(), buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(got));
    if (rc == Z_STREAM_END) break;
    if (rc == Z_BUF_ERROR || (rc == Z_OK && zs.avail_in == 0 && got == 0)) {
      inflateEnd(&zs);
      throw Error(ErrorCode::Truncated, "gzip stream ends early at offset " + std::to_string(zs.total_in));
    }
    if (rc != Z_OK) {
      std::string msg = zs.msg ? zs.msg : "inflate error";
      std::size_t at = zs.total_in;
      inflateEnd(&zs);
      if (msg.find("incorrect data check") != std::string::npos ||
          msg.find("incorrect length check") != std::string::npos) {
        throw Error(ErrorCode::CrcMismatch, msg + " at offset " + std::to_string(at));
      }
      throw Error(ErrorCode::CorruptStream, msg + " at offset " + std::to_string(at));
    }
  }
  std::size_t consumed = zs.total_in;
  inflateEnd(&zs);
  if (consumed != data.size()) {
    throw Error(ErrorCode::CorruptStream, "trailing bytes after gzip member at offset " + std::to_string(consumed));
  }
  return out;
}

}  // namespace satpatch::gzip
