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

// Minimal ustar reader/writer. The writer is deterministic: mtime, uid and gid
// are zero, modes are fixed, and records appear in the order given.

#include <algorithm>
#include <array>
#include <cstring>
#include <string>
#include <vector>

#include "satpatch/common.hpp"

namespace satpatch::tar {

struct Record {
  std::string path;  // no trailing '/'
  bool is_dir = false;
  Bytes content;
};

namespace detail {

inline constexpr std::size_t kBlock = 512;

inline void put_octal(std::uint8_t* field, std::size_t width, std::uint64_t value) {
  // width-1 octal digits followed by NUL
  std::string digits(width - 1, '0');
  for (std::size_t i = width - 1; i-- > 0;) {
    digits[i] = static_cast<char>('0' + (value & 7));
    value >>= 3;
  }
  if (value != 0) throw Error(ErrorCode::InvalidArgument, "tar numeric field overflow");
  std::memcpy(field, digits.data(), width - 1);
  field[width - 1] = 0;
}

inline void put_size(std::uint8_t* field, std::uint64_t value) {
  if (value < (std::uint64_t{1} << 33)) {
    put_octal(field, 12, value);
    return;
  }
  field[0] = 0x80;
  for (std::size_t i = 11; i >= 1; --i) {
    field[i] = static_cast<std::uint8_t>(value & 0xFF);
    value >>= 8;
  }
}

inline std::uint64_t get_number(const std::uint8_t* field, std::size_t width) {
  if (field[0] & 0x80) {
    std::uint64_t v = field[0] & 0x7F;
    for (std::size_t i = 1; i < width; ++i) v = (v << 8) | field[i];
    return v;
  }
  std::uint64_t v = 0;
  std::size_t i = 0;
  while (i < width && (field[i] == ' ' || field[i] == 0)) ++i;
  for (; i < width && field[i] >= '0' && field[i] <= '7'; ++i) v = (v << 3) | static_cast<std::uint64_t>(field[i] - '0');
  return v;
}

inline std::string get_string(const std::uint8_t* field, std::size_t width) {
  std::size_t n = 0;
  while (n < width && field[n] != 0) ++n;
  return std::string(reinterpret_cast<const char*>(field), n);
}

inline std::array<std::uint8_t, kBlock> make_header(const std::string& name, const std::string& prefix,
                                                    char type, std::uint64_t size, unsigned mode) {
  std::array<std::uint8_t, kBlock> h{};
  std::memcpy(h.data(), name.data(), std::min<std::size_t>(name.size(), 100));
  put_octal(h.data() + 100, 8, mode);
  put_octal(h.data() + 108, 8, 0);
  put_octal(h.data() + 116, 8, 0);
  put_size(h.data() + 124, size);
  put_octal(h.data() + 136, 12, 0);
  h[156] = static_cast<std::uint8_t>(type);
  std::memcpy(h.data() + 257, "ustar", 6);
  std::memcpy(h.data() + 263, "00", 2);
  std::memcpy(h.data() + 345, prefix.data(), std::min<std::size_t>(prefix.size(), 155));
  std::memset(h.data() + 148, ' ', 8);
  unsigned sum = 0;
  for (auto b : h) sum += b;
  put_octal(h.data() + 148, 7, sum);
  h[155] = ' ';
  return h;
}

inline void append_padded(Bytes& out, ByteView data) {
  out.insert(out.end(), data.begin(), data.end());
  std::size_t pad = (kBlock - data.size() % kBlock) % kBlock;
  out.insert(out.end(), pad, 0);
}

}  // namespace detail

inline Bytes write(const std::vector<Record>& records) {
  using namespace detail;
  Bytes out;
  for (const auto& r : records) {
    std::string name = r.is_dir ? r.path + "/" : r.path;
    std::string prefix;
    if (name.size() > 100) {
      // ustar split: prefix/name at a '/' with name <= 100 and prefix <= 155
      bool split = false;
      for (std::size_t pos = name.find('/'); pos != std::string::npos; pos = name.find('/', pos + 1)) {
        if (pos <= 155 && name.size() - pos - 1 <= 100 && name.size() - pos - 1 > 0) {
          prefix = name.substr(0, pos);
          name = name.substr(pos + 1);
          split = true;
          break;
        }
      }
      if (!split) {
        std::string longname = (r.is_dir ? r.path + "/" : r.path);
        Bytes payload(longname.begin(), longname.end());
        payload.push_back(0);
        auto lh = make_header("././@LongLink", "", 'L', payload.size(), 0644);
        out.insert(out.end(), lh.begin(), lh.end());
        append_padded(out, payload);
        name = longname.substr(0, 100);
      }
    }
    auto h = make_header(name, prefix, r.is_dir ? '5' : '0', r.is_dir ? 0 : r.content.size(),
                         r.is_dir ? 0755 : 0644);
    out.insert(out.end(), h.begin(), h.end());
    if (!r.is_dir) append_padded(out, r.content);
  }
  out.insert(out.end(), 2 * kBlock, 0);
  return out;
}

/// Parses a tar stream. Symlinks, hard links and device nodes are rejected.
inline std::vector<Record> read(ByteView data) {
  using namespace detail;
  std::vector<Record> records;
  std::size_t off = 0;
  std::string pending_name;
  while (off + kBlock <= data.size()) {
    const std::uint8_t* h = data.data() + off;
    if (std::all_of(h, h + kBlock, [](std::uint8_t b) { return b == 0; })) break;

    unsigned sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i) sum += (i >= 148 && i < 156) ? ' ' : h[i];
    if (get_number(h + 148, 8) != sum) {
      throw Error(ErrorCode::CorruptStream, "tar header checksum mismatch at offset " + std::to_string(off));
    }

    std::uint64_t size = get_number(h + 124, 12);
    char type = static_cast<char>(h[156]);
    std::size_t body = off + kBlock;
    std::size_t padded = static_cast<std::size_t>((size + kBlock - 1) / kBlock * kBlock);
    if (body + size > data.size()) {
      throw Error(ErrorCode::Truncated, "tar entry body truncated at offset " + std::to_string(off));
    }
    ByteView payload = data.subspan(body, static_cast<std::size_t>(size));
    off = body + padded;

    if (type == 'L') {
      pending_name = get_string(payload.data(), payload.size());
      continue;
    }
    if (type == 'x') {
      // pax extended header: "<len> key=value\n" records
      std::string_view text = as_string_view(payload);
      while (!text.empty()) {
        auto sp = text.find(' ');
        if (sp == std::string_view::npos) break;
        std::size_t len = std::stoul(std::string(text.substr(0, sp)));
        if (len == 0 || len > text.size()) break;
        std::string_view rec = text.substr(sp + 1, len - sp - 2);
        if (rec.substr(0, 5) == "path=") pending_name = std::string(rec.substr(5));
        text.remove_prefix(len);
      }
      continue;
    }
    if (type == 'g') continue;

    std::string name = get_string(h, 100);
    std::string prefix = get_string(h + 345, 155);
    if (!pending_name.empty()) {
      name = pending_name;
      pending_name.clear();
    } else if (!prefix.empty()) {
      name = prefix + "/" + name;
    }

    Record r;
    if (type == '5') {
      r.is_dir = true;
    } else if (type == '0' || type == '\0' || type == '7') {
      r.content.assign(payload.begin(), payload.end());
    } else {
      throw Error(ErrorCode::Unsupported, std::string("unsupported tar entry type '") + type + "' for " + name);
    }
    while (!name.empty() && name.back() == '/') {
      name.pop_back();
      r.is_dir = true;
    }
    r.path = std::move(name);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace satpatch::tar
