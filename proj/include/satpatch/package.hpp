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

// Update package wire format (".satpkg"). The file is one gzip member whose
// payload is:
//
//   "SATL" | u8 version | u32 window | u32 mask bits | u32 min | u32 max
//   | 32B source tree digest | 32B target tree digest
//   | u32 entry count | u64 manifest length | manifest text
//   | u32 segment count | { u32 path len | path | u32 run | u64 len | bytes }*
//
// All integers are big-endian. Manifest records are "TYPE\tPATH\tOPS\n" with
// TYPE in {D,F,T,B}, PATH percent-encoded, and OPS either a bare I/D tag
// (types D and F) or runs "(R|D|I)<count>[,<len>...]" joined by ';' where
// type B lists one byte length per chunk.

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "satpatch/diffgen.hpp"
#include "satpatch/gzip.hpp"

namespace satpatch {

inline constexpr std::uint8_t kPackageVersion = 1;
inline constexpr char kPackageMagic[4] = {'S', 'A', 'T', 'L'};

enum class EntryType : char { Directory = 'D', File = 'F', Textual = 'T', Binary = 'B' };

struct MetadataEntry {
  EntryType type = EntryType::File;
  RelPath path;
  ChangeKind tag = ChangeKind::Insert;  // Type-D and Type-F only
  EditOps ops;                          // Type-T and Type-B only

  friend bool operator==(const MetadataEntry&, const MetadataEntry&) = default;
};

struct PackageHeader {
  std::uint8_t version = kPackageVersion;
  ChunkBoundarySpec chunk_spec;
  Digest source_digest{};
  Digest target_digest{};
  friend bool operator==(const PackageHeader&, const PackageHeader&) = default;
};

struct UpdatePackage {
  PackageHeader header;
  std::vector<MetadataEntry> manifest;
  std::map<RelPath, std::vector<Bytes>> segment_store;
  friend bool operator==(const UpdatePackage&, const UpdatePackage&) = default;
};

namespace detail {

inline bool unreserved(std::uint8_t c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
         c == '_' || c == '~' || c == '/';
}

inline std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char ch : s) {
    auto c = static_cast<std::uint8_t>(ch);
    if (unreserved(c)) {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

// Strict inverse of percent_encode; returns false for any non-canonical form.
inline bool percent_decode(std::string_view s, std::string& out) {
  auto hexval = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  out.clear();
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto c = static_cast<std::uint8_t>(s[i]);
    if (c == '%') {
      if (i + 2 >= s.size()) return false;
      int hi = hexval(s[i + 1]), lo = hexval(s[i + 2]);
      if (hi < 0 || lo < 0) return false;
      auto v = static_cast<std::uint8_t>(hi << 4 | lo);
      if (unreserved(v)) return false;
      out.push_back(static_cast<char>(v));
      i += 2;
    } else if (unreserved(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      return false;
    }
  }
  return true;
}

inline void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }
inline void put_u32(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}
inline void put_u64(Bytes& out, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}
inline void put_bytes(Bytes& out, ByteView v) { out.insert(out.end(), v.begin(), v.end()); }
inline void put_str(Bytes& out, std::string_view v) { out.insert(out.end(), v.begin(), v.end()); }

class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  ByteView take(std::size_t n, const char* what) {
    if (data_.size() - pos_ < n) {
      throw Error(ErrorCode::Truncated, std::string("body truncated reading ") + what + " at offset " +
                                            std::to_string(pos_));
    }
    ByteView v = data_.subspan(pos_, n);
    pos_ += n;
    return v;
  }
  std::uint8_t u8(const char* what) { return take(1, what)[0]; }
  std::uint32_t u32(const char* what) {
    auto v = take(4, what);
    return std::uint32_t{v[0]} << 24 | std::uint32_t{v[1]} << 16 | std::uint32_t{v[2]} << 8 | v[3];
  }
  std::uint64_t u64(const char* what) {
    auto v = take(8, what);
    std::uint64_t r = 0;
    for (auto b : v) r = r << 8 | b;
    return r;
  }
  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

inline std::string format_ops(const MetadataEntry& e) {
  if (e.type == EntryType::Directory || e.type == EntryType::File) return std::string(1, static_cast<char>(e.tag));
  std::string s;
  for (const auto& op : e.ops) {
    if (!s.empty()) s.push_back(';');
    s.push_back(static_cast<char>(op.kind));
    s += std::to_string(op.count);
    if (e.type == EntryType::Binary) {
      for (auto len : op.unit_bytes) {
        s.push_back(',');
        s += std::to_string(len);
      }
    }
  }
  return s;
}

inline bool parse_canonical_u64(std::string_view s, std::uint64_t& v) {
  if (s.empty() || (s.size() > 1 && s[0] == '0')) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && p == s.data() + s.size();
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

inline MetadataEntry parse_manifest_line(std::string_view line, std::size_t lineno) {
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::MalformedManifest, "manifest line " + std::to_string(lineno) + ": " + why);
  };
  auto fields = split(line, '\t');
  if (fields.size() != 3) throw fail("expected 3 tab-separated fields");
  MetadataEntry e;
  if (fields[0].size() != 1) throw fail("bad type");
  switch (fields[0][0]) {
    case 'D': e.type = EntryType::Directory; break;
    case 'F': e.type = EntryType::File; break;
    case 'T': e.type = EntryType::Textual; break;
    case 'B': e.type = EntryType::Binary; break;
    default: throw fail("bad type");
  }
  std::string raw;
  if (!percent_decode(fields[1], raw)) throw fail("non-canonical path encoding");
  try {
    e.path = RelPath::parse(raw);
  } catch (const Error&) {
    throw fail("invalid path");
  }
  if (e.path.str() != raw) throw fail("non-normalized path");

  std::string_view ops = fields[2];
  if (e.type == EntryType::Directory || e.type == EntryType::File) {
    if (ops == "I") {
      e.tag = ChangeKind::Insert;
    } else if (ops == "D") {
      e.tag = ChangeKind::Delete;
    } else {
      throw fail("type D/F takes a single I or D tag");
    }
    return e;
  }
  if (ops.empty()) throw fail("empty op list");
  for (auto run : split(ops, ';')) {
    auto parts = split(run, ',');
    if (parts[0].size() < 2) throw fail("bad op run");
    OpKind kind;
    switch (parts[0][0]) {
      case 'R': kind = OpKind::Retain; break;
      case 'D': kind = OpKind::Delete; break;
      case 'I': kind = OpKind::Insert; break;
      default: throw fail("bad op kind");
    }
    std::uint64_t count = 0;
    if (!parse_canonical_u64(parts[0].substr(1), count) || count == 0) throw fail("bad op count");
    std::vector<std::uint64_t> lens;
    if (e.type == EntryType::Binary) {
      if (parts.size() - 1 != count) throw fail("byte-length list does not match chunk count");
      for (std::size_t i = 1; i < parts.size(); ++i) {
        std::uint64_t len = 0;
        if (!parse_canonical_u64(parts[i], len) || len == 0) throw fail("bad chunk byte length");
        lens.push_back(len);
      }
    } else if (parts.size() != 1) {
      throw fail("type T ops carry no byte lengths");
    }
    if (!e.ops.empty() && e.ops.ops().back().kind == kind) throw fail("adjacent runs of the same kind");
    e.ops.push(kind, count, std::move(lens));
  }
  return e;
}

inline std::size_t expected_segments(const MetadataEntry& e) {
  switch (e.type) {
    case EntryType::File: return e.tag == ChangeKind::Insert ? 1 : 0;
    case EntryType::Directory: return 0;
    default: return e.ops.insert_runs();
  }
}

// Structural consistency between manifest and segment store.
inline void check_consistency(const UpdatePackage& pkg) {
  std::set<std::pair<char, RelPath>> seen;
  std::set<RelPath> content_paths;
  std::map<RelPath, std::size_t> want;
  for (const auto& e : pkg.manifest) {
    if (!seen.emplace(static_cast<char>(e.type), e.path).second) {
      throw Error(ErrorCode::Inconsistent, "duplicate manifest entry for " + e.path.str());
    }
    if (std::size_t n = expected_segments(e); n > 0) {
      if (!want.emplace(e.path, n).second) {
        throw Error(ErrorCode::Inconsistent, "two payload-bearing entries for " + e.path.str());
      }
    }
    if (e.type == EntryType::Textual || e.type == EntryType::Binary) {
      if (!content_paths.insert(e.path).second) {
        throw Error(ErrorCode::Inconsistent, "path patched twice: " + e.path.str());
      }
    }
  }
  for (const auto& [path, segs] : pkg.segment_store) {
    auto it = want.find(path);
    if (it == want.end()) throw Error(ErrorCode::Inconsistent, "segment store has unreferenced path " + path.str());
    if (segs.size() != it->second) {
      throw Error(ErrorCode::Inconsistent, "segment count mismatch for " + path.str());
    }
  }
  for (const auto& [path, n] : want) {
    if (!pkg.segment_store.count(path)) {
      throw Error(ErrorCode::Inconsistent, "manifest references absent segments for " + path.str());
    }
  }
  for (const auto& e : pkg.manifest) {
    if (e.type != EntryType::Binary) continue;
    const auto& segs = pkg.segment_store.count(e.path) ? pkg.segment_store.at(e.path) : std::vector<Bytes>{};
    std::size_t run = 0;
    for (const auto& op : e.ops) {
      if (op.unit_bytes.size() != op.count) {
        throw Error(ErrorCode::Inconsistent, "chunk byte lengths missing for " + e.path.str());
      }
      if (op.kind == OpKind::Insert) {
        if (run >= segs.size() || segs[run].size() != op.byte_total()) {
          throw Error(ErrorCode::Inconsistent, "inserted chunk bytes disagree with lengths for " + e.path.str());
        }
        ++run;
      }
    }
  }
}

}  // namespace detail

/// Builds the in-memory package from a change set and its two trees.
inline UpdatePackage make_package(const ChangeSet& cs, const FileTree& orig, const FileTree& upd) {
  UpdatePackage pkg;
  pkg.header.chunk_spec = cs.chunk_spec;
  pkg.header.source_digest = tree_digest(orig);
  pkg.header.target_digest = tree_digest(upd);

  for (const auto& c : cs.changed_dirs) {
    pkg.manifest.push_back(MetadataEntry{EntryType::Directory, c.path, c.kind, {}});
  }
  for (const auto& c : cs.changed_files) {
    pkg.manifest.push_back(MetadataEntry{EntryType::File, c.path, c.kind, {}});
    if (c.kind == ChangeKind::Insert) {
      const Entry* e = upd.find(c.path);
      if (e == nullptr || !e->is_file()) {
        throw Error(ErrorCode::Inconsistent, "inserted file absent from target tree: " + c.path.str());
      }
      pkg.segment_store[c.path] = {Bytes(e->content().begin(), e->content().end())};
    }
  }
  for (const auto& [path, d] : cs.textual_diffs) {
    if (d.segments.size() != d.ops.insert_runs()) {
      throw Error(ErrorCode::Inconsistent, "segment count mismatch for " + path.str());
    }
    pkg.manifest.push_back(MetadataEntry{EntryType::Textual, path, ChangeKind::Insert, d.ops});
    if (!d.segments.empty()) pkg.segment_store[path] = d.segments;
  }
  for (const auto& [path, d] : cs.binary_diffs) {
    if (d.segments.size() != d.ops.insert_runs()) {
      throw Error(ErrorCode::Inconsistent, "segment count mismatch for " + path.str());
    }
    pkg.manifest.push_back(MetadataEntry{EntryType::Binary, path, ChangeKind::Insert, d.ops});
    if (!d.segments.empty()) pkg.segment_store[path] = d.segments;
  }
  detail::check_consistency(pkg);
  return pkg;
}

/// Serializes and gzips a package. Deterministic.
inline Bytes encode_package(const UpdatePackage& pkg) {
  using namespace detail;
  check_consistency(pkg);
  Bytes body;
  put_str(body, std::string_view(kPackageMagic, 4));
  put_u8(body, pkg.header.version);
  put_u32(body, pkg.header.chunk_spec.window_bytes);
  put_u32(body, pkg.header.chunk_spec.boundary_mask_bits);
  put_u32(body, pkg.header.chunk_spec.min_chunk_bytes);
  put_u32(body, pkg.header.chunk_spec.max_chunk_bytes);
  put_bytes(body, pkg.header.source_digest);
  put_bytes(body, pkg.header.target_digest);

  std::string manifest;
  for (const auto& e : pkg.manifest) {
    manifest.push_back(static_cast<char>(e.type));
    manifest.push_back('\t');
    manifest += percent_encode(e.path.str());
    manifest.push_back('\t');
    manifest += format_ops(e);
    manifest.push_back('\n');
  }
  put_u32(body, static_cast<std::uint32_t>(pkg.manifest.size()));
  put_u64(body, manifest.size());
  put_str(body, manifest);

  // segments follow manifest order, run indices ascending
  std::uint32_t count = 0;
  for (const auto& [_, segs] : pkg.segment_store) count += static_cast<std::uint32_t>(segs.size());
  put_u32(body, count);
  for (const auto& e : pkg.manifest) {
    if (expected_segments(e) == 0) continue;
    const auto& segs = pkg.segment_store.at(e.path);
    for (std::uint32_t run = 0; run < segs.size(); ++run) {
      put_u32(body, static_cast<std::uint32_t>(e.path.str().size()));
      put_str(body, e.path.str());
      put_u32(body, run);
      put_u64(body, segs[run].size());
      put_bytes(body, segs[run]);
    }
  }
  return gzip::compress(body);
}

inline Bytes encode_package(const ChangeSet& cs, const FileTree& orig, const FileTree& upd) {
  return encode_package(make_package(cs, orig, upd));
}

inline UpdatePackage decode_package(ByteView bytes) {
  using namespace detail;
  const Bytes body = gzip::decompress(bytes, /*strict_header=*/true);
  Reader r(body);
  if (body.size() < 4) throw Error(ErrorCode::Truncated, "body shorter than magic");
  auto magic = r.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kPackageMagic)) throw Error(ErrorCode::BadMagic, "bad package magic");
  UpdatePackage pkg;
  pkg.header.version = r.u8("version");
  if (pkg.header.version != kPackageVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "package version " + std::to_string(pkg.header.version));
  }
  auto& cs = pkg.header.chunk_spec;
  cs.window_bytes = r.u32("chunk window");
  cs.boundary_mask_bits = r.u32("mask bits");
  cs.min_chunk_bytes = r.u32("min chunk");
  cs.max_chunk_bytes = r.u32("max chunk");
  try {
    cs.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptStream, std::string("invalid chunk spec in header: ") + e.what());
  }
  auto src = r.take(32, "source digest");
  std::copy(src.begin(), src.end(), pkg.header.source_digest.begin());
  auto dst = r.take(32, "target digest");
  std::copy(dst.begin(), dst.end(), pkg.header.target_digest.begin());

  const std::uint32_t entries = r.u32("entry count");
  const std::uint64_t mlen = r.u64("manifest length");
  if (mlen > r.remaining()) throw Error(ErrorCode::Truncated, "manifest extends past end of body");
  std::string_view text = as_string_view(r.take(static_cast<std::size_t>(mlen), "manifest"));
  std::size_t lineno = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    if (nl == std::string_view::npos) {
      throw Error(ErrorCode::MalformedManifest, "manifest line " + std::to_string(lineno + 1) + " unterminated");
    }
    pkg.manifest.push_back(parse_manifest_line(text.substr(0, nl), ++lineno));
    text.remove_prefix(nl + 1);
  }
  if (pkg.manifest.size() != entries) {
    throw Error(ErrorCode::MalformedManifest, "manifest has " + std::to_string(pkg.manifest.size()) +
                                                  " entries, header says " + std::to_string(entries));
  }

  const std::uint32_t nseg = r.u32("segment count");
  std::map<RelPath, std::map<std::uint32_t, Bytes>> runs;
  for (std::uint32_t i = 0; i < nseg; ++i) {
    const std::size_t at = r.offset();
    const std::uint32_t plen = r.u32("segment path length");
    if (plen > r.remaining()) throw Error(ErrorCode::Truncated, "segment path past end at offset " + std::to_string(at));
    std::string raw = to_string(r.take(plen, "segment path"));
    RelPath path;
    try {
      path = RelPath::parse(raw);
    } catch (const Error&) {
      throw Error(ErrorCode::Inconsistent, "invalid segment path at offset " + std::to_string(at));
    }
    if (path.str() != raw) throw Error(ErrorCode::Inconsistent, "non-normalized segment path " + raw);
    const std::uint32_t run = r.u32("segment run index");
    const std::uint64_t len = r.u64("segment length");
    if (len > r.remaining()) {
      throw Error(ErrorCode::Truncated, "segment " + raw + "#" + std::to_string(run) + " extends past end of body");
    }
    auto payload = r.take(static_cast<std::size_t>(len), "segment payload");
    if (!runs[path].emplace(run, Bytes(payload.begin(), payload.end())).second) {
      throw Error(ErrorCode::Inconsistent, "duplicate segment " + raw + "#" + std::to_string(run));
    }
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::CorruptStream, "trailing bytes after segment store at offset " + std::to_string(r.offset()));
  }
  for (auto& [path, by_run] : runs) {
    auto& list = pkg.segment_store[path];
    std::uint32_t expect = 0;
    for (auto& [run, bytes] : by_run) {
      if (run != expect++) throw Error(ErrorCode::Inconsistent, "segment runs not contiguous for " + path.str());
      list.push_back(std::move(bytes));
    }
  }
  check_consistency(pkg);
  return pkg;
}

inline std::uint64_t package_size(ByteView pkg_bytes) { return pkg_bytes.size(); }

/// Recovers the change set carried by a package.
inline ChangeSet to_changeset(const UpdatePackage& pkg) {
  ChangeSet cs;
  cs.chunk_spec = pkg.header.chunk_spec;
  auto segs = [&](const RelPath& p) {
    auto it = pkg.segment_store.find(p);
    return it == pkg.segment_store.end() ? std::vector<Bytes>{} : it->second;
  };
  for (const auto& e : pkg.manifest) {
    switch (e.type) {
      case EntryType::Directory: cs.changed_dirs.push_back({e.path, e.tag}); break;
      case EntryType::File: cs.changed_files.push_back({e.path, e.tag}); break;
      case EntryType::Textual: cs.textual_diffs[e.path] = TextDiff{e.ops, segs(e.path)}; break;
      case EntryType::Binary: cs.binary_diffs[e.path] = BinaryDiff{e.ops, segs(e.path)}; break;
    }
  }
  return cs;
}

}  // namespace satpatch
