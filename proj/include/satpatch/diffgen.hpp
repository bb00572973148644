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

#include <cstring>
#include <map>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "satpatch/chunker.hpp"
#include "satpatch/editops.hpp"
#include "satpatch/fstree.hpp"
#include "satpatch/myers.hpp"

namespace satpatch {

enum class ChangeKind : char { Insert = 'I', Delete = 'D' };

struct PathChange {
  RelPath path;
  ChangeKind kind = ChangeKind::Insert;
  friend bool operator==(const PathChange&, const PathChange&) = default;
};

/// Line-level delta: one segment per insert run, holding the inserted lines
/// concatenated.
struct TextDiff {
  EditOps ops;
  std::vector<Bytes> segments;
  friend bool operator==(const TextDiff&, const TextDiff&) = default;
};

/// Chunk-level delta. Every op carries the byte length of each chunk it
/// covers; segments hold the inserted chunk bytes per insert run.
struct BinaryDiff {
  EditOps ops;
  std::vector<Bytes> segments;
  friend bool operator==(const BinaryDiff&, const BinaryDiff&) = default;
};

struct ChangeSet {
  ChunkBoundarySpec chunk_spec;
  std::vector<PathChange> changed_dirs;
  std::vector<PathChange> changed_files;
  std::map<RelPath, TextDiff> textual_diffs;
  std::map<RelPath, BinaryDiff> binary_diffs;

  bool empty() const {
    return changed_dirs.empty() && changed_files.empty() && textual_diffs.empty() && binary_diffs.empty();
  }
  friend bool operator==(const ChangeSet&, const ChangeSet&) = default;
};

/// Splits after every '\n'; an unterminated tail is its own line.
inline std::vector<ByteView> split_lines(ByteView content) {
  std::vector<ByteView> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i < content.size(); ++i) {
    if (content[i] == '\n') {
      lines.push_back(content.subspan(start, i + 1 - start));
      start = i + 1;
    }
  }
  if (start < content.size()) lines.push_back(content.subspan(start));
  return lines;
}

namespace detail {

struct DigestHash {
  std::size_t operator()(const Digest& d) const noexcept {
    std::size_t h;
    std::memcpy(&h, d.data(), sizeof h);
    return h;
  }
};

template <class Key, class Hash, class Range, class Proj>
std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> intern(const Range& a, const Range& b,
                                                                         Proj proj) {
  std::unordered_map<Key, std::uint32_t, Hash> ids;
  auto map = [&](const Range& r) {
    std::vector<std::uint32_t> out;
    out.reserve(r.size());
    for (const auto& x : r) out.push_back(ids.try_emplace(proj(x), static_cast<std::uint32_t>(ids.size())).first->second);
    return out;
  };
  auto ia = map(a);
  auto ib = map(b);
  return {std::move(ia), std::move(ib)};
}

}  // namespace detail

/// Minimal line-level edit script from `orig_lines` to `upd_lines`.
inline TextDiff line_diff(const std::vector<ByteView>& orig_lines, const std::vector<ByteView>& upd_lines) {
  auto [ia, ib] = detail::intern<std::string_view, std::hash<std::string_view>>(
      orig_lines, upd_lines, [](ByteView v) { return as_string_view(v); });
  TextDiff out;
  out.ops = shortest_edit_script(ia, ib);
  std::size_t j = 0;
  for (const auto& op : out.ops) {
    if (op.kind == OpKind::Delete) continue;
    if (op.kind == OpKind::Insert) {
      Bytes seg;
      for (std::uint64_t k = 0; k < op.count; ++k, ++j) seg.insert(seg.end(), upd_lines[j].begin(), upd_lines[j].end());
      out.segments.push_back(std::move(seg));
    } else {
      j += op.count;
    }
  }
  return out;
}

/// Edit script over chunk-hash sequences, annotated with chunk byte lengths.
inline BinaryDiff chunk_diff(const std::vector<Chunk>& orig_chunks, const std::vector<Chunk>& upd_chunks) {
  auto [ia, ib] = detail::intern<Digest, detail::DigestHash>(orig_chunks, upd_chunks,
                                                             [](const Chunk& c) { return c.hash; });
  EditOps plain = shortest_edit_script(ia, ib);
  BinaryDiff out;
  std::size_t i = 0, j = 0;
  for (const auto& op : plain) {
    std::vector<std::uint64_t> lens;
    lens.reserve(op.count);
    switch (op.kind) {
      case OpKind::Retain:
        for (std::uint64_t k = 0; k < op.count; ++k, ++i, ++j) lens.push_back(orig_chunks[i].length());
        break;
      case OpKind::Delete:
        for (std::uint64_t k = 0; k < op.count; ++k, ++i) lens.push_back(orig_chunks[i].length());
        break;
      case OpKind::Insert: {
        Bytes seg;
        for (std::uint64_t k = 0; k < op.count; ++k, ++j) {
          lens.push_back(upd_chunks[j].length());
          seg.insert(seg.end(), upd_chunks[j].bytes.begin(), upd_chunks[j].bytes.end());
        }
        out.segments.push_back(std::move(seg));
        break;
      }
    }
    out.ops.push(op.kind, op.count, std::move(lens));
  }
  return out;
}

/// Hierarchical comparison of two trees. Output lists are sorted by path.
inline ChangeSet compare_trees(const FileTree& orig, const FileTree& upd, const ChunkBoundarySpec& spec = {}) {
  spec.validate();
  ChangeSet cs;
  cs.chunk_spec = spec;
  auto record = [&](const RelPath& p, const Entry& e, ChangeKind kind) {
    (e.is_dir() ? cs.changed_dirs : cs.changed_files).push_back(PathChange{p, kind});
  };

  auto a = orig.entries().begin();
  auto b = upd.entries().begin();
  while (a != orig.entries().end() || b != upd.entries().end()) {
    if (b == upd.entries().end() || (a != orig.entries().end() && a->first < b->first)) {
      record(a->first, a->second, ChangeKind::Delete);
      ++a;
      continue;
    }
    if (a == orig.entries().end() || b->first < a->first) {
      record(b->first, b->second, ChangeKind::Insert);
      ++b;
      continue;
    }
    const RelPath& path = a->first;
    const Entry& eo = a->second;
    const Entry& eu = b->second;
    if (eo.kind != eu.kind) {
      record(path, eo, ChangeKind::Delete);
      record(path, eu, ChangeKind::Insert);
    } else if (eo.is_file() && eo.content_hash != eu.content_hash) {
      if (eo.textual && eu.textual) {
        cs.textual_diffs.emplace(path, line_diff(split_lines(eo.content()), split_lines(eu.content())));
      } else {
        cs.binary_diffs.emplace(path, chunk_diff(chunkify(eo.content(), spec), chunkify(eu.content(), spec)));
      }
    }
    ++a;
    ++b;
  }
  return cs;
}

}  // namespace satpatch
