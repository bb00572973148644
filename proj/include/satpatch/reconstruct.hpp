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

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "satpatch/package.hpp"

namespace satpatch {

struct ApplyReport {
  std::size_t files_added = 0;
  std::size_t files_deleted = 0;
  std::size_t files_patched = 0;
  std::size_t dirs_added = 0;
  std::size_t dirs_deleted = 0;
  bool verified = false;
  std::vector<RelPath> mismatch;
};

/// Two-pointer replay of an edit script. Retain copies original units,
/// delete skips them, insert splices the next segment and consumes no
/// original unit.
inline Bytes apply_file(std::span<const ByteView> init_units, const EditOps& ops, std::span<const Bytes> seg_list) {
  if (ops.orig_units() != init_units.size()) {
    throw Error(ErrorCode::ApplyFailed, "edit ops cover " + std::to_string(ops.orig_units()) +
                                            " original units, file has " + std::to_string(init_units.size()));
  }
  if (ops.insert_runs() != seg_list.size()) {
    throw Error(ErrorCode::ApplyFailed, "expected " + std::to_string(ops.insert_runs()) + " segments, got " +
                                            std::to_string(seg_list.size()));
  }
  Bytes out;
  std::size_t index_init = 0;
  std::size_t index_seg = 0;
  for (const auto& op : ops) {
    switch (op.kind) {
      case OpKind::Retain:
        for (std::uint64_t k = 0; k < op.count; ++k, ++index_init) {
          out.insert(out.end(), init_units[index_init].begin(), init_units[index_init].end());
        }
        break;
      case OpKind::Delete:
        index_init += op.count;
        break;
      case OpKind::Insert:
        out.insert(out.end(), seg_list[index_seg].begin(), seg_list[index_seg].end());
        ++index_seg;
        break;
    }
  }
  return out;
}

inline Bytes apply_text(ByteView original, const EditOps& ops, std::span<const Bytes> seg_list) {
  auto lines = split_lines(original);
  return apply_file(lines, ops, seg_list);
}

/// Chunk-mode replay. Unit boundaries come from the byte lengths attached to
/// retain and delete runs; the original is never re-chunked.
inline Bytes apply_binary(ByteView original, const EditOps& ops, std::span<const Bytes> seg_list) {
  std::vector<ByteView> units;
  std::size_t off = 0;
  std::size_t run = 0;
  for (const auto& op : ops) {
    if (op.unit_bytes.size() != op.count) throw Error(ErrorCode::ApplyFailed, "chunk op without byte lengths");
    if (op.kind == OpKind::Insert) {
      if (run >= seg_list.size() || seg_list[run].size() != op.byte_total()) {
        throw Error(ErrorCode::ApplyFailed, "inserted segment size disagrees with chunk lengths");
      }
      ++run;
      continue;
    }
    for (auto len : op.unit_bytes) {
      if (len > original.size() - off) throw Error(ErrorCode::ApplyFailed, "chunk lengths overrun original file");
      units.push_back(original.subspan(off, static_cast<std::size_t>(len)));
      off += static_cast<std::size_t>(len);
    }
  }
  if (off != original.size()) throw Error(ErrorCode::ApplyFailed, "chunk lengths do not cover original file");
  return apply_file(units, ops, seg_list);
}

inline bool verify_tree(const FileTree& tree, const Digest& expected) { return tree_digest(tree) == expected; }

/// Rebuilds the target tree next to `orig`. `orig` is never modified; any
/// failure throws before a result exists.
inline std::pair<FileTree, ApplyReport> apply_package(const FileTree& orig, const UpdatePackage& pkg) {
  if (tree_digest(orig) != pkg.header.source_digest) {
    throw Error(ErrorCode::BaseMismatch, "package was built against base " + to_hex(pkg.header.source_digest));
  }
  FileTree work = orig;
  ApplyReport report;
  auto fail = [](const RelPath& p, const std::string& why) { return Error(ErrorCode::ApplyFailed, p.str() + ": " + why); };
  auto segments_for = [&](const RelPath& p) -> std::span<const Bytes> {
    auto it = pkg.segment_store.find(p);
    return it == pkg.segment_store.end() ? std::span<const Bytes>{} : std::span<const Bytes>(it->second);
  };

  std::vector<const MetadataEntry*> dir_del, dir_ins, file_del, file_ins, patches;
  for (const auto& e : pkg.manifest) {
    switch (e.type) {
      case EntryType::Directory: (e.tag == ChangeKind::Insert ? dir_ins : dir_del).push_back(&e); break;
      case EntryType::File: (e.tag == ChangeKind::Insert ? file_ins : file_del).push_back(&e); break;
      default: patches.push_back(&e); break;
    }
  }
  auto by_path = [](const MetadataEntry* a, const MetadataEntry* b) { return a->path < b->path; };
  std::sort(dir_ins.begin(), dir_ins.end(), by_path);
  std::sort(dir_del.begin(), dir_del.end(), [&](auto* a, auto* b) { return by_path(b, a); });

  for (const auto* e : file_del) {
    const Entry* cur = work.find(e->path);
    if (cur == nullptr || !cur->is_file()) throw fail(e->path, "file to delete does not exist");
    work.erase(e->path);
    ++report.files_deleted;
  }
  for (const auto* e : dir_del) {
    const Entry* cur = work.find(e->path);
    if (cur == nullptr || !cur->is_dir()) throw fail(e->path, "directory to delete does not exist");
    if (work.has_children(e->path)) throw fail(e->path, "directory not empty after manifest deletions");
    work.erase(e->path);
    ++report.dirs_deleted;
  }
  for (const auto* e : dir_ins) {
    if (work.contains(e->path)) throw fail(e->path, "directory to insert already exists");
    try {
      work.insert(e->path, Entry::directory());
    } catch (const Error& err) {
      throw fail(e->path, err.what());
    }
    ++report.dirs_added;
  }
  for (const auto* e : file_ins) {
    if (work.contains(e->path)) throw fail(e->path, "file to insert already exists");
    auto segs = segments_for(e->path);
    if (segs.size() != 1) throw fail(e->path, "inserted file needs exactly one payload");
    try {
      work.insert(e->path, Entry::file(segs[0]));
    } catch (const Error& err) {
      throw fail(e->path, err.what());
    }
    ++report.files_added;
  }
  for (const auto* e : patches) {
    const Entry* cur = work.find(e->path);
    if (cur == nullptr || !cur->is_file()) throw fail(e->path, "file to patch does not exist");
    Bytes rebuilt;
    try {
      rebuilt = e->type == EntryType::Textual ? apply_text(cur->content(), e->ops, segments_for(e->path))
                                              : apply_binary(cur->content(), e->ops, segments_for(e->path));
    } catch (const Error& err) {
      throw fail(e->path, err.what());
    }
    work.put(e->path, Entry::file(std::move(rebuilt)));
    ++report.files_patched;
  }

  if (!verify_tree(work, pkg.header.target_digest)) {
    throw Error(ErrorCode::DigestMismatch, "reconstructed tree digest " + to_hex(tree_digest(work)) +
                                               " != expected " + to_hex(pkg.header.target_digest));
  }
  report.verified = true;
  return {std::move(work), std::move(report)};
}

}  // namespace satpatch
