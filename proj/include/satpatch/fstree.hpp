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
#include <compare>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "satpatch/common.hpp"
#include "satpatch/sha256.hpp"
#include "satpatch/tar.hpp"

namespace satpatch {

inline constexpr std::size_t kTextualScanBytes = 8192;

namespace detail {

// Length of the valid UTF-8 sequence starting at s[i], 0 if invalid, or -1 if
// the sequence is cut off by the end of the buffer.
inline int utf8_sequence(ByteView s, std::size_t i) {
  const std::uint8_t c = s[i];
  if (c < 0x80) return 1;
  int len;
  std::uint32_t cp;
  if ((c & 0xE0) == 0xC0) {
    len = 2;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    len = 3;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    len = 4;
    cp = c & 0x07;
  } else {
    return 0;
  }
  for (int k = 1; k < len; ++k) {
    if (i + static_cast<std::size_t>(k) >= s.size()) return -1;
    std::uint8_t cc = s[i + static_cast<std::size_t>(k)];
    if ((cc & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (cc & 0x3F);
  }
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return 0;
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

inline bool valid_utf8(ByteView s, bool allow_cut_tail) {
  std::size_t i = 0;
  while (i < s.size()) {
    int n = utf8_sequence(s, i);
    if (n == -1) return allow_cut_tail;
    if (n == 0) return false;
    i += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace detail

/// True iff the first 8 KiB hold no NUL byte and decode as UTF-8. A code
/// point split by the 8 KiB cut is ignored.
inline bool classify_textual(ByteView content) {
  const bool cut = content.size() > kTextualScanBytes;
  ByteView head = content.first(cut ? kTextualScanBytes : content.size());
  for (auto b : head) {
    if (b == 0) return false;
  }
  return detail::valid_utf8(head, cut);
}

inline Digest hash_content(ByteView content) { return sha256(content); }

/// A normalized relative path: '/'-separated, no empty, "." or ".." segments.
class RelPath {
 public:
  RelPath() = default;

  static RelPath parse(std::string_view raw) {
    if (!raw.empty() && raw.front() == '/') {
      throw Error(ErrorCode::PathEscape, "absolute path: " + std::string(raw));
    }
    std::string norm;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
      std::size_t next = raw.find('/', pos);
      if (next == std::string_view::npos) next = raw.size();
      std::string_view seg = raw.substr(pos, next - pos);
      pos = next + 1;
      if (seg.empty() || seg == ".") continue;
      if (seg == "..") throw Error(ErrorCode::PathEscape, "path escapes root: " + std::string(raw));
      if (seg.find('\0') != std::string_view::npos) {
        throw Error(ErrorCode::InvalidPath, "NUL in path: " + std::string(raw));
      }
      if (!norm.empty()) norm.push_back('/');
      norm.append(seg);
    }
    if (norm.empty()) throw Error(ErrorCode::InvalidPath, "empty path: '" + std::string(raw) + "'");
    if (!detail::valid_utf8(ByteView(reinterpret_cast<const std::uint8_t*>(norm.data()), norm.size()), false)) {
      throw Error(ErrorCode::InvalidPath, "path is not UTF-8: " + norm);
    }
    RelPath p;
    p.path_ = std::move(norm);
    return p;
  }

  const std::string& str() const noexcept { return path_; }

  std::vector<std::string_view> segments() const {
    std::vector<std::string_view> out;
    std::string_view s = path_;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      std::size_t next = s.find('/', pos);
      if (next == std::string_view::npos) next = s.size();
      out.push_back(s.substr(pos, next - pos));
      pos = next + 1;
    }
    return out;
  }

  std::optional<RelPath> parent() const {
    auto slash = path_.rfind('/');
    if (slash == std::string::npos) return std::nullopt;
    RelPath p;
    p.path_ = path_.substr(0, slash);
    return p;
  }

  /// True if `this` equals `prefix` or lies beneath it.
  bool within(std::string_view prefix) const {
    if (prefix.empty()) return true;
    if (path_.size() < prefix.size() || path_.compare(0, prefix.size(), prefix) != 0) return false;
    return path_.size() == prefix.size() || path_[prefix.size()] == '/';
  }

  friend bool operator==(const RelPath&, const RelPath&) = default;
  friend auto operator<=>(const RelPath& a, const RelPath& b) { return a.path_.compare(b.path_) <=> 0; }

 private:
  std::string path_;
};

enum class EntryKind { Directory, File };

struct Entry {
  EntryKind kind = EntryKind::Directory;
  std::shared_ptr<const Bytes> data;  // null for directories
  Digest content_hash{};
  bool textual = false;

  static Entry directory() { return Entry{}; }

  static Entry file(Bytes content) {
    Entry e;
    e.kind = EntryKind::File;
    e.content_hash = hash_content(content);
    e.textual = classify_textual(content);
    e.data = std::make_shared<const Bytes>(std::move(content));
    return e;
  }

  bool is_dir() const noexcept { return kind == EntryKind::Directory; }
  bool is_file() const noexcept { return kind == EntryKind::File; }

  ByteView content() const noexcept { return data ? ByteView(*data) : ByteView{}; }
  std::size_t size() const noexcept { return data ? data->size() : 0; }

  friend bool operator==(const Entry& a, const Entry& b) {
    return a.kind == b.kind && a.content_hash == b.content_hash && a.textual == b.textual &&
           std::equal(a.content().begin(), a.content().end(), b.content().begin(), b.content().end());
  }
};

/// In-memory model of an unpacked application image. Entries iterate in
/// byte-lexicographic path order, which makes parents precede children.
class FileTree {
 public:
  using Map = std::map<RelPath, Entry>;

  FileTree() = default;
  explicit FileTree(std::string root_label) : root_label_(std::move(root_label)) {}

  const std::string& root_label() const noexcept { return root_label_; }
  const Map& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const Entry* find(const RelPath& p) const {
    auto it = entries_.find(p);
    return it == entries_.end() ? nullptr : &it->second;
  }
  bool contains(const RelPath& p) const { return entries_.count(p) != 0; }

  /// Inserts an entry; its parent directory must already be present.
  void insert(const RelPath& p, Entry e) {
    if (auto par = p.parent()) {
      const Entry* pe = find(*par);
      if (pe == nullptr || !pe->is_dir()) {
        throw Error(ErrorCode::InvalidPath, "parent directory missing for " + p.str());
      }
    }
    if (entries_.count(p)) throw Error(ErrorCode::InvalidPath, "duplicate entry " + p.str());
    entries_.emplace(p, std::move(e));
  }

  /// Creates missing parent directories, then inserts or replaces the entry.
  void put(const RelPath& p, Entry e) {
    if (auto par = p.parent()) ensure_directory(*par);
    entries_.insert_or_assign(p, std::move(e));
  }

  void ensure_directory(const RelPath& p) {
    if (const Entry* e = find(p)) {
      if (!e->is_dir()) throw Error(ErrorCode::InvalidPath, "not a directory: " + p.str());
      return;
    }
    if (auto par = p.parent()) ensure_directory(*par);
    entries_.emplace(p, Entry::directory());
  }

  void erase(const RelPath& p) { entries_.erase(p); }

  bool has_children(const RelPath& p) const {
    // siblings such as "a-b" sort between "a" and "a/x", so scan the whole prefix range
    const std::string& s = p.str();
    for (auto it = entries_.upper_bound(p); it != entries_.end() && it->first.str().starts_with(s); ++it) {
      if (it->first.within(s)) return true;
    }
    return false;
  }

  std::uint64_t total_file_bytes() const {
    std::uint64_t n = 0;
    for (const auto& [_, e] : entries_) n += e.size();
    return n;
  }

  friend bool operator==(const FileTree& a, const FileTree& b) { return a.entries_ == b.entries_; }

 private:
  std::string root_label_;
  Map entries_;
};

/// Digest over (path, kind, content hash) of every entry in iteration order.
/// Entries at or beneath `prefix`, paths unchanged. An empty prefix keeps all.
inline FileTree subtree(const FileTree& tree, std::string_view prefix) {
  FileTree out(tree.root_label());
  for (const auto& [p, e] : tree.entries()) {
    if (p.within(prefix)) out.put(p, e);
  }
  return out;
}

inline Digest tree_digest(const FileTree& tree) {
  Sha256 h;
  for (const auto& [path, e] : tree.entries()) {
    h.update(path.str());
    const std::uint8_t sep[2] = {0, static_cast<std::uint8_t>(e.is_dir() ? 'd' : 'f')};
    h.update(ByteView(sep, 2));
    if (e.is_file()) h.update(ByteView(e.content_hash));
  }
  return h.finish();
}

inline Bytes read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + p.string());
  Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::Io, "read failed: " + p.string());
  return out;
}

inline void write_file(const std::filesystem::path& p, ByteView data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot create " + p.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + p.string());
}

inline FileTree load_tree_from_tar(ByteView archive, std::string label = "tar") {
  FileTree tree(std::move(label));
  for (auto& rec : tar::read(archive)) {
    std::string_view raw = rec.path;
    // "." and "./" name the archive root
    if (raw.empty() || raw == ".") continue;
    RelPath p = RelPath::parse(raw);
    if (rec.is_dir) {
      tree.ensure_directory(p);
    } else {
      if (const Entry* prior = tree.find(p); prior && prior->is_dir()) {
        throw Error(ErrorCode::InvalidPath, "file shadows directory: " + p.str());
      }
      tree.put(p, Entry::file(std::move(rec.content)));
    }
  }
  return tree;
}

/// Loads a directory, or an uncompressed tar archive when `source` is a file.
inline FileTree load_tree(const std::filesystem::path& source) {
  namespace fs = std::filesystem;
  std::error_code ec;
  auto st = fs::status(source, ec);
  if (ec || !fs::exists(st)) throw Error(ErrorCode::Io, "cannot read source " + source.string());
  if (fs::is_regular_file(st)) return load_tree_from_tar(read_file(source), source.string());
  if (!fs::is_directory(st)) throw Error(ErrorCode::Unsupported, "not a directory or archive: " + source.string());

  FileTree tree(source.string());
  std::vector<std::pair<RelPath, fs::path>> found;
  for (auto it = fs::recursive_directory_iterator(source, ec); it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (ec) throw Error(ErrorCode::Io, "walk failed under " + source.string() + ": " + ec.message());
    found.emplace_back(RelPath::parse(fs::relative(it->path(), source).generic_string()), it->path());
  }
  if (ec) throw Error(ErrorCode::Io, "walk failed under " + source.string() + ": " + ec.message());
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [rel, abs] : found) {
    auto lst = fs::symlink_status(abs);
    if (fs::is_directory(lst)) {
      tree.insert(rel, Entry::directory());
    } else if (fs::is_regular_file(lst)) {
      tree.insert(rel, Entry::file(read_file(abs)));
    } else {
      throw Error(ErrorCode::Unsupported, "unsupported file type (symlink/special): " + rel.str());
    }
  }
  return tree;
}

/// Writes the tree beneath `dir`, which is created if needed.
inline void materialize(const FileTree& tree, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& [path, e] : tree.entries()) {
    fs::path target = dir / fs::path(path.str());
    if (e.is_dir()) {
      fs::create_directories(target);
    } else {
      write_file(target, e.content());
    }
  }
}

inline std::vector<tar::Record> to_tar_records(const FileTree& tree) {
  std::vector<tar::Record> recs;
  recs.reserve(tree.size());
  for (const auto& [path, e] : tree.entries()) {
    tar::Record r;
    r.path = path.str();
    r.is_dir = e.is_dir();
    if (e.is_file()) r.content.assign(e.content().begin(), e.content().end());
    recs.push_back(std::move(r));
  }
  return recs;
}

}  // namespace satpatch
