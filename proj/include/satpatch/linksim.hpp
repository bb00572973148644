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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "satpatch/diffgen.hpp"
#include "satpatch/gzip.hpp"
#include "satpatch/tar.hpp"

namespace satpatch {

inline constexpr std::uint64_t kBytesPerKB = 1024;
inline constexpr double kDefaultUplinkBps = 200'000.0;

struct ContactWindow {
  double start_s = 0;
  double duration_s = 0;
};

struct LinkModel {
  double uplink_bandwidth_bps = kDefaultUplinkBps;
  std::vector<ContactWindow> contact_windows;

  void validate() const {
    if (!(uplink_bandwidth_bps > 0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
    for (std::size_t i = 0; i < contact_windows.size(); ++i) {
      const auto& w = contact_windows[i];
      if (w.duration_s < 0) throw Error(ErrorCode::InvalidArgument, "negative window duration");
      if (i > 0) {
        const auto& p = contact_windows[i - 1];
        if (w.start_s < p.start_s + p.duration_s) {
          throw Error(ErrorCode::InvalidArgument, "contact windows must be sorted and non-overlapping");
        }
      }
    }
  }
};

/// Seconds to push `package_bytes` through the uplink.
inline double transmission_latency(std::uint64_t package_bytes, const LinkModel& link = {}) {
  link.validate();
  return static_cast<double>(package_bytes) * 8.0 / link.uplink_bandwidth_bps;
}

/// A byte count as an exact fraction, for sizes reported in fractional KB.
struct ExactBytes {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static ExactBytes from_bytes(std::uint64_t b) { return {b, 1}; }

  /// Parses a KB figure such as "188,845.50" (KB = 1024 bytes).
  static ExactBytes from_kb(std::string_view text) {
    std::uint64_t digits = 0, den = 1;
    bool frac = false, any = false;
    for (char c : text) {
      if (c == ',') continue;
      if (c == '.' && !frac) {
        frac = true;
        continue;
      }
      if (c < '0' || c > '9') throw Error(ErrorCode::InvalidArgument, "bad KB figure '" + std::string(text) + "'");
      digits = digits * 10 + static_cast<std::uint64_t>(c - '0');
      if (frac) den *= 10;
      any = true;
    }
    if (!any) throw Error(ErrorCode::InvalidArgument, "empty KB figure");
    return {digits * kBytesPerKB, den};
  }
};

/// round_half_up(num / den) for non-negative operands.
inline std::uint64_t round_half_up(unsigned __int128 num, unsigned __int128 den) {
  return static_cast<std::uint64_t>((2 * num + den) / (2 * den));
}

/// Latency in hundredths of a second, rounded half-up, computed exactly.
/// Bandwidth must be an integral number of bits per second.
inline std::uint64_t latency_centiseconds(ExactBytes size, std::uint64_t bandwidth_bps) {
  if (bandwidth_bps == 0) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  unsigned __int128 num = static_cast<unsigned __int128>(size.num) * 8 * 100;
  unsigned __int128 den = static_cast<unsigned __int128>(size.den) * bandwidth_bps;
  return round_half_up(num, den);
}

/// Size in hundredths of a KB, rounded half-up.
inline std::uint64_t kb_centis(std::uint64_t bytes) { return round_half_up(bytes * std::uint64_t{100}, kBytesPerKB); }

/// "1234567" -> "12,345.67" with `group` thousands separators.
inline std::string format_centis(std::uint64_t centis, bool group = false) {
  std::string whole = std::to_string(centis / 100);
  if (group) {
    for (int i = static_cast<int>(whole.size()) - 3; i > 0; i -= 3) whole.insert(static_cast<std::size_t>(i), ",");
  }
  std::string frac = std::to_string(centis % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return whole + "." + frac;
}

struct BaselineSizes {
  std::uint64_t b1_bytes = 0;  // whole image
  std::uint64_t b2_bytes = 0;  // application layer
  std::uint64_t b3_bytes = 0;  // changed files only
};

inline std::uint64_t gzip_tar_size(const std::vector<tar::Record>& recs) { return gzip::compress(tar::write(recs)).size(); }

/// Upload sizes of the three whole-unit strategies. `app_prefix` names the
/// directory standing in for the application layer.
inline BaselineSizes baseline_sizes(const FileTree& orig, const FileTree& upd, const ChangeSet& changeset,
                                    std::string_view app_prefix = "app") {
  (void)orig;
  BaselineSizes out;
  auto all = to_tar_records(upd);
  out.b1_bytes = gzip_tar_size(all);

  std::vector<tar::Record> layer;
  for (const auto& [path, e] : upd.entries()) {
    if (!path.within(app_prefix)) continue;
    tar::Record r{path.str(), e.is_dir(), Bytes(e.content().begin(), e.content().end())};
    layer.push_back(std::move(r));
  }
  if (layer.empty()) throw Error(ErrorCode::NoMatch, "application prefix '" + std::string(app_prefix) + "' matches nothing");
  out.b2_bytes = gzip_tar_size(layer);

  std::vector<RelPath> changed;
  for (const auto& c : changeset.changed_files) {
    if (c.kind == ChangeKind::Insert) changed.push_back(c.path);
  }
  for (const auto& [p, _] : changeset.textual_diffs) changed.push_back(p);
  for (const auto& [p, _] : changeset.binary_diffs) changed.push_back(p);
  std::sort(changed.begin(), changed.end());
  std::vector<tar::Record> files;
  for (const auto& p : changed) {
    const Entry* e = upd.find(p);
    if (e == nullptr || !e->is_file()) continue;
    files.push_back(tar::Record{p.str(), false, Bytes(e->content().begin(), e->content().end())});
  }
  out.b3_bytes = gzip_tar_size(files);
  return out;
}

struct ModRatioReport {
  std::uint64_t s_preserved_bytes = 0;
  std::uint64_t s_upd_bytes = 0;
  double ratio = 0;
  bool degenerate = false;  // s_upd == 0
};

inline std::uint64_t retained_bytes(const TextDiff& d, ByteView orig_content) {
  auto lines = split_lines(orig_content);
  std::uint64_t n = 0;
  std::size_t i = 0;
  for (const auto& op : d.ops) {
    if (op.kind == OpKind::Insert) continue;
    if (op.kind == OpKind::Retain) {
      for (std::uint64_t k = 0; k < op.count; ++k) n += lines[i + k].size();
    }
    i += op.count;
  }
  return n;
}

inline std::uint64_t retained_bytes(const BinaryDiff& d) {
  std::uint64_t n = 0;
  for (const auto& op : d.ops) n += op.kind == OpKind::Retain ? op.byte_total() : 0;
  return n;
}

/// Bytes preserved from orig in a single file pair, via the same line- or
/// chunk-level analysis used for packaging.
inline std::uint64_t preserved_bytes(const Entry& orig, const Entry& upd, const ChunkBoundarySpec& spec = {}) {
  if (orig.content_hash == upd.content_hash) return upd.size();
  if (orig.textual && upd.textual) {
    return retained_bytes(line_diff(split_lines(orig.content()), split_lines(upd.content())), orig.content());
  }
  return retained_bytes(chunk_diff(chunkify(orig.content(), spec), chunkify(upd.content(), spec)));
}

/// 1 - S_preserved / S_upd.
inline ModRatioReport modification_ratio(const FileTree& orig, const FileTree& upd, const ChunkBoundarySpec& spec = {}) {
  ModRatioReport r;
  for (const auto& [path, e] : upd.entries()) {
    if (!e.is_file()) continue;
    r.s_upd_bytes += e.size();
    const Entry* o = orig.find(path);
    if (o != nullptr && o->is_file()) r.s_preserved_bytes += preserved_bytes(*o, e, spec);
  }
  if (r.s_upd_bytes == 0) {
    r.degenerate = true;
    r.ratio = 0;
    return r;
  }
  r.ratio = 1.0 - static_cast<double>(r.s_preserved_bytes) / static_cast<double>(r.s_upd_bytes);
  return r;
}

struct ScheduleResult {
  bool deliverable = false;
  std::size_t passes_used = 0;
  double completion_time_s = 0;  // absolute; meaningful when deliverable
  std::uint64_t undelivered_bits = 0;
};

/// Greedy fill of contact windows in order at full bandwidth.
inline ScheduleResult schedule_upload(std::uint64_t package_bytes, const LinkModel& link) {
  link.validate();
  if (link.contact_windows.empty()) throw Error(ErrorCode::InvalidArgument, "no contact windows");
  ScheduleResult r;
  const double bw = link.uplink_bandwidth_bps;
  std::uint64_t remaining = package_bytes * 8;
  if (remaining == 0) {
    r.deliverable = true;
    r.completion_time_s = link.contact_windows.front().start_s;
    return r;
  }
  for (const auto& w : link.contact_windows) {
    if (w.duration_s <= 0) continue;
    const double capacity = w.duration_s * bw;
    ++r.passes_used;
    if (static_cast<double>(remaining) <= capacity) {
      r.deliverable = true;
      r.completion_time_s = w.start_s + static_cast<double>(remaining) / bw;
      return r;
    }
    remaining -= static_cast<std::uint64_t>(capacity);
  }
  r.undelivered_bits = remaining;
  return r;
}

}  // namespace satpatch
