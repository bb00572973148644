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

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "satpatch/common.hpp"

namespace satpatch {

enum class OpKind : char { Retain = 'R', Delete = 'D', Insert = 'I' };

/// One run of an edit script. `unit_bytes` is filled only for chunk-level
/// scripts and then holds one byte length per covered chunk.
struct EditOp {
  OpKind kind = OpKind::Retain;
  std::uint64_t count = 0;
  std::vector<std::uint64_t> unit_bytes;

  std::uint64_t byte_total() const { return std::accumulate(unit_bytes.begin(), unit_bytes.end(), std::uint64_t{0}); }

  friend bool operator==(const EditOp&, const EditOp&) = default;
};

/// Run-length edit script. Adjacent runs of the same kind are always merged.
class EditOps {
 public:
  EditOps() = default;
  EditOps(std::initializer_list<EditOp> ops) {
    for (const auto& op : ops) push(op.kind, op.count, op.unit_bytes);
  }

  void push(OpKind kind, std::uint64_t count, std::vector<std::uint64_t> unit_bytes = {}) {
    if (count == 0) return;
    if (!ops_.empty() && ops_.back().kind == kind) {
      ops_.back().count += count;
      auto& ub = ops_.back().unit_bytes;
      ub.insert(ub.end(), unit_bytes.begin(), unit_bytes.end());
      return;
    }
    ops_.push_back(EditOp{kind, count, std::move(unit_bytes)});
  }

  const std::vector<EditOp>& ops() const noexcept { return ops_; }
  std::vector<EditOp>& mutable_ops() noexcept { return ops_; }
  bool empty() const noexcept { return ops_.empty(); }
  std::size_t size() const noexcept { return ops_.size(); }
  auto begin() const { return ops_.begin(); }
  auto end() const { return ops_.end(); }

  std::uint64_t count_of(OpKind k) const {
    std::uint64_t n = 0;
    for (const auto& op : ops_) n += op.kind == k ? op.count : 0;
    return n;
  }
  std::uint64_t orig_units() const { return count_of(OpKind::Retain) + count_of(OpKind::Delete); }
  std::uint64_t upd_units() const { return count_of(OpKind::Retain) + count_of(OpKind::Insert); }
  std::uint64_t edit_distance() const { return count_of(OpKind::Delete) + count_of(OpKind::Insert); }

  std::size_t insert_runs() const {
    std::size_t n = 0;
    for (const auto& op : ops_) n += op.kind == OpKind::Insert ? 1 : 0;
    return n;
  }

  /// Text form such as "R1 I1 R1" (debugging and test messages).
  std::string to_string() const {
    std::string s;
    for (const auto& op : ops_) {
      if (!s.empty()) s.push_back(' ');
      s.push_back(static_cast<char>(op.kind));
      s += std::to_string(op.count);
    }
    return s;
  }

  friend bool operator==(const EditOps&, const EditOps&) = default;

 private:
  std::vector<EditOp> ops_;
};

}  // namespace satpatch
