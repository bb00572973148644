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

// Linear-space shortest edit script (forward/reverse middle-snake search with
// divide and conquer). The result has the minimum number of deletions plus
// insertions; among minimal scripts, every gap between two retain runs lists
// its deletions before its insertions.

#include <cstdint>
#include <span>
#include <vector>

#include "satpatch/editops.hpp"

namespace satpatch {

namespace detail {

template <class T>
class MiddleSnakeDiff {
 public:
  MiddleSnakeDiff(std::span<const T> a, std::span<const T> b) : a_(a), b_(b) {}

  EditOps run() {
    solve(0, a_.size(), 0, b_.size());
    return canonicalize(raw_);
  }

 private:
  using Index = std::ptrdiff_t;

  void emit(OpKind k, std::size_t n) { raw_.push(k, n); }

  void solve(std::size_t a_lo, std::size_t a_hi, std::size_t b_lo, std::size_t b_hi) {
    // common prefix
    std::size_t pre = 0;
    while (a_lo + pre < a_hi && b_lo + pre < b_hi && a_[a_lo + pre] == b_[b_lo + pre]) ++pre;
    emit(OpKind::Retain, pre);
    a_lo += pre;
    b_lo += pre;
    // common suffix
    std::size_t suf = 0;
    while (a_hi - suf > a_lo && b_hi - suf > b_lo && a_[a_hi - suf - 1] == b_[b_hi - suf - 1]) ++suf;
    a_hi -= suf;
    b_hi -= suf;

    if (a_lo == a_hi) {
      emit(OpKind::Insert, b_hi - b_lo);
    } else if (b_lo == b_hi) {
      emit(OpKind::Delete, a_hi - a_lo);
    } else {
      Index x = 0, y = 0;
      if (bisect(a_lo, a_hi, b_lo, b_hi, x, y)) {
        solve(a_lo, a_lo + static_cast<std::size_t>(x), b_lo, b_lo + static_cast<std::size_t>(y));
        solve(a_lo + static_cast<std::size_t>(x), a_hi, b_lo + static_cast<std::size_t>(y), b_hi);
      } else {
        emit(OpKind::Delete, a_hi - a_lo);
        emit(OpKind::Insert, b_hi - b_lo);
      }
    }
    emit(OpKind::Retain, suf);
  }

  // Finds a point (x, y) on a shortest path through the sub-grid. Returns
  // false when the two ranges share no element.
  bool bisect(std::size_t a_lo, std::size_t a_hi, std::size_t b_lo, std::size_t b_hi, Index& out_x,
              Index& out_y) {
    const Index n = static_cast<Index>(a_hi - a_lo);
    const Index m = static_cast<Index>(b_hi - b_lo);
    const Index max_d = (n + m + 1) / 2;
    const Index v_offset = max_d;
    const Index v_length = 2 * max_d + 2;
    fwd_.assign(static_cast<std::size_t>(v_length), -1);
    rev_.assign(static_cast<std::size_t>(v_length), -1);
    fwd_[static_cast<std::size_t>(v_offset + 1)] = 0;
    rev_[static_cast<std::size_t>(v_offset + 1)] = 0;
    const Index delta = n - m;
    const bool front = (delta % 2) != 0;
    Index k1start = 0, k1end = 0, k2start = 0, k2end = 0;

    auto A = [&](Index i) -> const T& { return a_[a_lo + static_cast<std::size_t>(i)]; };
    auto B = [&](Index j) -> const T& { return b_[b_lo + static_cast<std::size_t>(j)]; };
    auto V1 = [&](Index i) -> Index& { return fwd_[static_cast<std::size_t>(i)]; };
    auto V2 = [&](Index i) -> Index& { return rev_[static_cast<std::size_t>(i)]; };

    for (Index d = 0; d < max_d; ++d) {
      for (Index k1 = -d + k1start; k1 <= d - k1end; k1 += 2) {
        const Index k1_off = v_offset + k1;
        Index x1;
        if (k1 == -d || (k1 != d && V1(k1_off - 1) < V1(k1_off + 1))) {
          x1 = V1(k1_off + 1);
        } else {
          x1 = V1(k1_off - 1) + 1;
        }
        Index y1 = x1 - k1;
        while (x1 < n && y1 < m && A(x1) == B(y1)) {
          ++x1;
          ++y1;
        }
        V1(k1_off) = x1;
        if (x1 > n) {
          k1end += 2;
        } else if (y1 > m) {
          k1start += 2;
        } else if (front) {
          const Index k2_off = v_offset + delta - k1;
          if (k2_off >= 0 && k2_off < v_length && V2(k2_off) != -1) {
            const Index x2 = n - V2(k2_off);
            if (x1 >= x2) {
              out_x = x1;
              out_y = y1;
              return true;
            }
          }
        }
      }
      for (Index k2 = -d + k2start; k2 <= d - k2end; k2 += 2) {
        const Index k2_off = v_offset + k2;
        Index x2;
        if (k2 == -d || (k2 != d && V2(k2_off - 1) < V2(k2_off + 1))) {
          x2 = V2(k2_off + 1);
        } else {
          x2 = V2(k2_off - 1) + 1;
        }
        Index y2 = x2 - k2;
        while (x2 < n && y2 < m && A(n - x2 - 1) == B(m - y2 - 1)) {
          ++x2;
          ++y2;
        }
        V2(k2_off) = x2;
        if (x2 > n) {
          k2end += 2;
        } else if (y2 > m) {
          k2start += 2;
        } else if (!front) {
          const Index k1_off = v_offset + delta - k2;
          if (k1_off >= 0 && k1_off < v_length && V1(k1_off) != -1) {
            const Index x1 = V1(k1_off);
            const Index y1 = v_offset + x1 - k1_off;
            if (x1 >= n - x2) {
              out_x = x1;
              out_y = y1;
              return true;
            }
          }
        }
      }
    }
    return false;
  }

  static EditOps canonicalize(const EditOps& raw) {
    EditOps out;
    std::uint64_t del = 0, ins = 0;
    for (const auto& op : raw) {
      switch (op.kind) {
        case OpKind::Delete: del += op.count; break;
        case OpKind::Insert: ins += op.count; break;
        case OpKind::Retain:
          out.push(OpKind::Delete, del);
          out.push(OpKind::Insert, ins);
          del = ins = 0;
          out.push(OpKind::Retain, op.count);
          break;
      }
    }
    out.push(OpKind::Delete, del);
    out.push(OpKind::Insert, ins);
    return out;
  }

  std::span<const T> a_;
  std::span<const T> b_;
  std::vector<Index> fwd_;
  std::vector<Index> rev_;
  EditOps raw_;
};

}  // namespace detail

/// Minimal edit script turning `a` into `b`. `T` needs only operator==.
template <class T>
EditOps shortest_edit_script(std::span<const T> a, std::span<const T> b) {
  return detail::MiddleSnakeDiff<T>(a, b).run();
}

template <class T>
EditOps shortest_edit_script(const std::vector<T>& a, const std::vector<T>& b) {
  return shortest_edit_script(std::span<const T>(a), std::span<const T>(b));
}

}  // namespace satpatch
