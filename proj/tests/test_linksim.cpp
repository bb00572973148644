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

#include <gtest/gtest.h>

#include "random_trees.hpp"
#include "satpatch/linksim.hpp"

namespace satpatch {
namespace {

std::string latency(std::string_view kb) {
  return format_centis(latency_centiseconds(ExactBytes::from_kb(kb), 200000), true);
}

TEST(Latency, ReferenceSpotValues) {
  EXPECT_EQ(latency("48.64"), "1.99");
  EXPECT_EQ(latency("188,845.50"), "7,735.11");
  EXPECT_EQ(latency("1.35"), "0.06");
  EXPECT_EQ(latency("0"), "0.00");
}

TEST(Latency, FloatingFormAgrees) {
  EXPECT_DOUBLE_EQ(transmission_latency(0), 0.0);
  EXPECT_NEAR(transmission_latency(49807), 49807 * 8 / 200000.0, 1e-12);
  EXPECT_NEAR(transmission_latency(1024, LinkModel{100000, {}}), 0.08192, 1e-12);
}

TEST(Latency, HalfUpRounding) {
  EXPECT_EQ(round_half_up(5, 10), 1u);
  EXPECT_EQ(round_half_up(4, 10), 0u);
  EXPECT_EQ(round_half_up(15, 10), 2u);
  EXPECT_EQ(kb_centis(49807), 4864u);
  EXPECT_EQ(format_centis(773511, true), "7,735.11");
  EXPECT_EQ(format_centis(5, false), "0.05");
  EXPECT_THROW(ExactBytes::from_kb("1.2.3"), Error);
  EXPECT_THROW(ExactBytes::from_kb(""), Error);
}

TEST(Schedule, SingleWindow) {
  LinkModel link{200000, {{100.0, 600.0}}};
  ScheduleResult r = schedule_upload(1024, link);
  EXPECT_TRUE(r.deliverable);
  EXPECT_EQ(r.passes_used, 1u);
  EXPECT_NEAR(r.completion_time_s, 100.04096, 1e-9);
}

TEST(Schedule, ZeroBytes) {
  LinkModel link{200000, {{50.0, 600.0}, {5000.0, 600.0}}};
  ScheduleResult r = schedule_upload(0, link);
  EXPECT_TRUE(r.deliverable);
  EXPECT_EQ(r.passes_used, 0u);
  EXPECT_DOUBLE_EQ(r.completion_time_s, 50.0);
}

TEST(Schedule, MultiPass) {
  LinkModel link{200000, {{0, 600}, {6000, 600}, {12000, 600}, {18000, 600}}};
  ScheduleResult r = schedule_upload(30000ull * 1024, link);
  EXPECT_TRUE(r.deliverable);
  EXPECT_EQ(r.passes_used, 3u);
  // 245,760,000 bits: two full windows, then 5,760,000 bits = 28.8 s into the third
  EXPECT_NEAR(r.completion_time_s, 12028.8, 1e-6);
}

TEST(Schedule, Undeliverable) {
  LinkModel link{200000, {{0, 10}}};
  ScheduleResult r = schedule_upload(1 << 20, link);
  EXPECT_FALSE(r.deliverable);
  EXPECT_EQ(r.undelivered_bits, (1u << 23) - 2000000u);
}

TEST(Schedule, RejectsBadLinks) {
  EXPECT_THROW(schedule_upload(1, LinkModel{0, {{0, 1}}}), Error);
  EXPECT_THROW(schedule_upload(1, LinkModel{1000, {{10, 5}, {0, 5}}}), Error);
}

TEST(Baselines, IdenticalTreesShipEmptyB3) {
  AppFixtureSpec fx;
  FileTree t = make_app_fixture(fx);
  BaselineSizes b = baseline_sizes(t, t, compare_trees(t, t));
  EXPECT_EQ(b.b3_bytes, gzip::compress(tar::write({})).size());
  EXPECT_LE(b.b2_bytes, b.b1_bytes);
}

TEST(Baselines, NewFileOnly) {
  AppFixtureSpec fx;
  FileTree a = make_app_fixture(fx);
  FileTree b = a;
  b.put(RelPath::parse("app/new.txt"), Entry::file(to_bytes("hello\n")));
  BaselineSizes s = baseline_sizes(a, b, compare_trees(a, b));
  EXPECT_EQ(s.b3_bytes, gzip::compress(tar::write({{"app/new.txt", false, to_bytes("hello\n")}})).size());
  EXPECT_LT(s.b3_bytes, s.b2_bytes);
  EXPECT_LE(s.b2_bytes, s.b1_bytes);
}

TEST(Baselines, UnknownPrefix) {
  FileTree t;
  t.put(RelPath::parse("x"), Entry::file(to_bytes("1")));
  EXPECT_THROW(baseline_sizes(t, t, compare_trees(t, t), "nope"), Error);
}

TEST(ModificationRatio, Extremes) {
  testing::TreeGen gen(8, {40, 20000});
  FileTree t = gen.tree();
  while (t.total_file_bytes() == 0) t = gen.tree();
  EXPECT_EQ(modification_ratio(t, t).ratio, 0.0);
  FileTree other;
  other.put(RelPath::parse("zzz/unrelated.bin"), Entry::file(gen.binary(5000)));
  EXPECT_EQ(modification_ratio(t, other).ratio, 1.0);
  auto empty = modification_ratio(t, FileTree{});
  EXPECT_TRUE(empty.degenerate);
}

TEST(ModificationRatio, LineLevelAccounting) {
  FileTree a, b;
  a.put(RelPath::parse("m.py"), Entry::file(to_bytes("aaaa\nbbbb\n")));
  b.put(RelPath::parse("m.py"), Entry::file(to_bytes("aaaa\ncccc\nbbbb\n")));
  // 10 of 15 bytes retained
  EXPECT_NEAR(modification_ratio(a, b).ratio, 5.0 / 15.0, 1e-12);
}

}  // namespace
}  // namespace satpatch
