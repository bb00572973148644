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

#include <random>

#include "oracle.hpp"
#include "random_trees.hpp"
#include "satpatch/diffgen.hpp"

namespace satpatch {
namespace {

std::vector<ByteView> lines_of(const std::vector<std::string>& v) {
  std::vector<ByteView> out;
  for (const auto& s : v) out.emplace_back(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
  return out;
}

std::vector<std::string> chars(std::string_view s) {
  std::vector<std::string> out;
  for (char c : s) out.emplace_back(1, c);
  return out;
}

Bytes random_blob(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  Bytes b(n);
  for (auto& c : b) c = static_cast<std::uint8_t>(rng());
  return b;
}

TEST(EditOps, CoalescesAndCounts) {
  EditOps ops;
  ops.push(OpKind::Retain, 2);
  ops.push(OpKind::Retain, 1);
  ops.push(OpKind::Delete, 0);
  ops.push(OpKind::Insert, 4);
  EXPECT_EQ(ops.to_string(), "R3 I4");
  EXPECT_EQ(ops.orig_units(), 3u);
  EXPECT_EQ(ops.upd_units(), 7u);
  EXPECT_EQ(ops.edit_distance(), 4u);
  EXPECT_EQ(ops.insert_runs(), 1u);
}

TEST(SplitLines, Examples) {
  EXPECT_EQ(split_lines(to_bytes("a\nb\n")).size(), 2u);
  const Bytes text = to_bytes("a\nb");
  auto tail = split_lines(text);
  ASSERT_EQ(tail.size(), 2u);
  EXPECT_EQ(as_string_view(tail[0]), "a\n");
  EXPECT_EQ(as_string_view(tail[1]), "b");
  EXPECT_TRUE(split_lines({}).empty());
}

TEST(LineDiff, Identity) {
  std::vector<std::string> x = {"a\n", "b\n", "c\n"};
  TextDiff d = line_diff(lines_of(x), lines_of(x));
  EXPECT_EQ(d.ops.to_string(), "R3");
  EXPECT_TRUE(d.segments.empty());
  EXPECT_TRUE(line_diff({}, {}).ops.empty());
}

TEST(LineDiff, EmptyToOne) {
  std::vector<std::string> b = {"a"};
  TextDiff d = line_diff({}, lines_of(b));
  EXPECT_EQ(d.ops.to_string(), "I1");
  ASSERT_EQ(d.segments.size(), 1u);
  EXPECT_EQ(to_string(d.segments[0]), "a");
}

TEST(LineDiff, ClassicPair) {
  auto a = chars("abcabba");
  auto b = chars("cbabac");
  TextDiff d = line_diff(lines_of(a), lines_of(b));
  EXPECT_EQ(d.ops.edit_distance(), 5u);
  EXPECT_EQ(testing::edit_distance_oracle(a, b), 5u);
}

TEST(LineDiff, DeletesPrecedeInsertsInsideAGap) {
  std::vector<std::string> a = {"x\n", "old\n", "y\n"};
  std::vector<std::string> b = {"x\n", "new\n", "y\n"};
  EXPECT_EQ(line_diff(lines_of(a), lines_of(b)).ops.to_string(), "R1 D1 I1 R1");
}

TEST(LineDiff, MatchesOracleOnRandomPairs) {
  std::mt19937_64 rng(42);
  for (int iter = 0; iter < 2000; ++iter) {
    std::vector<std::string> a(rng() % 30), b(rng() % 30);
    for (auto& s : a) s = std::string(1, static_cast<char>('a' + rng() % 4));
    for (auto& s : b) s = std::string(1, static_cast<char>('a' + rng() % 4));
    TextDiff d = line_diff(lines_of(a), lines_of(b));
    ASSERT_EQ(d.ops.edit_distance(), testing::edit_distance_oracle(a, b)) << iter;
    ASSERT_EQ(d.ops.orig_units(), a.size());
    ASSERT_EQ(d.ops.upd_units(), b.size());
  }
}

TEST(Myers, GenericElementType) {
  std::vector<int> a = {1, 2, 3, 4, 5}, b = {0, 1, 3, 4, 6};
  EditOps ops = shortest_edit_script(a, b);
  EXPECT_EQ(ops.edit_distance(), testing::edit_distance_oracle(a, b));
}

TEST(ChunkSpec, ParseAndValidate) {
  auto s = ChunkBoundarySpec::parse("32,10,128,4096");
  EXPECT_EQ(s.window_bytes, 32u);
  EXPECT_EQ(s.boundary_mask_bits, 10u);
  EXPECT_EQ(s.min_chunk_bytes, 128u);
  EXPECT_EQ(s.max_chunk_bytes, 4096u);
  EXPECT_THROW(ChunkBoundarySpec::parse("32,10,128"), Error);
  EXPECT_THROW(ChunkBoundarySpec::parse("32,10,128,64"), Error);
  EXPECT_THROW(ChunkBoundarySpec::parse("32,x,128,4096"), Error);
}

TEST(Chunker, Degenerate) {
  EXPECT_TRUE(chunkify({}).empty());
  Bytes small = random_blob(1, 200);
  auto c = chunkify(small);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].length(), 200u);
}

TEST(Chunker, CoversInputWithinBounds) {
  Bytes blob = random_blob(3, 1 << 20);
  ChunkBoundarySpec spec;
  auto chunks = chunkify(blob, spec);
  std::size_t off = 0;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    EXPECT_EQ(chunks[i].offset, off);
    EXPECT_LE(chunks[i].length(), spec.max_chunk_bytes);
    if (i + 1 < chunks.size()) EXPECT_GE(chunks[i].length(), spec.min_chunk_bytes);
    off += chunks[i].length();
  }
  EXPECT_EQ(off, blob.size());
  // mean chunk size near 2^11 + min
  EXPECT_GT(chunks.size(), 200u);
  EXPECT_LT(chunks.size(), 800u);
}

TEST(Chunker, AppendOnlyTouchesLastChunk) {
  Bytes blob = random_blob(5, 1 << 20);
  Bytes ext = blob;
  ext.push_back(0x42);
  auto a = chunkify(blob);
  auto b = chunkify(ext);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i + 1 < a.size(); ++i) EXPECT_EQ(a[i].hash, b[i].hash);
  EXPECT_NE(a.back().hash, b.back().hash);
}

TEST(Chunker, ForcedCutOnUniformInput) {
  Bytes zeros(100000, 0);
  auto chunks = chunkify(zeros);
  for (std::size_t i = 0; i + 1 < chunks.size(); ++i) EXPECT_GE(chunks[i].length(), 256u);
  std::size_t total = 0;
  for (auto& c : chunks) total += c.length();
  EXPECT_EQ(total, zeros.size());
}

TEST(ChunkDiff, IdenticalAndDisjoint) {
  Bytes a = random_blob(9, 40000), b = random_blob(10, 30000);
  auto ca = chunkify(a), cb = chunkify(b);
  BinaryDiff same = chunk_diff(ca, ca);
  EXPECT_EQ(same.ops.to_string(), "R" + std::to_string(ca.size()));
  BinaryDiff diff = chunk_diff(ca, cb);
  EXPECT_EQ(diff.ops.to_string(), "D" + std::to_string(ca.size()) + " I" + std::to_string(cb.size()));
  ASSERT_EQ(diff.segments.size(), 1u);
  EXPECT_EQ(diff.segments[0], b);
  EXPECT_EQ(diff.ops.ops()[0].byte_total(), a.size());
}

TEST(ChunkDiff, SingleChunkReplaced) {
  Bytes a = random_blob(12, 1 << 16);
  auto ca = chunkify(a);
  ASSERT_GE(ca.size(), 10u);
  const std::size_t k = 4;
  Bytes b = a;
  std::size_t mid = ca[k].offset + ca[k].length() / 2;
  b[mid] ^= 0xFF;  // far from both boundaries' hash windows only if the chunk is long
  auto cb = chunkify(b);
  BinaryDiff d = chunk_diff(ca, cb);
  std::vector<Digest> ha, hb;
  for (auto& c : ca) ha.push_back(c.hash);
  for (auto& c : cb) hb.push_back(c.hash);
  EXPECT_EQ(d.ops.edit_distance(), testing::edit_distance_oracle(ha, hb));
  if (ca.size() == cb.size() && d.ops.edit_distance() == 2) {
    EXPECT_EQ(d.ops.to_string(), "R" + std::to_string(k) + " D1 I1 R" + std::to_string(ca.size() - k - 1));
  }
}

TEST(CompareTrees, IdenticalIsEmpty) {
  testing::TreeGen gen(1, {50, 20000});
  FileTree t = gen.tree();
  EXPECT_TRUE(compare_trees(t, t).empty());
}

TEST(CompareTrees, TextualExample) {
  FileTree a, b;
  a.put(RelPath::parse("m.py"), Entry::file(to_bytes("a\nb\n")));
  b.put(RelPath::parse("m.py"), Entry::file(to_bytes("a\nc\nb\n")));
  ChangeSet cs = compare_trees(a, b);
  ASSERT_EQ(cs.textual_diffs.size(), 1u);
  const TextDiff& d = cs.textual_diffs.at(RelPath::parse("m.py"));
  EXPECT_EQ(d.ops.to_string(), "R1 I1 R1");
  ASSERT_EQ(d.segments.size(), 1u);
  EXPECT_EQ(to_string(d.segments[0]), "c\n");
  EXPECT_TRUE(cs.changed_files.empty());
}

TEST(CompareTrees, PresenceChanges) {
  FileTree a, b;
  a.put(RelPath::parse("bin.o"), Entry::file(Bytes{0x7F, 0x45, 0x00}));
  b.put(RelPath::parse("logs"), Entry::directory());
  ChangeSet cs = compare_trees(a, b);
  ASSERT_EQ(cs.changed_files.size(), 1u);
  EXPECT_EQ(cs.changed_files[0], (PathChange{RelPath::parse("bin.o"), ChangeKind::Delete}));
  ASSERT_EQ(cs.changed_dirs.size(), 1u);
  EXPECT_EQ(cs.changed_dirs[0], (PathChange{RelPath::parse("logs"), ChangeKind::Insert}));
}

TEST(CompareTrees, MixedClassUsesChunkDiff) {
  FileTree a, b;
  a.put(RelPath::parse("f"), Entry::file(to_bytes("text\n")));
  b.put(RelPath::parse("f"), Entry::file(Bytes{0, 1, 2}));
  ChangeSet cs = compare_trees(a, b);
  EXPECT_TRUE(cs.textual_diffs.empty());
  EXPECT_TRUE(cs.changed_files.empty());
  ASSERT_EQ(cs.binary_diffs.size(), 1u);
  EXPECT_EQ(cs.binary_diffs.begin()->second.ops.to_string(), "D1 I1");
}

TEST(CompareTrees, KindChange) {
  FileTree a, b;
  a.put(RelPath::parse("x"), Entry::file(to_bytes("1\n")));
  b.put(RelPath::parse("x"), Entry::directory());
  ChangeSet cs = compare_trees(a, b);
  ASSERT_EQ(cs.changed_files.size(), 1u);
  EXPECT_EQ(cs.changed_files[0].kind, ChangeKind::Delete);
  ASSERT_EQ(cs.changed_dirs.size(), 1u);
  EXPECT_EQ(cs.changed_dirs[0].kind, ChangeKind::Insert);
}

TEST(CompareTrees, EachPathInAtMostOneCollection) {
  testing::TreeGen gen(77, {60, 30000});
  for (int i = 0; i < 20; ++i) {
    FileTree a = gen.tree();
    FileTree b = gen.mutate(a);
    ChangeSet cs = compare_trees(a, b);
    std::map<RelPath, int> seen;
    for (auto& [p, _] : cs.textual_diffs) ++seen[p];
    for (auto& [p, _] : cs.binary_diffs) ++seen[p];
    for (auto& [p, n] : seen) EXPECT_EQ(n, 1) << p.str();
    for (auto& c : cs.changed_files) EXPECT_FALSE(seen.count(c.path)) << c.path.str();
  }
}

}  // namespace
}  // namespace satpatch
