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
#include "satpatch/fstree.hpp"

namespace satpatch {
namespace {

using testing::TempDir;

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(to_hex(hash_content({})), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(to_hex(hash_content(to_bytes("abc"))), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Bytes long_input(1000000, 'a');
  EXPECT_EQ(to_hex(sha256(long_input)), "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST(Sha256, IncrementalMatchesOneShot) {
  Bytes data = to_bytes("the quick brown fox jumps over the lazy dog");
  Sha256 h;
  h.update(ByteView(data).subspan(0, 7));
  h.update(ByteView(data).subspan(7));
  EXPECT_EQ(h.finish(), sha256(data));
  EXPECT_EQ(digest_from_hex(to_hex(sha256(data))), sha256(data));
  EXPECT_THROW(digest_from_hex("zz"), Error);
}

TEST(Classify, Examples) {
  EXPECT_TRUE(classify_textual({}));
  EXPECT_TRUE(classify_textual(to_bytes("print('hi')\n")));
  const Bytes elf = {0x7F, 0x45, 0x4C, 0x46, 0x00, 0x01, 0x02};
  EXPECT_FALSE(classify_textual(elf));
}

TEST(Classify, Utf8Rules) {
  EXPECT_TRUE(classify_textual(to_bytes("caf\xC3\xA9\n")));
  EXPECT_FALSE(classify_textual(to_bytes("caf\xE9\n")));  // Latin-1
  EXPECT_FALSE(classify_textual(to_bytes("\xC0\x80")));   // overlong
  EXPECT_FALSE(classify_textual(to_bytes("\xED\xA0\x80")));  // surrogate

  // a multibyte sequence cut by the scan limit is tolerated only in longer content
  Bytes cut(8191, 'a');
  cut.push_back(0xC3);
  EXPECT_FALSE(classify_textual(cut));
  cut.push_back(0xA9);
  EXPECT_TRUE(classify_textual(cut));

  // a NUL past the scan window does not count
  Bytes late(9000, 'a');
  late[8500] = 0;
  EXPECT_TRUE(classify_textual(late));
}

TEST(RelPath, Normalizes) {
  EXPECT_EQ(RelPath::parse("a//b/./c/").str(), "a/b/c");
  EXPECT_EQ(RelPath::parse("a/b").parent()->str(), "a");
  EXPECT_FALSE(RelPath::parse("a").parent().has_value());
  EXPECT_TRUE(RelPath::parse("a/b").within("a"));
  EXPECT_FALSE(RelPath::parse("ab").within("a"));
}

TEST(RelPath, Rejects) {
  auto code = [](std::string_view s) {
    try {
      RelPath::parse(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code("../evil"), ErrorCode::PathEscape);
  EXPECT_EQ(code("a/../../b"), ErrorCode::PathEscape);
  EXPECT_EQ(code("/etc/passwd"), ErrorCode::PathEscape);
  EXPECT_EQ(code(""), ErrorCode::InvalidPath);
  EXPECT_EQ(code("./"), ErrorCode::InvalidPath);
  EXPECT_EQ(code("bad\xFF"), ErrorCode::InvalidPath);
}

TEST(FileTree, ParentsAndChildren) {
  FileTree t;
  EXPECT_THROW(t.insert(RelPath::parse("a/m.py"), Entry::file(to_bytes("x=1\n"))), Error);
  t.insert(RelPath::parse("a"), Entry::directory());
  t.insert(RelPath::parse("a-b"), Entry::directory());
  EXPECT_FALSE(t.has_children(RelPath::parse("a")));
  t.insert(RelPath::parse("a/m.py"), Entry::file(to_bytes("x=1\n")));
  EXPECT_TRUE(t.has_children(RelPath::parse("a")));
  EXPECT_EQ(t.size(), 3u);
  EXPECT_TRUE(t.find(RelPath::parse("a/m.py"))->textual);
  EXPECT_EQ(t.total_file_bytes(), 4u);
}

TEST(FileTree, LoadDirectory) {
  TempDir dir;
  EXPECT_EQ(load_tree(dir.path()).size(), 0u);
  std::filesystem::create_directories(dir / "a");
  write_file(dir / "a/m.py", to_bytes("x=1\n"));
  FileTree t = load_tree(dir.path());
  ASSERT_EQ(t.size(), 2u);
  EXPECT_TRUE(t.find(RelPath::parse("a"))->is_dir());
  EXPECT_TRUE(t.find(RelPath::parse("a/m.py"))->textual);
}

TEST(FileTree, RejectsSymlinks) {
  TempDir dir;
  write_file(dir / "f", to_bytes("x"));
  std::filesystem::create_symlink("f", dir / "link");
  EXPECT_THROW(load_tree(dir.path()), Error);
}

TEST(FileTree, TarEscapeRejected) {
  tar::Record r;
  r.path = "../evil";
  r.content = to_bytes("boom");
  Bytes archive = tar::write({r});
  try {
    load_tree_from_tar(archive);
    FAIL() << "expected path escape";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PathEscape);
    EXPECT_NE(std::string(e.what()).find("../evil"), std::string::npos);
  }
}

TEST(FileTree, TarRoundTrip) {
  testing::TreeGen gen(7, {40, 20000});
  for (int i = 0; i < 10; ++i) {
    FileTree t = gen.tree();
    t.put(RelPath::parse(std::string(120, 'd') + "/" + std::string(130, 'f')), Entry::file(to_bytes("long\n")));
    FileTree back = load_tree_from_tar(tar::write(to_tar_records(t)));
    EXPECT_EQ(back, t);
    EXPECT_EQ(tree_digest(back), tree_digest(t));
  }
}

TEST(FileTree, MaterializeRoundTrip) {
  testing::TreeGen gen(11, {30, 10000});
  FileTree t = gen.tree();
  TempDir dir;
  materialize(t, dir / "out");
  EXPECT_EQ(load_tree(dir / "out"), t);
}

TEST(TreeDigest, SensitiveToContentAndKind) {
  FileTree a;
  a.put(RelPath::parse("x"), Entry::file(to_bytes("1")));
  FileTree b;
  b.put(RelPath::parse("x"), Entry::file(to_bytes("2")));
  FileTree c;
  c.put(RelPath::parse("x"), Entry::directory());
  FileTree d;
  d.put(RelPath::parse("x"), Entry::file({}));
  EXPECT_NE(tree_digest(a), tree_digest(b));
  EXPECT_NE(tree_digest(c), tree_digest(d));
  EXPECT_NE(tree_digest(FileTree{}), tree_digest(c));
}

TEST(Gzip, DeterministicAndStrict) {
  Bytes data = to_bytes("hello hello hello hello\n");
  Bytes z = gzip::compress(data);
  EXPECT_EQ(z, gzip::compress(data));
  EXPECT_TRUE(std::equal(gzip::kCanonicalHeader.begin(), gzip::kCanonicalHeader.end(), z.begin()));
  EXPECT_EQ(gzip::decompress(z, true), data);

  Bytes trailing = z;
  trailing.push_back(0);
  EXPECT_THROW(gzip::decompress(trailing, true), Error);
  Bytes crc = z;
  crc[crc.size() - 6] ^= 1;
  try {
    gzip::decompress(crc, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CrcMismatch);
  }
  Bytes cut(z.begin(), z.end() - 3);
  EXPECT_THROW(gzip::decompress(cut, true), Error);
}

}  // namespace
}  // namespace satpatch
