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
#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include "random_trees.hpp"

namespace satpatch {
namespace {

using testing::TempDir;

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run(const std::string& args) {
  std::string cmd = std::string(SATPATCH_CLI_PATH) + " " + args + " 2>/dev/null";
  CliResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = ::pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    testing::TreeGen gen(31, {30, 20000});
    a_ = gen.tree();
    b_ = gen.mutate(a_);
    materialize(a_, dir_ / "a");
    materialize(b_, dir_ / "b");
  }
  TempDir dir_{"cli"};
  FileTree a_, b_;
};

TEST_F(Cli, IdentityPipeline) {
  ASSERT_EQ(run("diff " + q(dir_ / "a") + " " + q(dir_ / "a") + " -o " + q(dir_ / "p")).code, 0);
  ASSERT_EQ(run("apply " + q(dir_ / "a") + " " + q(dir_ / "p") + " -o " + q(dir_ / "u")).code, 0);
  EXPECT_EQ(load_tree(dir_ / "u"), a_);
}

TEST_F(Cli, DiffApplyVerify) {
  ASSERT_EQ(run("diff " + q(dir_ / "a") + " " + q(dir_ / "b") + " -o " + q(dir_ / "p")).code, 0);
  CliResult r = run("--json apply " + q(dir_ / "a") + " " + q(dir_ / "p") + " -o " + q(dir_ / "u"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("\"schema\": \"satpatch/1\""), std::string::npos);
  EXPECT_NE(r.out.find("\"verified\": true"), std::string::npos);
  EXPECT_EQ(load_tree(dir_ / "u"), b_);

  std::string hex = to_hex(tree_digest(b_));
  EXPECT_EQ(run("digest " + q(dir_ / "u")).out, hex + "\n");
  EXPECT_EQ(run("verify " + q(dir_ / "u") + " --digest " + hex).code, 0);
  EXPECT_EQ(run("verify " + q(dir_ / "a") + " --digest " + hex).code, a_ == b_ ? 0 : 3);
}

TEST_F(Cli, WrongBaseLeavesEverythingUntouched) {
  ASSERT_EQ(run("diff " + q(dir_ / "a") + " " + q(dir_ / "b") + " -o " + q(dir_ / "p")).code, 0);
  FileTree other;
  other.put(RelPath::parse("unrelated"), Entry::file(to_bytes("x\n")));
  materialize(other, dir_ / "o");
  EXPECT_EQ(run("apply " + q(dir_ / "o") + " " + q(dir_ / "p") + " -o " + q(dir_ / "u")).code, 3);
  EXPECT_FALSE(std::filesystem::exists(dir_ / "u"));
  EXPECT_EQ(load_tree(dir_ / "o"), other);
}

TEST_F(Cli, CorruptPackageIsInputError) {
  ASSERT_EQ(run("diff " + q(dir_ / "a") + " " + q(dir_ / "b") + " -o " + q(dir_ / "p")).code, 0);
  Bytes pkg = read_file(dir_ / "p");
  pkg[pkg.size() / 2] ^= 0x10;
  write_file(dir_ / "p", pkg);
  EXPECT_EQ(run("apply " + q(dir_ / "a") + " " + q(dir_ / "p") + " -o " + q(dir_ / "u")).code, 2);
  EXPECT_FALSE(std::filesystem::exists(dir_ / "u"));
}

TEST_F(Cli, RefusesNonEmptyOutput) {
  ASSERT_EQ(run("diff " + q(dir_ / "a") + " " + q(dir_ / "a") + " -o " + q(dir_ / "p")).code, 0);
  EXPECT_EQ(run("apply " + q(dir_ / "a") + " " + q(dir_ / "p") + " -o " + q(dir_ / "b")).code, 2);
  EXPECT_EQ(load_tree(dir_ / "b"), b_);
}

TEST_F(Cli, EstimatePrintsLatency) {
  // 49,807 bytes = 48.64 KB
  write_file(dir_ / "p48", Bytes(49807, 0));
  CliResult r = run("estimate " + q(dir_ / "p48"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("48.64"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("1.99"), std::string::npos) << r.out;

  std::ofstream(dir_ / "w") << "# start duration\n100 600\n";
  CliResult s = run("--json estimate " + q(dir_ / "p48") + " --windows " + q(dir_ / "w"));
  EXPECT_EQ(s.code, 0);
  EXPECT_NE(s.out.find("\"passes_used\": 1"), std::string::npos) << s.out;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("diff").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("digest " + q(dir_ / "missing")).code, 2);
}

TEST_F(Cli, LayerWorkflow) {
  std::string store = q(dir_ / "store");
  ASSERT_EQ(run("commit " + store + " " + q(dir_ / "a") + " --tag V1.0").code, 0);
  ASSERT_EQ(run("mark-stable " + store + " --tag V1.0").code, 0);
  ASSERT_EQ(run("commit " + store + " " + q(dir_ / "b") + " --tag V1.1").code, 0);
  EXPECT_EQ(run("commit " + store + " " + q(dir_ / "b") + " --tag V1.1").code, 2);
  CliResult r = run("--json rollback " + store + " --exit-code 137 --checkout " + q(dir_ / "co"));
  EXPECT_EQ(r.code, 4) << r.out;
  EXPECT_NE(r.out.find("\"to\": \"V1.0\""), std::string::npos) << r.out;
  EXPECT_EQ(load_tree(dir_ / "co"), a_);
  EXPECT_EQ(run("rollback " + store + " --exit-code 1").code, 0);  // already on a stable layer
}

TEST_F(Cli, GenVariantAndBench) {
  AppFixtureSpec fx;
  materialize(make_app_fixture(fx), dir_ / "img");
  CliResult g = run("gen-variant --ratio 0.2 --seed 3 --scope app " + q(dir_ / "img") + " " + q(dir_ / "img2"));
  ASSERT_EQ(g.code, 0);
  CliResult b = run("--json bench " + q(dir_ / "img") + " " + q(dir_ / "img2"));
  ASSERT_EQ(b.code, 0);
  EXPECT_NE(b.out.find("\"delta\""), std::string::npos);
  EXPECT_NE(b.out.find("\"B3\""), std::string::npos);
  EXPECT_EQ(run("bench " + q(dir_ / "img") + " " + q(dir_ / "img2") + " --app-prefix nope").code, 2);
}

}  // namespace
}  // namespace satpatch
