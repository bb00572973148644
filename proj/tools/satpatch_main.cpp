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

// satpatch command-line interface.
//
// Exit codes: 0 success, 1 usage, 2 input/validation, 3 apply/verify
// failure, 4 rollback performed.

#include <unistd.h>

#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "satpatch/satpatch.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace satpatch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitApply = 3;
constexpr int kExitRollback = 4;
constexpr const char* kSchema = "satpatch/1";

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::BaseMismatch:
    case ErrorCode::ApplyFailed:
    case ErrorCode::DigestMismatch:
    case ErrorCode::Unrecoverable:
      return kExitApply;
    default:
      return kExitInput;
  }
}

struct Output {
  bool as_json = false;
  json doc = json::object();

  void emit(std::ostream& os) const {
    if (as_json) os << doc.dump(2) << "\n";
  }
};

void write_file_atomic(const fs::path& target, ByteView data) {
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(::getpid());
  write_file(tmp, data);
  fs::rename(tmp, target);
}

void materialize_atomic(const FileTree& tree, const fs::path& out) {
  if (fs::exists(out) && !(fs::is_directory(out) && fs::is_empty(out))) {
    throw Error(ErrorCode::InvalidArgument, "output exists and is not an empty directory: " + out.string());
  }
  fs::path tmp = out;
  tmp += ".tmp-" + std::to_string(::getpid());
  fs::remove_all(tmp);
  materialize(tree, tmp);
  if (fs::exists(out)) fs::remove(out);
  fs::rename(tmp, out);
}

ChunkBoundarySpec chunk_spec_from_env() {
  if (const char* env = std::getenv("SATPATCH_CHUNK_SPEC"); env != nullptr && *env != '\0') {
    return ChunkBoundarySpec::parse(env);
  }
  return {};
}

std::uint64_t bandwidth_bps(double kbps) {
  if (!(kbps > 0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  return static_cast<std::uint64_t>(std::llround(kbps * 1000.0));
}

std::vector<ContactWindow> read_windows(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::Io, "cannot open windows file " + p.string());
  std::vector<ContactWindow> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ContactWindow w;
    if (!(ls >> w.start_s >> w.duration_s)) throw Error(ErrorCode::InvalidArgument, "bad window line: " + line);
    out.push_back(w);
  }
  return out;
}

std::string row(std::string_view name, std::uint64_t bytes, std::uint64_t bps) {
  std::ostringstream os;
  os << std::left << std::setw(12) << name << std::right << std::setw(16)
     << format_centis(kb_centis(bytes), true) << std::setw(14)
     << format_centis(latency_centiseconds(ExactBytes::from_bytes(bytes), bps), true);
  return os.str();
}

json size_json(std::uint64_t bytes, std::uint64_t bps) {
  return json{{"bytes", bytes},
              {"size_kb", format_centis(kb_centis(bytes))},
              {"latency_s", format_centis(latency_centiseconds(ExactBytes::from_bytes(bytes), bps))}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"satpatch: content-aware delta updates for containerized applications"};
  app.require_subcommand(1);
  Output out;
  app.add_flag("--json", out.as_json, "Machine-readable output");

  std::string orig_path, upd_path, pkg_path, out_path, tree_path, digest_hex, windows_path, store_path, tag,
      app_id = "app", app_prefix = "app", phase = "runtime", checkout, scope;
  double kbps = 200.0, ratio = 0.10;
  int exit_code = 1;
  std::uint64_t seed = 0;

  auto* diff = app.add_subcommand("diff", "Build an update package from two trees");
  diff->add_option("orig", orig_path)->required();
  diff->add_option("upd", upd_path)->required();
  diff->add_option("-o,--output", out_path)->required();

  auto* apply = app.add_subcommand("apply", "Reconstruct the target tree from a base tree and a package");
  apply->add_option("orig", orig_path)->required();
  apply->add_option("package", pkg_path)->required();
  apply->add_option("-o,--output", out_path)->required();

  auto* verify = app.add_subcommand("verify", "Check a tree against an expected digest");
  verify->add_option("tree", tree_path)->required();
  verify->add_option("--digest", digest_hex)->required();

  auto* digest = app.add_subcommand("digest", "Print the tree digest");
  digest->add_option("tree", tree_path)->required();

  auto* estimate = app.add_subcommand("estimate", "Uplink latency of a package");
  estimate->add_option("package", pkg_path)->required();
  estimate->add_option("--bandwidth-kbps", kbps);
  estimate->add_option("--windows", windows_path, "File of '<start_s> <duration_s>' lines");

  auto* bench = app.add_subcommand("bench", "Compare package size against whole-unit baselines");
  bench->add_option("orig", orig_path)->required();
  bench->add_option("upd", upd_path)->required();
  bench->add_option("--app-prefix", app_prefix);
  bench->add_option("--bandwidth-kbps", kbps);

  auto* commit = app.add_subcommand("commit", "Commit a tree as a new layer");
  commit->add_option("store", store_path)->required();
  commit->add_option("tree", tree_path)->required();
  commit->add_option("--tag", tag)->required();
  commit->add_option("--app", app_id);

  auto* stable = app.add_subcommand("mark-stable", "Mark the active layer stable");
  stable->add_option("store", store_path)->required();
  stable->add_option("--tag", tag)->required();

  auto* rollback = app.add_subcommand("rollback", "Report a failure exit code and roll back");
  rollback->add_option("store", store_path)->required();
  rollback->add_option("--exit-code", exit_code)->required();
  rollback->add_option("--phase", phase)->check(CLI::IsMember({"update", "runtime"}));
  rollback->add_option("--checkout", checkout, "Materialize the resulting active layer here");

  auto* gen = app.add_subcommand("gen-variant", "Generate a synthetic update variant");
  gen->add_option("--ratio", ratio)->required();
  gen->add_option("--seed", seed)->required();
  gen->add_option("--scope", scope, "Only edit entries under this prefix");
  gen->add_option("in", tree_path)->required();
  gen->add_option("out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  out.doc["schema"] = kSchema;
  int rc = kExitOk;
  try {
    if (diff->parsed()) {
      out.doc["command"] = "diff";
      FileTree a = load_tree(orig_path);
      FileTree b = load_tree(upd_path);
      ChangeSet cs = compare_trees(a, b, chunk_spec_from_env());
      UpdatePackage pkg = make_package(cs, a, b);
      Bytes bytes = encode_package(pkg);
      write_file_atomic(out_path, bytes);
      out.doc["entries"] = pkg.manifest.size();
      out.doc["package_bytes"] = package_size(bytes);
      out.doc["target_digest"] = to_hex(pkg.header.target_digest);
      if (!out.as_json) {
        std::cout << "wrote " << out_path << ": " << pkg.manifest.size() << " entries, " << bytes.size()
                  << " bytes\n";
      }
    } else if (apply->parsed()) {
      out.doc["command"] = "apply";
      FileTree base = load_tree(orig_path);
      UpdatePackage pkg = decode_package(read_file(pkg_path));
      try {
        auto [tree, report] = apply_package(base, pkg);
        materialize_atomic(tree, out_path);
        out.doc["verified"] = report.verified;
        out.doc["files_added"] = report.files_added;
        out.doc["files_deleted"] = report.files_deleted;
        out.doc["files_patched"] = report.files_patched;
        out.doc["dirs_added"] = report.dirs_added;
        out.doc["dirs_deleted"] = report.dirs_deleted;
        if (!out.as_json) {
          std::cout << "applied: +" << report.files_added << " -" << report.files_deleted << " ~"
                    << report.files_patched << " files, +" << report.dirs_added << " -" << report.dirs_deleted
                    << " dirs, verified\n";
        }
      } catch (const Error& e) {
        // package decoded fine, so any failure here is an apply failure
        if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::Io) throw;
        throw Error(e.code() == ErrorCode::BaseMismatch || e.code() == ErrorCode::DigestMismatch ? e.code()
                                                                                                  : ErrorCode::ApplyFailed,
                    e.what());
      }
    } else if (verify->parsed()) {
      out.doc["command"] = "verify";
      FileTree t = load_tree(tree_path);
      Digest want = digest_from_hex(digest_hex);
      bool ok = verify_tree(t, want);
      out.doc["verified"] = ok;
      out.doc["digest"] = to_hex(tree_digest(t));
      if (!out.as_json) std::cout << (ok ? "verified" : "MISMATCH") << " " << to_hex(tree_digest(t)) << "\n";
      rc = ok ? kExitOk : kExitApply;
    } else if (digest->parsed()) {
      out.doc["command"] = "digest";
      std::string hex = to_hex(tree_digest(load_tree(tree_path)));
      out.doc["digest"] = hex;
      if (!out.as_json) std::cout << hex << "\n";
    } else if (estimate->parsed()) {
      out.doc["command"] = "estimate";
      const std::uint64_t bps = bandwidth_bps(kbps);
      const std::uint64_t size = package_size(read_file(pkg_path));
      out.doc["bandwidth_bps"] = bps;
      out.doc["package"] = size_json(size, bps);
      if (!out.as_json) {
        std::cout << std::left << std::setw(12) << "strategy" << std::right << std::setw(16) << "size_kb"
                  << std::setw(14) << "latency_s" << "\n";
        std::cout << row("delta", size, bps) << "\n";
      }
      if (!windows_path.empty()) {
        LinkModel link{static_cast<double>(bps), read_windows(windows_path)};
        ScheduleResult s = schedule_upload(size, link);
        out.doc["schedule"] = {{"deliverable", s.deliverable},
                               {"passes_used", s.passes_used},
                               {"completion_time_s", s.completion_time_s},
                               {"undelivered_bits", s.undelivered_bits}};
        if (!out.as_json) {
          if (s.deliverable) {
            std::cout << "delivered in " << s.passes_used << " pass(es), complete at t=" << s.completion_time_s
                      << " s\n";
          } else {
            std::cout << "undeliverable in horizon: " << s.undelivered_bits << " bits left after "
                      << s.passes_used << " pass(es)\n";
          }
        }
      }
    } else if (bench->parsed()) {
      out.doc["command"] = "bench";
      const std::uint64_t bps = bandwidth_bps(kbps);
      FileTree a = load_tree(orig_path);
      FileTree b = load_tree(upd_path);
      ChangeSet cs = compare_trees(a, b, chunk_spec_from_env());
      Bytes pkg = encode_package(cs, a, b);
      BaselineSizes base = baseline_sizes(a, b, cs, app_prefix);
      ModRatioReport mr = modification_ratio(subtree(a, app_prefix), subtree(b, app_prefix), cs.chunk_spec);
      out.doc["modification_ratio"] = mr.ratio;
      out.doc["rows"] = {{"B1", size_json(base.b1_bytes, bps)},
                         {"B2", size_json(base.b2_bytes, bps)},
                         {"B3", size_json(base.b3_bytes, bps)},
                         {"delta", size_json(pkg.size(), bps)}};
      if (!out.as_json) {
        std::cout << std::left << std::setw(12) << "strategy" << std::right << std::setw(16) << "size_kb"
                  << std::setw(14) << "latency_s" << "\n";
        std::cout << row("B1", base.b1_bytes, bps) << "\n"
                  << row("B2", base.b2_bytes, bps) << "\n"
                  << row("B3", base.b3_bytes, bps) << "\n"
                  << row("delta", pkg.size(), bps) << "\n";
        std::cout << "modification ratio " << std::fixed << std::setprecision(4) << mr.ratio << "\n";
      }
    } else if (commit->parsed()) {
      out.doc["command"] = "commit";
      LayerStack stack = load_store(store_path);
      if (stack.empty()) stack.set_app_id(app_id);
      stack.commit(load_tree(tree_path), tag);
      save_store(stack, store_path);
      out.doc["active"] = stack.active().tag;
      out.doc["digest"] = to_hex(stack.active().digest);
      if (!out.as_json) std::cout << "committed " << tag << " (" << to_hex(stack.active().digest) << ")\n";
    } else if (stable->parsed()) {
      out.doc["command"] = "mark-stable";
      LayerStack stack = load_store(store_path);
      stack.mark_stable(tag);
      save_store(stack, store_path);
      out.doc["stable"] = tag;
      if (!out.as_json) std::cout << tag << " marked stable\n";
    } else if (rollback->parsed()) {
      out.doc["command"] = "rollback";
      LayerStack stack = load_store(store_path);
      FailureEvent ev{phase == "update" ? FailurePhase::UpdateProcess : FailurePhase::PostUpdateExecution, exit_code,
                      static_cast<std::int64_t>(std::time(nullptr))};
      RollbackRecord rec = stack.on_failure(ev);
      save_store(stack, store_path);
      if (!checkout.empty()) {
        const Layer& l = stack.active();
        if (!l.tree) throw Error(ErrorCode::Unrecoverable, "active layer is not materialized");
        materialize_atomic(*l.tree, checkout);
      }
      out.doc["from"] = rec.from_tag;
      out.doc["to"] = rec.to_tag;
      out.doc["noop"] = rec.noop;
      out.doc["phase"] = std::string(to_string(rec.phase));
      if (!out.as_json) {
        if (rec.noop) {
          std::cout << "no rollback: active layer " << rec.from_tag << " is already stable\n";
        } else {
          std::cout << "rolled back " << rec.from_tag << " -> " << rec.to_tag << "\n";
        }
      }
      rc = rec.noop ? kExitOk : kExitRollback;
    } else if (gen->parsed()) {
      out.doc["command"] = "gen-variant";
      FileTree in = load_tree(tree_path);
      VariantSpec spec;
      spec.target_ratio = ratio;
      spec.seed = seed;
      spec.scope_prefix = scope;
      FileTree variant = generate_variant(in, spec);
      materialize_atomic(variant, out_path);
      double achieved = modification_ratio(subtree(in, scope), subtree(variant, scope)).ratio;
      out.doc["ratio"] = achieved;
      if (!out.as_json) std::cout << "wrote " << out_path << " (modification ratio " << achieved << ")\n";
    }
  } catch (const Error& e) {
    out.doc["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    if (!out.as_json) std::cerr << "satpatch: " << e.what() << "\n";
    rc = exit_code_for(e.code());
  } catch (const std::exception& e) {
    out.doc["error"] = {{"code", "io"}, {"message", e.what()}};
    if (!out.as_json) std::cerr << "satpatch: " << e.what() << "\n";
    rc = kExitInput;
  }
  out.doc["exit_code"] = rc;
  out.emit(std::cout);
  return rc;
}
