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

#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "satpatch/package.hpp"

namespace satpatch {

struct Layer {
  std::string tag;
  Digest digest{};
  std::optional<FileTree> tree;  // present only while materialized
  bool stable = false;
  bool failed = false;
};

enum class FailurePhase { UpdateProcess, PostUpdateExecution };

constexpr std::string_view to_string(FailurePhase p) {
  return p == FailurePhase::UpdateProcess ? "update" : "runtime";
}

struct FailureEvent {
  FailurePhase phase = FailurePhase::PostUpdateExecution;
  int exit_code = 1;
  std::int64_t timestamp = 0;
};

struct RollbackRecord {
  FailurePhase phase = FailurePhase::PostUpdateExecution;
  int exit_code = 0;
  std::string from_tag;
  std::string to_tag;
  bool noop = false;
};

/// Ordered version layers of one application. At most two trees stay
/// materialized: the active layer and the most recent stable one.
class LayerStack {
 public:
  LayerStack() = default;
  explicit LayerStack(std::string app_id) : app_id_(std::move(app_id)) {}

  const std::string& app_id() const noexcept { return app_id_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  bool empty() const noexcept { return layers_.empty(); }

  std::optional<std::size_t> active_index() const noexcept { return active_; }
  const Layer& active() const {
    if (!active_) throw Error(ErrorCode::Unrecoverable, "layer stack is empty");
    return layers_[*active_];
  }

  std::optional<std::size_t> find(std::string_view tag) const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (layers_[i].tag == tag) return i;
    }
    return std::nullopt;
  }

  /// Most recent stable, non-failed layer.
  std::optional<std::size_t> last_stable() const {
    for (std::size_t i = layers_.size(); i-- > 0;) {
      if (layers_[i].stable && !layers_[i].failed) return i;
    }
    return std::nullopt;
  }

  void commit(FileTree tree, std::string tag) {
    if (tag.empty()) throw Error(ErrorCode::InvalidArgument, "empty layer tag");
    if (find(tag)) throw Error(ErrorCode::DuplicateTag, "layer tag already exists: " + tag);
    Layer l;
    l.tag = std::move(tag);
    l.digest = tree_digest(tree);
    l.tree = std::move(tree);
    layers_.push_back(std::move(l));
    active_ = layers_.size() - 1;
    apply_retention();
  }

  void mark_stable(std::string_view tag) {
    auto idx = find(tag);
    if (!idx) throw Error(ErrorCode::UnknownTag, "no layer tagged " + std::string(tag));
    if (idx != active_) throw Error(ErrorCode::NotActive, "layer " + std::string(tag) + " is not active");
    layers_[*idx].stable = true;
  }

  RollbackRecord on_failure(const FailureEvent& ev) {
    if (ev.exit_code == 0) throw Error(ErrorCode::InvalidArgument, "exit code 0 is not a failure");
    if (!active_) throw Error(ErrorCode::Unrecoverable, "no layers deployed");
    RollbackRecord rec;
    rec.phase = ev.phase;
    rec.exit_code = ev.exit_code;
    rec.from_tag = layers_[*active_].tag;
    if (layers_[*active_].stable) {
      rec.to_tag = rec.from_tag;
      rec.noop = true;
      return rec;
    }
    auto target = last_stable();
    if (!target) throw Error(ErrorCode::Unrecoverable, "no stable layer to roll back to");
    layers_[*active_].failed = true;
    active_ = *target;
    rec.to_tag = layers_[*target].tag;
    return rec;
  }

  // persistence hooks
  std::vector<Layer>& mutable_layers() noexcept { return layers_; }
  void set_active(std::optional<std::size_t> a) noexcept { active_ = a; }
  void set_app_id(std::string id) { app_id_ = std::move(id); }

 private:
  void apply_retention() {
    auto keep = last_stable();
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (i != active_ && i != keep) layers_[i].tree.reset();
    }
  }

  std::string app_id_;
  std::vector<Layer> layers_;
  std::optional<std::size_t> active_;
};

inline LayerStack commit_layer(LayerStack stack, FileTree tree, std::string tag) {
  stack.commit(std::move(tree), std::move(tag));
  return stack;
}

inline LayerStack mark_stable(LayerStack stack, std::string_view tag) {
  stack.mark_stable(tag);
  return stack;
}

inline std::pair<LayerStack, RollbackRecord> on_failure(LayerStack stack, const FailureEvent& ev) {
  auto rec = stack.on_failure(ev);
  return {std::move(stack), std::move(rec)};
}

enum class RecoveryStrategy { Image, File, Patch, Layer };

struct RecoveryCost {
  std::uint64_t storage_bytes = 0;
  std::uint64_t backup_ops = 0;
  std::uint64_t restore_ops = 0;
};

namespace detail {

inline std::string layer_flags(const LayerStack& s, std::size_t i) {
  const Layer& l = s.layers()[i];
  std::string f;
  if (s.active_index() == i) f += 'A';
  if (l.stable) f += 'S';
  if (l.failed) f += 'F';
  if (l.tree) f += 'M';
  return f.empty() ? "-" : f;
}

inline std::string index_line(const LayerStack& s, std::size_t i) {
  return percent_encode(s.layers()[i].tag) + "\t" + to_hex(s.layers()[i].digest) + "\t" + layer_flags(s, i) + "\n";
}

}  // namespace detail

/// Modeled storage and operation counts for backing up the rollback target
/// (the last stable layer) under each strategy.
inline RecoveryCost recovery_cost_report(const LayerStack& stack, RecoveryStrategy strategy) {
  if (stack.layers().size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two layers");
  const std::size_t act = *stack.active_index();
  std::optional<std::size_t> prior;
  for (std::size_t i = stack.layers().size(); i-- > 0;) {
    const Layer& l = stack.layers()[i];
    if (i != act && l.stable && !l.failed) {
      prior = i;
      break;
    }
  }
  if (!prior) throw Error(ErrorCode::InvalidArgument, "no stable layer besides the active one");

  RecoveryCost cost;
  if (strategy == RecoveryStrategy::Layer) {
    // the prior layer is already stored; backup records a reference only
    cost.storage_bytes = detail::index_line(stack, *prior).size();
    cost.backup_ops = 1;
    cost.restore_ops = 1;
    return cost;
  }

  const Layer& before = stack.layers()[*prior];
  const Layer& after = stack.layers()[act];
  if (!before.tree || !after.tree) throw Error(ErrorCode::InvalidArgument, "layer trees not materialized");
  const FileTree& p = *before.tree;
  const FileTree& a = *after.tree;

  switch (strategy) {
    case RecoveryStrategy::Image:
      cost.storage_bytes = p.total_file_bytes();
      cost.backup_ops = p.size();
      cost.restore_ops = p.size();
      break;
    case RecoveryStrategy::File: {
      for (const auto& [path, e] : p.entries()) {
        if (!e.is_file()) continue;
        const Entry* n = a.find(path);
        if (n == nullptr || !n->is_file() || n->content_hash != e.content_hash) {
          cost.storage_bytes += e.size();
          ++cost.backup_ops;
        }
      }
      cost.restore_ops = cost.backup_ops;
      for (const auto& [path, e] : a.entries()) {
        if (e.is_file() && !p.contains(path)) ++cost.restore_ops;
      }
      break;
    }
    case RecoveryStrategy::Patch: {
      ChangeSet reverse = compare_trees(a, p);
      UpdatePackage pkg = make_package(reverse, a, p);
      cost.storage_bytes = encode_package(pkg).size();
      cost.backup_ops = pkg.manifest.size();
      for (const auto& e : pkg.manifest) cost.restore_ops += e.ops.empty() ? 1 : e.ops.size();
      break;
    }
    case RecoveryStrategy::Layer: break;
  }
  return cost;
}

/// On-disk store: "layers.idx" plus layers/L<index>/ for materialized trees.
inline void save_store(const LayerStack& stack, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "layers");
  std::string idx = "satpatch-layers 1\napp\t" + detail::percent_encode(stack.app_id()) + "\n";
  for (std::size_t i = 0; i < stack.layers().size(); ++i) {
    idx += detail::index_line(stack, i);
    char name[32];
    std::snprintf(name, sizeof name, "L%04zu", i);
    fs::path ldir = dir / "layers" / name;
    const Layer& l = stack.layers()[i];
    if (l.tree && !fs::exists(ldir)) {
      fs::path tmp = dir / "layers" / (std::string(name) + ".tmp");
      fs::remove_all(tmp);
      materialize(*l.tree, tmp);
      fs::rename(tmp, ldir);
    } else if (!l.tree && fs::exists(ldir)) {
      fs::remove_all(ldir);
    }
  }
  fs::path tmp = dir / "layers.idx.tmp";
  write_file(tmp, ByteView(reinterpret_cast<const std::uint8_t*>(idx.data()), idx.size()));
  fs::rename(tmp, dir / "layers.idx");
}

inline LayerStack load_store(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  LayerStack stack;
  if (!fs::exists(dir / "layers.idx")) return stack;
  Bytes raw = read_file(dir / "layers.idx");
  std::istringstream in(to_string(raw));
  std::string line;
  auto bad = [&](const std::string& why) { return Error(ErrorCode::CorruptStream, "layers.idx: " + why); };
  if (!std::getline(in, line) || line != "satpatch-layers 1") throw bad("bad header");
  if (!std::getline(in, line) || line.rfind("app\t", 0) != 0) throw bad("missing app line");
  std::string app;
  if (!detail::percent_decode(std::string_view(line).substr(4), app)) throw bad("bad app id");
  stack.set_app_id(app);
  std::size_t i = 0;
  while (std::getline(in, line)) {
    auto f = detail::split(line, '\t');
    if (f.size() != 3) throw bad("bad layer line " + std::to_string(i));
    Layer l;
    if (!detail::percent_decode(f[0], l.tag)) throw bad("bad tag");
    l.digest = digest_from_hex(f[1]);
    std::string_view flags = f[2];
    l.stable = flags.find('S') != std::string_view::npos;
    l.failed = flags.find('F') != std::string_view::npos;
    if (flags.find('A') != std::string_view::npos) stack.set_active(i);
    if (flags.find('M') != std::string_view::npos) {
      char name[32];
      std::snprintf(name, sizeof name, "L%04zu", i);
      FileTree t = load_tree(dir / "layers" / name);
      if (tree_digest(t) != l.digest) throw bad("stored tree for " + l.tag + " does not match its digest");
      l.tree = std::move(t);
    }
    stack.mutable_layers().push_back(std::move(l));
    ++i;
  }
  return stack;
}

}  // namespace satpatch
