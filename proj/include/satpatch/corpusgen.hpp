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

// Synthetic update variants. Edits are whole-line insertions of neutral
// constructs (comments, log statements, dead conditionals, unused variables)
// and deletions of comment, import and log lines; binaries only receive
// short in-place byte flips.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "satpatch/linksim.hpp"

namespace satpatch {

struct VariantSpec {
  double target_ratio = 0.10;
  std::uint64_t seed = 0;
  double insert_fraction = 0.8;  // remainder are deletions
  // weights for comments, logging, inactive conditionals, unused variables
  std::array<double, 4> insert_kinds = {0.4, 0.3, 0.15, 0.15};
  // which line categories deletions may target: comments, imports, logs
  std::array<bool, 3> delete_kinds = {true, true, true};
  double binary_flip_probability = 0.05;
  std::string scope_prefix;  // only entries under this prefix are edited and measured
  double tolerance = 0.05;

  void validate() const {
    if (!(target_ratio >= 0 && target_ratio < 1)) throw Error(ErrorCode::InvalidArgument, "target ratio must be in [0,1)");
    if (insert_fraction < 0 || insert_fraction > 1) throw Error(ErrorCode::InvalidArgument, "insert fraction must be in [0,1]");
    double s = 0;
    for (double w : insert_kinds) {
      if (w < 0) throw Error(ErrorCode::InvalidArgument, "negative edit-kind weight");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "edit-kind weights must sum to 1");
  }
};

namespace detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(eng_() % n); }
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

 private:
  std::mt19937_64 eng_;
};

inline const std::vector<std::string_view>& vocabulary() {
  static const std::vector<std::string_view> words = {
      "frame",  "buffer",  "tile",    "orbit",   "sensor", "payload", "cache",   "queue",  "batch",
      "model",  "result",  "image",   "band",    "pixel",  "window",  "offset",  "header", "packet",
      "encode", "decode",  "compute", "update",  "check",  "retry",   "timeout", "config", "state",
      "detect", "track",   "compress", "attitude", "vector", "matrix", "score",  "thresh", "index",
      "handle", "process", "stream",  "segment", "record", "metric",  "sample",  "value",  "limit"};
  return words;
}

inline std::string phrase(Rng& rng, std::size_t min_words, std::size_t max_words) {
  std::size_t n = min_words + rng.below(max_words - min_words + 1);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s.push_back(' ');
    s += rng.pick(vocabulary());
  }
  return s;
}

enum class Style { Hash, Slash };

inline Style style_for(std::string_view path) {
  static constexpr std::array<std::string_view, 12> kSlash = {".c",  ".cc", ".cpp", ".cxx", ".h",    ".hpp",
                                                             ".go", ".js", ".ts",  ".java", ".rs", ".m"};
  for (auto ext : kSlash) {
    if (path.size() > ext.size() && path.substr(path.size() - ext.size()) == ext) return Style::Slash;
  }
  return Style::Hash;
}

inline std::string_view trim_left(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

inline bool is_comment(std::string_view line, Style st) {
  auto t = trim_left(line);
  if (st == Style::Hash) return t.starts_with("#") && !t.starts_with("#!");
  return t.starts_with("//");
}
inline bool is_import(std::string_view line) {
  auto t = trim_left(line);
  return t.starts_with("import ") || t.starts_with("from ") || t.starts_with("#include");
}
inline bool is_log(std::string_view line) {
  return line.find("print(") != std::string_view::npos || line.find("logging.") != std::string_view::npos ||
         line.find("printf(") != std::string_view::npos || line.find("console.log(") != std::string_view::npos;
}

inline std::string neutral_block(Rng& rng, Style st, std::size_t kind, std::string_view indent) {
  std::string in(indent);
  std::string n = std::to_string(rng.below(100000));
  switch (kind) {
    case 0:
      return in + (st == Style::Hash ? "# " : "// ") + phrase(rng, 3, 9) + "\n";
    case 1:
      return st == Style::Hash ? in + "logging.debug(\"" + phrase(rng, 2, 6) + " %d\", " + n + ")\n"
                               : in + "fprintf(stderr, \"" + phrase(rng, 2, 6) + " %d\\n\", " + n + ");\n";
    case 2:
      return st == Style::Hash ? in + "if False:\n" + in + "    pass\n" : in + "if (0) {\n" + in + "}\n";
    default: {
      std::string name = "unused_" + std::string(rng.pick(vocabulary())) + "_" + n;
      return st == Style::Hash ? in + "_" + name + " = " + n + "\n"
                               : in + "int " + name + " = " + n + "; (void)" + name + ";\n";
    }
  }
}

struct EditableFile {
  RelPath path;
  Style style = Style::Hash;
  std::vector<std::string> lines;
  std::vector<bool> original;
};

}  // namespace detail

/// Returns a variant of `orig` whose modification ratio lies within
/// `spec.tolerance` of `spec.target_ratio`. Deterministic for fixed inputs.
inline FileTree generate_variant(const FileTree& orig, const VariantSpec& spec) {
  using namespace detail;
  spec.validate();
  if (spec.target_ratio == 0) return orig;

  std::vector<EditableFile> texts;
  std::vector<RelPath> binaries;
  for (const auto& [path, e] : orig.entries()) {
    if (!e.is_file() || !path.within(spec.scope_prefix)) continue;
    if (e.textual) {
      EditableFile f{path, style_for(path.str()), {}, {}};
      for (auto line : split_lines(e.content())) f.lines.emplace_back(as_string_view(line));
      f.original.assign(f.lines.size(), true);
      texts.push_back(std::move(f));
    } else if (e.size() > 0) {
      binaries.push_back(path);
    }
  }
  if (texts.empty()) throw Error(ErrorCode::InvalidArgument, "no textual file to edit");

  Rng rng(spec.seed);
  // edit a share of files that grows with the target
  std::vector<std::size_t> order(texts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const double share = std::min(1.0, 0.25 + spec.target_ratio);
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(share * static_cast<double>(texts.size()))),
                                                1, texts.size());
  std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));

  std::map<RelPath, Bytes> flipped;
  auto build = [&] {
    FileTree t = orig;
    for (const auto& f : texts) {
      std::string s;
      for (const auto& l : f.lines) s += l;
      t.put(f.path, Entry::file(to_bytes(s)));
    }
    for (const auto& [p, b] : flipped) t.put(p, Entry::file(b));
    return t;
  };

  // the ratio is measured over the edited scope only
  const FileTree scope = subtree(orig, spec.scope_prefix);
  auto measure = [&](const FileTree& t) { return modification_ratio(scope, subtree(t, spec.scope_prefix)).ratio; };
  const double total0 = static_cast<double>(scope.total_file_bytes());
  double upd_bytes = total0;
  double preserved = total0;
  double bias = 0;  // tracked estimate minus measured ratio at the last check
  const double aim = std::max(0.0, spec.target_ratio - spec.tolerance / 5);
  double measured = 0;

  for (std::size_t iter = 0; iter < 1'000'000; ++iter) {
    const double estimate = upd_bytes > 0 ? 1.0 - preserved / upd_bytes : 0.0;
    if (estimate - bias >= spec.target_ratio) {
      measured = measure(build());
      if (measured >= aim) break;
      bias = estimate - measured;
    }

    if (!binaries.empty() && rng.unit() < spec.binary_flip_probability) {
      const RelPath& p = rng.pick(binaries);
      auto it = flipped.find(p);
      if (it == flipped.end()) {
        auto c = orig.find(p)->content();
        it = flipped.emplace(p, Bytes(c.begin(), c.end())).first;
      }
      Bytes& b = it->second;
      std::size_t len = std::min<std::size_t>(b.size(), 16 + rng.below(49));
      std::size_t at = rng.below(b.size() - len + 1);
      for (std::size_t i = 0; i < len; ++i) b[at + i] ^= 0xFF;
      preserved -= std::min<double>(static_cast<double>(b.size()), 4096.0);
      continue;
    }

    EditableFile& f = texts[chosen[rng.below(chosen.size())]];
    bool do_delete = rng.unit() >= spec.insert_fraction;
    if (do_delete) {
      std::vector<std::size_t> victims;
      for (std::size_t i = 0; i < f.lines.size(); ++i) {
        if (!f.original[i]) continue;
        const auto& l = f.lines[i];
        if ((spec.delete_kinds[0] && is_comment(l, f.style)) || (spec.delete_kinds[1] && is_import(l)) ||
            (spec.delete_kinds[2] && is_log(l))) {
          victims.push_back(i);
        }
      }
      if (!victims.empty()) {
        std::size_t i = rng.pick(victims);
        preserved -= static_cast<double>(f.lines[i].size());
        upd_bytes -= static_cast<double>(f.lines[i].size());
        f.lines.erase(f.lines.begin() + static_cast<std::ptrdiff_t>(i));
        f.original.erase(f.original.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
    }

    // insertion
    double u = rng.unit(), acc = 0;
    std::size_t kind = 3;
    for (std::size_t i = 0; i < 4; ++i) {
      acc += spec.insert_kinds[i];
      if (u < acc) {
        kind = i;
        break;
      }
    }
    std::size_t pos = rng.below(f.lines.size() + 1);
    std::string indent;
    if (pos < f.lines.size()) {
      const auto& next = f.lines[pos];
      indent = next.substr(0, next.size() - trim_left(next).size());
      if (!indent.empty() && indent.back() == '\n') indent.clear();
    }
    if (pos > 0 && !f.lines[pos - 1].empty() && f.lines[pos - 1].back() != '\n') {
      // keep an unterminated last line intact
      pos = f.lines.size();
      f.lines.back().push_back('\n');
      upd_bytes += 1;
      f.original.back() = false;
    }
    std::string block = neutral_block(rng, f.style, kind, indent);
    for (auto line : split_lines(ByteView(reinterpret_cast<const std::uint8_t*>(block.data()), block.size()))) {
      f.lines.insert(f.lines.begin() + static_cast<std::ptrdiff_t>(pos), std::string(as_string_view(line)));
      f.original.insert(f.original.begin() + static_cast<std::ptrdiff_t>(pos), false);
      ++pos;
    }
    upd_bytes += static_cast<double>(block.size());
  }

  FileTree out = build();
  if (measured == 0) measured = measure(out);
  if (std::abs(measured - spec.target_ratio) > spec.tolerance) {
    throw Error(ErrorCode::Unreachable, "target ratio " + std::to_string(spec.target_ratio) +
                                            " unreachable; achieved " + std::to_string(measured));
  }
  return out;
}

/// Shape of a synthetic containerized application used by tests and `bench`.
struct AppFixtureSpec {
  std::uint64_t seed = 1;
  std::size_t app_files = 10;
  std::size_t min_lines = 120;
  std::size_t max_lines = 400;
  std::size_t base_libraries = 3;
  std::size_t base_library_bytes = 96 * 1024;
  std::size_t app_binary_bytes = 24 * 1024;
};

/// Builds a seed image: a base part (usr/, etc/) and a Python-style
/// application under app/ with one binary asset.
inline FileTree make_app_fixture(const AppFixtureSpec& spec) {
  using namespace detail;
  Rng rng(spec.seed);
  FileTree t("fixture");
  auto file = [&](std::string_view p, std::string s) { t.put(RelPath::parse(p), Entry::file(to_bytes(s))); };
  auto blob = [&](std::size_t n) {
    // half-compressible binary: runs of structured bytes mixed with noise
    Bytes b(n);
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = (i / 64) % 2 ? static_cast<std::uint8_t>(rng.next()) : static_cast<std::uint8_t>(i * 7 + (i >> 8));
    }
    return b;
  };

  for (std::size_t i = 0; i < spec.base_libraries; ++i) {
    t.put(RelPath::parse("usr/lib/libbase" + std::to_string(i) + ".so"), Entry::file(blob(spec.base_library_bytes)));
  }
  file("etc/os-release", "NAME=\"Flight Linux\"\nVERSION=\"1.0\"\nID=flight\n");
  std::string bins;
  for (int i = 0; i < 200; ++i) bins += "/usr/bin/tool" + std::to_string(i) + "\n";
  file("etc/manifest.txt", bins);

  t.put(RelPath::parse("app/assets/model.bin"), Entry::file(blob(spec.app_binary_bytes)));
  for (std::size_t f = 0; f < spec.app_files; ++f) {
    std::string path = f == 0 ? "app/main.py" : "app/pkg/mod_" + std::to_string(f) + ".py";
    std::size_t target = spec.min_lines + rng.below(spec.max_lines - spec.min_lines + 1);
    std::vector<std::string> lines;
    lines.push_back("# " + phrase(rng, 4, 8) + "\n");
    lines.push_back("import logging\n");
    lines.push_back("import math\n");
    lines.push_back("from collections import deque\n\n");
    std::size_t fn = 0;
    while (lines.size() < target) {
      std::string name = std::string(rng.pick(vocabulary())) + "_" + std::string(rng.pick(vocabulary())) + "_" +
                         std::to_string(fn++);
      lines.push_back("\n");
      lines.push_back("def " + name + "(data, limit=" + std::to_string(rng.below(64)) + "):\n");
      lines.push_back("    # " + phrase(rng, 3, 8) + "\n");
      std::size_t body = 4 + rng.below(12);
      for (std::size_t b = 0; b < body; ++b) {
        std::string v = std::string(rng.pick(vocabulary()));
        switch (rng.below(5)) {
          case 0: lines.push_back("    " + v + " = data[" + std::to_string(rng.below(16)) + "] * " + std::to_string(rng.below(100)) + "\n"); break;
          case 1: lines.push_back("    if " + v + " > limit:\n        " + v + " = limit\n"); break;
          case 2: lines.push_back("    logging.info(\"" + phrase(rng, 2, 5) + "\")\n"); break;
          case 3: lines.push_back("    " + v + " = math.sqrt(abs(" + std::to_string(rng.below(1000)) + "))\n"); break;
          default: lines.push_back("    # " + phrase(rng, 2, 7) + "\n"); break;
        }
      }
      lines.push_back("    return data\n");
    }
    std::string s;
    for (const auto& l : lines) s += l;
    file(path, s);
  }
  return t;
}

}  // namespace satpatch
