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

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace satpatch {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Failure categories shared by every module. Values are stable; the CLI
/// maps them onto process exit codes.
enum class ErrorCode {
  Io,
  InvalidPath,
  PathEscape,
  Unsupported,
  InvalidArgument,
  // package decoding
  BadMagic,
  UnsupportedVersion,
  Truncated,
  CrcMismatch,
  CorruptStream,
  MalformedManifest,
  Inconsistent,
  // reconstruction
  BaseMismatch,
  ApplyFailed,
  DigestMismatch,
  // layer store
  DuplicateTag,
  UnknownTag,
  NotActive,
  Unrecoverable,
  // corpus generation / link model
  Unreachable,
  NoMatch,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "io";
    case ErrorCode::InvalidPath: return "invalid-path";
    case ErrorCode::PathEscape: return "path-escape";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::BadMagic: return "bad-magic";
    case ErrorCode::UnsupportedVersion: return "unsupported-version";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::CrcMismatch: return "crc-mismatch";
    case ErrorCode::CorruptStream: return "corrupt-stream";
    case ErrorCode::MalformedManifest: return "malformed-manifest";
    case ErrorCode::Inconsistent: return "inconsistent";
    case ErrorCode::BaseMismatch: return "base-mismatch";
    case ErrorCode::ApplyFailed: return "apply-failed";
    case ErrorCode::DigestMismatch: return "digest-mismatch";
    case ErrorCode::DuplicateTag: return "duplicate-tag";
    case ErrorCode::UnknownTag: return "unknown-tag";
    case ErrorCode::NotActive: return "not-active";
    case ErrorCode::Unrecoverable: return "unrecoverable";
    case ErrorCode::Unreachable: return "unreachable";
    case ErrorCode::NoMatch: return "no-match";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline std::string_view as_string_view(ByteView b) {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

inline std::string to_string(ByteView b) { return std::string(as_string_view(b)); }

}  // namespace satpatch
