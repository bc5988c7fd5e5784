// Copyright (c) 2026 The zsgen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace zsgen {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kConfig = 1,
  kMissingArtifact = 2,
  kNumeric = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class MissingArtifactError : public Error {
 public:
  explicit MissingArtifactError(const std::string& path)
      : Error(ErrorKind::kMissingArtifact, "missing artifact: " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

/// Raised for malformed samples (empty input, out-of-vocabulary ids).
class InvalidSampleError : public Error {
 public:
  explicit InvalidSampleError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class ConstraintUnsatisfiableError : public Error {
 public:
  explicit ConstraintUnsatisfiableError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class InsufficientPoolError : public Error {
 public:
  explicit InsufficientPoolError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

}  // namespace zsgen
