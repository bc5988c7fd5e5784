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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace zsgen {

using TokenId = std::uint32_t;

/// Ordered list of token ids. Empty only as a generation-failure sentinel.
using TokenSequence = std::vector<TokenId>;

class Vocabulary {
 public:
  static constexpr std::string_view kBos = "<bos>";
  static constexpr std::string_view kEos = "<eos>";
  static constexpr std::string_view kSep = "<sep>";

  Vocabulary() = default;

  /// `tokens` must be distinct, whitespace-free and contain the three
  /// reserved tokens somewhere.
  explicit Vocabulary(std::vector<std::string> tokens);

  /// Builds a vocabulary with the reserved tokens at ids 0, 1, 2 followed
  /// by `words` in order.
  static Vocabulary with_reserved(const std::vector<std::string>& words);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& token(TokenId id) const;
  bool contains(std::string_view token) const;
  TokenId id_of(std::string_view token) const;

  TokenId bos() const noexcept { return bos_; }
  TokenId eos() const noexcept { return eos_; }
  TokenId sep() const noexcept { return sep_; }

  /// Whitespace tokenization; out-of-vocabulary tokens are rejected.
  TokenSequence encode(std::string_view text) const;
  std::string decode(std::span<const TokenId> ids) const;

  /// Throws InvalidSampleError if any id is out of range.
  void validate(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> id_of_;
  TokenId bos_ = 0;
  TokenId eos_ = 0;
  TokenId sep_ = 0;
};

}  // namespace zsgen
