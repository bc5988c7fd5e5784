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

#include "zsgen/vocab.hpp"

#include <sstream>

#include "zsgen/error.hpp"

namespace zsgen {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw ConfigError("vocabulary is empty");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& t = tokens_[i];
    if (t.empty() || t.find_first_of(" \t\r\n") != std::string::npos)
      throw ConfigError("invalid vocabulary token '" + t + "'");
    if (!id_of_.emplace(t, static_cast<TokenId>(i)).second) throw ConfigError("duplicate vocabulary token '" + t + "'");
  }
  for (auto reserved : {kBos, kEos, kSep})
    if (!contains(reserved)) throw ConfigError("vocabulary lacks reserved token " + std::string(reserved));
  bos_ = id_of(kBos);
  eos_ = id_of(kEos);
  sep_ = id_of(kSep);
}

Vocabulary Vocabulary::with_reserved(const std::vector<std::string>& words) {
  std::vector<std::string> all{std::string(kBos), std::string(kEos), std::string(kSep)};
  all.insert(all.end(), words.begin(), words.end());
  return Vocabulary(std::move(all));
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) throw InvalidSampleError("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

bool Vocabulary::contains(std::string_view token) const { return id_of_.find(std::string(token)) != id_of_.end(); }

TokenId Vocabulary::id_of(std::string_view token) const {
  auto it = id_of_.find(std::string(token));
  if (it == id_of_.end()) throw InvalidSampleError("out-of-vocabulary token '" + std::string(token) + "'");
  return it->second;
}

TokenSequence Vocabulary::encode(std::string_view text) const {
  TokenSequence out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) out.push_back(id_of(word));
  return out;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

void Vocabulary::validate(std::span<const TokenId> ids) const {
  for (TokenId id : ids)
    if (id >= tokens_.size()) throw InvalidSampleError("token id " + std::to_string(id) + " out of range");
}

}  // namespace zsgen
