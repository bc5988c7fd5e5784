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

#include "zsgen/records.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "zsgen/error.hpp"

namespace zsgen {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json ids_json(const TokenSequence& seq) {
  ordered_json a = ordered_json::array();
  for (TokenId t : seq) a.push_back(t);
  return a;
}

TokenSequence ids_from(const ordered_json& j, const Vocabulary& vocab, std::string_view field) {
  if (!j.is_array()) throw InvalidSampleError("record field " + std::string(field) + " is not an array");
  TokenSequence out;
  for (const auto& v : j) {
    if (!v.is_number_unsigned()) throw InvalidSampleError("record field " + std::string(field) + " holds a non-id");
    const auto id = v.get<std::uint64_t>();
    if (id >= vocab.size()) throw InvalidSampleError("record token id out of range");
    out.push_back(static_cast<TokenId>(id));
  }
  return out;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string sample_to_json(const GeneratedSample& s, const Vocabulary& vocab) {
  ordered_json j;
  j["id"] = s.id;
  j["label"] = s.label;
  if (s.x_s) {
    j["x_s"] = ids_json(*s.x_s);
    j["x_s_text"] = vocab.decode(*s.x_s);
  } else {
    j["x_s"] = nullptr;
    j["x_s_text"] = nullptr;
  }
  j["x_g"] = ids_json(s.x_g);
  j["x_g_text"] = vocab.decode(s.x_g);
  if (s.score) j["score"] = *s.score;
  else j["score"] = nullptr;
  return j.dump();
}

GeneratedSample sample_from_json(std::string_view line, const Vocabulary& vocab) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSampleError(std::string("malformed record: ") + e.what());
  }
  try {
    GeneratedSample s;
    s.id = j.at("id").get<std::uint64_t>();
    s.label = j.at("label").get<std::size_t>();
    if (!j.at("x_s").is_null()) s.x_s = ids_from(j.at("x_s"), vocab, "x_s");
    s.x_g = ids_from(j.at("x_g"), vocab, "x_g");
    if (s.x_g.empty()) throw InvalidSampleError("record has an empty x_g");
    if (!j.at("score").is_null()) s.score = j.at("score").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSampleError(std::string("malformed record: ") + e.what());
  }
}

std::string samples_to_jsonl(const std::vector<GeneratedSample>& samples, const Vocabulary& vocab) {
  std::string out;
  for (const auto& s : samples) {
    out += sample_to_json(s, vocab);
    out += '\n';
  }
  return out;
}

std::vector<GeneratedSample> samples_from_jsonl(std::string_view text, const Vocabulary& vocab) {
  std::vector<GeneratedSample> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty()) out.push_back(sample_from_json(line, vocab));
    pos = end + 1;
  }
  return out;
}

std::string trace_to_csv(const TrainTrace& trace) {
  std::string out = "step,interval,loss,lambda,filtered_size\n";
  for (const auto& r : trace.rows) {
    out += std::to_string(r.step) + "," + std::to_string(r.interval) + "," + format_number(r.loss) + "," +
           format_number(r.lambda) + "," + std::to_string(r.filtered_size) + "\n";
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

void write_file(const std::string& path, std::string_view bytes, bool force) {
  namespace fs = std::filesystem;
  if (!force && fs::exists(path)) throw ConfigError("refusing to overwrite " + path + " (use --force)");
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("cannot write " + path);
}

}  // namespace zsgen
