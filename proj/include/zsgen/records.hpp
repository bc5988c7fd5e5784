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

#include <string>
#include <string_view>
#include <vector>

#include "zsgen/sample.hpp"
#include "zsgen/training.hpp"
#include "zsgen/vocab.hpp"

namespace zsgen {

/// One JSON object per line with fields in the order
/// id, label, x_s, x_s_text, x_g, x_g_text, score (x_s* and score may be null).
std::string sample_to_json(const GeneratedSample& sample, const Vocabulary& vocab);
GeneratedSample sample_from_json(std::string_view line, const Vocabulary& vocab);

std::string samples_to_jsonl(const std::vector<GeneratedSample>& samples, const Vocabulary& vocab);
std::vector<GeneratedSample> samples_from_jsonl(std::string_view text, const Vocabulary& vocab);

/// step,interval,loss,lambda,filtered_size
std::string trace_to_csv(const TrainTrace& trace);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

std::string read_file(const std::string& path);  // MissingArtifactError if absent
/// Writes `bytes`, creating parent directories. An existing file is an
/// error unless `force` is set.
void write_file(const std::string& path, std::string_view bytes, bool force);
bool file_exists(const std::string& path);

}  // namespace zsgen
