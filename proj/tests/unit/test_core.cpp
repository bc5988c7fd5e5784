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

#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <set>

#include "zsgen/checkpoint.hpp"
#include "zsgen/error.hpp"
#include "zsgen/numeric.hpp"
#include "zsgen/parallel.hpp"
#include "zsgen/parameters.hpp"
#include "zsgen/rng.hpp"
#include "zsgen/vocab.hpp"

using namespace zsgen;

TEST_CASE("vocabulary reserves bos eos sep and round-trips text") {
  const auto v = Vocabulary::with_reserved({"a", "b", "c"});
  CHECK(v.size() == 6);
  CHECK(v.bos() == 0);
  CHECK(v.eos() == 1);
  CHECK(v.sep() == 2);
  const auto ids = v.encode("a  b\tc a");
  CHECK(ids == TokenSequence{3, 4, 5, 3});
  CHECK(v.decode(ids) == "a b c a");
  CHECK(v.encode("").empty());
}

TEST_CASE("vocabulary rejects out-of-vocabulary tokens and bad ids") {
  const auto v = Vocabulary::with_reserved({"a"});
  CHECK_THROWS_AS(v.encode("a zz"), InvalidSampleError);
  const TokenSequence bad{0, 9};
  CHECK_THROWS_AS(v.validate(bad), InvalidSampleError);
  CHECK_THROWS_AS(v.token(4), InvalidSampleError);
}

TEST_CASE("vocabulary construction errors") {
  CHECK_THROWS_AS(Vocabulary({"a", "b"}), ConfigError);
  CHECK_THROWS_AS(Vocabulary::with_reserved({"a", "a"}), ConfigError);
  CHECK_THROWS_AS(Vocabulary::with_reserved({"a b"}), ConfigError);
  // reserved tokens may sit anywhere
  Vocabulary v({"x", std::string(Vocabulary::kSep), std::string(Vocabulary::kEos), std::string(Vocabulary::kBos)});
  CHECK(v.bos() == 3);
  CHECK(v.sep() == 1);
}

TEST_CASE("softmax of (2,1,0)") {
  const std::vector<double> l{2, 1, 0};
  const auto p = softmax(l);
  CHECK(std::abs(p[0] - 0.6652) <= 1e-4);
  CHECK(std::abs(p[1] - 0.2447) <= 1e-4);
  CHECK(std::abs(p[2] - 0.0900) <= 1e-4);
  const auto lp = log_softmax(l);
  for (int i = 0; i < 3; ++i) CHECK(std::exp(lp[i]) == doctest::Approx(p[i]).epsilon(1e-12));
}

TEST_CASE("softmax survives extreme logits") {
  const std::vector<double> l{1e308, 0.0, -1e308};
  const auto p = softmax(l);
  CHECK(p[0] == 1.0);
  CHECK(std::isfinite(p[2]));
  const std::vector<double> same{7.0, 7.0};
  CHECK(softmax(same)[0] == 0.5);
  CHECK(argmax(same) == 0);
}

TEST_CASE("counter rng is a pure function of key and index") {
  CounterRng a(derive_key(42, {1, 2})), b(derive_key(42, {1, 2}));
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CHECK(derive_key(42, {1, 2}) != derive_key(42, {2, 1}));
  CHECK(derive_key(42, {1}) != derive_key(43, {1}));

  CounterRng r(7);
  std::vector<int> hist(5, 0);
  for (int i = 0; i < 50000; ++i) {
    const auto x = r.below(5);
    REQUIRE(x < 5);
    ++hist[x];
  }
  for (int h : hist) CHECK(std::abs(h / 50000.0 - 0.2) < 0.01);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("shuffle is a permutation") {
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  CounterRng rng(3);
  shuffle(v, rng);
  CHECK(std::set<int>(v.begin(), v.end()).size() == 100);
  std::vector<int> w(100);
  std::iota(w.begin(), w.end(), 0);
  CHECK(v != w);
}

TEST_CASE("parallel_for output does not depend on worker count") {
  auto run = [](int workers) {
    std::vector<std::uint64_t> out(1000);
    parallel_for(out.size(), workers, [&](std::size_t i) { out[i] = CounterRng(derive_key(9, {i}))(); });
    return out;
  };
  const auto one = run(1);
  CHECK(run(3) == one);
  CHECK(run(8) == one);
  CHECK_THROWS_AS(parallel_for(10, 4, [](std::size_t i) { if (i == 7) throw NumericError("boom"); }), NumericError);
}

namespace {

Checkpoint odd_checkpoint() {
  Checkpoint c;
  c.vocab = {"<bos>", "<eos>", "<sep>", "w0", "w1"};
  c.add("weights", {2, 3},
        {0.1f, -0.0f, std::numeric_limits<float>::denorm_min(), std::numeric_limits<float>::max(), -1.5f,
         std::numeric_limits<float>::infinity()});
  c.add_scalar("meta.kind", 2.0f);
  c.add("empty", {0}, {});
  return c;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
  const auto c = odd_checkpoint();
  const auto bytes = serialize_checkpoint(c);
  CHECK(bytes.substr(0, 4) == "SGLM");
  const auto back = deserialize_checkpoint(bytes);
  CHECK(back.vocab == c.vocab);
  REQUIRE(back.arrays.size() == c.arrays.size());
  for (std::size_t i = 0; i < c.arrays.size(); ++i) {
    CHECK(back.arrays[i].name == c.arrays[i].name);
    CHECK(back.arrays[i].dims == c.arrays[i].dims);
    for (std::size_t j = 0; j < c.arrays[i].data.size(); ++j)
      CHECK(std::bit_cast<std::uint32_t>(back.arrays[i].data[j]) == std::bit_cast<std::uint32_t>(c.arrays[i].data[j]));
  }
  CHECK(serialize_checkpoint(back) == bytes);
  CHECK(back.scalar("meta.kind") == 2.0f);

  const auto path = std::filesystem::temp_directory_path() / "zsgen_unit_ckpt.sglm";
  save_checkpoint(path, c);
  CHECK(serialize_checkpoint(load_checkpoint(path)) == bytes);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint is little-endian with a version field") {
  const auto bytes = serialize_checkpoint(odd_checkpoint());
  CHECK(static_cast<unsigned char>(bytes[4]) == Checkpoint::kFormatVersion);
  CHECK(bytes[5] == 0);
  CHECK(static_cast<unsigned char>(bytes[8]) == 5);  // vocab count
}

TEST_CASE("corrupt checkpoints are rejected") {
  auto bytes = serialize_checkpoint(odd_checkpoint());
  CHECK_THROWS_AS(deserialize_checkpoint("SGLX" + bytes.substr(4)), ConfigError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), ConfigError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes + "x"), ConfigError);
  auto v2 = bytes;
  v2[4] = 9;
  CHECK_THROWS_AS(deserialize_checkpoint(v2), ConfigError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/zsgen.sglm"), MissingArtifactError);
  CHECK_THROWS_AS(odd_checkpoint().get("nope"), ConfigError);
}

TEST_CASE("parameter set export and import") {
  ParameterSet p;
  p.add("a", {2, 2});
  p.add("b", {3});
  CHECK(p.size() == 7);
  CounterRng rng(1);
  p.init_uniform(rng, 0.1f);
  for (float v : p.values()) CHECK(std::abs(v) <= 0.1f);

  Checkpoint c;
  p.export_to(c);
  ParameterSet q;
  q.add("a", {2, 2});
  q.add("b", {3});
  q.import_from(c);
  CHECK(q == p);

  ParameterSet wrong;
  wrong.add("a", {4});
  CHECK_THROWS_AS(wrong.import_from(c), ConfigError);

  std::vector<double> g(7, 1.0);
  sgd_step(q, g, 0.5);
  CHECK(q.values()[0] == doctest::Approx(p.values()[0] - 0.5));
}
