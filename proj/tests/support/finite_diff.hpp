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

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "zsgen/rng.hpp"

namespace zsgen::testing {

/// Worst relative error between analytic gradient entries and central
/// differences of `f`, over `coords` randomly chosen parameter coordinates.
/// Parameters are float32, so steps are taken in float and differences are
/// taken on the rounded values.
inline double max_relative_fd_error(std::span<float> params, std::span<const double> analytic,
                                    const std::function<double()>& f, std::size_t coords, std::uint64_t seed,
                                    float h = 1e-3f) {
  CounterRng rng(seed);
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t tries = 0; checked < coords && tries < 50 * coords; ++tries) {
    const auto i = static_cast<std::size_t>(rng.below(params.size()));
    const float x = params[i];
    params[i] = x + h;
    const double up = f();
    const float hu = params[i] - x;
    params[i] = x - h;
    const double down = f();
    const float hd = x - params[i];
    params[i] = x;
    const double numeric = (up - down) / (static_cast<double>(hu) + hd);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-3});
    // tiny gradients carry no signal at float precision
    if (std::abs(analytic[i]) < 1e-6 && std::abs(numeric) < 1e-6) continue;
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
    ++checked;
  }
  return checked < coords ? 1.0 : worst;
}

}  // namespace zsgen::testing
