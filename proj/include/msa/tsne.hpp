// Copyright 2026 The msa Authors.
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

// Exact O(n^2) t-SNE to two dimensions.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace msa::viz {

inline constexpr std::size_t kMaxTsnePoints = 2000;

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  int exaggeration_iterations = 100;
  double exaggeration = 4.0;
  double learning_rate = 200.0;
  std::uint64_t seed = 0;
};

struct Projection2D {
  std::vector<std::array<double, 2>> points;
  // KL(P || Q) after every iteration, without exaggeration.
  std::vector<double> kl_trace;
  std::uint64_t seed = 0;
};

// Symmetrized joint input affinities, row-major n x n, summing to 1.
std::vector<double> joint_affinities(std::span<const std::vector<double>> xs, double perplexity);

// y holds n 2-D points as x0, y0, x1, y1, ...
double kl_divergence(std::span<const double> p, std::span<const double> y);
std::vector<double> kl_gradient(std::span<const double> p, std::span<const double> y);

// Requires >= 5 vectors, at most kMaxTsnePoints, and perplexity < (n - 1) / 3.
// KL never increases during the second half of the iterations: a step that
// would raise it is rejected and the step size halved.
Projection2D tsne_2d(std::span<const std::vector<double>> xs, const TsneConfig& cfg = {});

}  // namespace msa::viz
