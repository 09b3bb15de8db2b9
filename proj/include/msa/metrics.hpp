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

#include <span>
#include <vector>

namespace msa::eval {

struct MetricsReport {
  std::size_t n_classes = 0;
  std::size_t count = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<std::size_t> support;                 // row sums
  std::vector<double> precision;
  std::vector<double> tp_rate;  // recall
  std::vector<double> f_score;
  // Classes occurring in the truth or the predictions; macro F averages
  // over exactly these.
  std::vector<bool> active;
  double macro_f = 0.0;
  double rmse = 0.0;
};

// Precision, recall and F are 0 when their denominators are 0. RMSE compares
// one-hot truth with softmax-normalized scores over all n * n_classes cells;
// with no scores, one-hot predictions stand in for them.
MetricsReport compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                              std::span<const std::vector<double>> scores, std::size_t n_classes);

std::vector<double> softmax(std::span<const double> scores);

}  // namespace msa::eval
