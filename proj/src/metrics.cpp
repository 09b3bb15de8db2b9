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

#include "msa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msa/common.hpp"

namespace msa::eval {

std::vector<double> softmax(std::span<const double> s) {
  std::vector<double> p(s.size());
  if (s.empty()) return p;
  const double m = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) z += p[i] = std::exp(s[i] - m);
  for (auto& v : p) v /= z;
  return p;
}

MetricsReport compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                              std::span<const std::vector<double>> scores, std::size_t n_classes) {
  if (truth.empty()) throw ValidationError("metrics over an empty label sequence");
  if (truth.size() != predicted.size())
    throw ValidationError("truth and prediction lengths differ");
  if (!scores.empty() && scores.size() != truth.size())
    throw ValidationError("score rows do not match label count");
  if (n_classes < 2) throw ValidationError("metrics need at least 2 classes");
  const std::size_t k = n_classes;
  MetricsReport r;
  r.n_classes = k;
  r.count = truth.size();
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || static_cast<std::size_t>(truth[i]) >= k || predicted[i] < 0 ||
        static_cast<std::size_t>(predicted[i]) >= k)
      throw ValidationError("label outside [0, " + std::to_string(k) + ") at index " + std::to_string(i));
    ++r.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  r.support.assign(k, 0);
  r.precision.assign(k, 0.0);
  r.tp_rate.assign(k, 0.0);
  r.f_score.assign(k, 0.0);
  r.active.assign(k, false);
  std::size_t n_active = 0;
  double f_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t col = 0;
    for (std::size_t t = 0; t < k; ++t) {
      r.support[c] += r.confusion[c][t];
      col += r.confusion[t][c];
    }
    const std::size_t tp = r.confusion[c][c];
    if (col) r.precision[c] = static_cast<double>(tp) / static_cast<double>(col);
    if (r.support[c]) r.tp_rate[c] = static_cast<double>(tp) / static_cast<double>(r.support[c]);
    const double pr = r.precision[c] + r.tp_rate[c];
    if (pr > 0.0) r.f_score[c] = 2.0 * r.precision[c] * r.tp_rate[c] / pr;
    r.active[c] = r.support[c] > 0 || col > 0;
    if (r.active[c]) {
      ++n_active;
      f_sum += r.f_score[c];
    }
  }
  r.macro_f = f_sum / static_cast<double>(n_active);
  double se = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    std::vector<double> p(k, 0.0);
    if (scores.empty()) {
      p[static_cast<std::size_t>(predicted[i])] = 1.0;
    } else {
      if (scores[i].size() != k)
        throw ValidationError("score row " + std::to_string(i) + " has " +
                              std::to_string(scores[i].size()) + " entries, expected " +
                              std::to_string(k));
      p = softmax(scores[i]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      const double y = static_cast<std::size_t>(truth[i]) == c ? 1.0 : 0.0;
      se += (y - p[c]) * (y - p[c]);
    }
  }
  r.rmse = std::sqrt(se / static_cast<double>(truth.size() * k));
  return r;
}

}  // namespace msa::eval
