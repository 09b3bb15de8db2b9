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

#include "msa/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msa/common.hpp"

namespace msa::viz {

namespace {

void similarity_weights(std::span<const double> y, std::size_t n, std::vector<double>& w, double& sum) {
  w.assign(n * n, 0.0);
  sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      w[i * n + j] = w[j * n + i] = v;
      sum += 2.0 * v;
    }
}

std::size_t point_count(std::span<const double> p, std::span<const double> y) {
  const std::size_t n = y.size() / 2;
  if (y.size() % 2 != 0 || p.size() != n * n)
    throw ValidationError("t-SNE: affinity matrix and embedding sizes disagree");
  return n;
}

std::vector<double> scaled_gradient(std::span<const double> p, std::span<const double> y, double alpha) {
  const std::size_t n = point_count(p, y);
  std::vector<double> w;
  double sum;
  similarity_weights(y, n, w, sum);
  std::vector<double> g(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = w[i * n + j] / sum;
      const double m = 4.0 * (alpha * p[i * n + j] - q) * w[i * n + j];
      g[2 * i] += m * (y[2 * i] - y[2 * j]);
      g[2 * i + 1] += m * (y[2 * i + 1] - y[2 * j + 1]);
    }
  return g;
}

}  // namespace

std::vector<double> joint_affinities(std::span<const std::vector<double>> xs, double perplexity) {
  const std::size_t n = xs.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < xs[i].size(); ++k) s += (xs[i][k] - xs[j][k]) * (xs[i][k] - xs[j][k]);
      d[i * n + j] = d[j * n + i] = s;
    }
  const double target = std::log(perplexity);
  std::vector<double> cond(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, d[i * n + j]);
    for (int it = 0; it < 200; ++it) {
      double sum = 0.0, dsum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        // shifted by the nearest distance for numerical range; cancels on normalization
        const double v = std::exp(-beta * (d[i * n + j] - dmin));
        cond[i * n + j] = v;
        sum += v;
        dsum += v * (d[i * n + j] - dmin);
      }
      const double entropy = std::log(sum) + beta * dsum / sum;
      for (std::size_t j = 0; j < n; ++j) cond[i * n + j] /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-10) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
  }
  std::vector<double> p(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) p[i * n + j] = std::max((cond[i * n + j] + cond[j * n + i]) / (2.0 * static_cast<double>(n)), 1e-12);
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

double kl_divergence(std::span<const double> p, std::span<const double> y) {
  const std::size_t n = point_count(p, y);
  std::vector<double> w;
  double sum;
  similarity_weights(y, n, w, sum);
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double pij = p[i * n + j];
      if (pij > 0.0) kl += pij * std::log(pij / (w[i * n + j] / sum));
    }
  return kl;
}

std::vector<double> kl_gradient(std::span<const double> p, std::span<const double> y) {
  return scaled_gradient(p, y, 1.0);
}

Projection2D tsne_2d(std::span<const std::vector<double>> xs, const TsneConfig& cfg) {
  const std::size_t n = xs.size();
  if (n < 5) throw ValidationError("t-SNE needs at least 5 vectors, got " + std::to_string(n));
  if (n > kMaxTsnePoints)
    throw ValidationError("t-SNE is capped at " + std::to_string(kMaxTsnePoints) + " vectors, got " +
                          std::to_string(n));
  if (!(cfg.perplexity > 0.0) || !(cfg.perplexity < (static_cast<double>(n) - 1.0) / 3.0))
    throw ValidationError("t-SNE perplexity " + std::to_string(cfg.perplexity) + " infeasible for " +
                          std::to_string(n) + " points (needs < (n - 1) / 3)");
  if (cfg.iterations < 1 || cfg.exaggeration_iterations < 0 || !(cfg.learning_rate > 0.0))
    throw ValidationError("t-SNE iterations and learning rate must be positive");
  for (const auto& x : xs) {
    if (x.size() != xs[0].size()) throw ValidationError("t-SNE input vectors differ in length");
    for (double v : x)
      if (!std::isfinite(v)) throw ValidationError("t-SNE input contains non-finite values");
  }

  const auto p = joint_affinities(xs, cfg.perplexity);
  Rng rng(cfg.seed);
  std::vector<double> y(2 * n), update(2 * n, 0.0), gains(2 * n, 1.0);
  for (auto& v : y) v = 1e-4 * rng.normal();

  Projection2D out;
  out.seed = cfg.seed;
  const int guarded_from = cfg.iterations / 2;
  double step_scale = 1.0;
  double current = kl_divergence(p, y);
  for (int t = 0; t < cfg.iterations; ++t) {
    const double alpha = t < cfg.exaggeration_iterations ? cfg.exaggeration : 1.0;
    const double momentum = t < 250 ? 0.5 : 0.8;
    const auto g = scaled_gradient(p, y, alpha);
    const std::vector<double> prev_y = y, prev_gains = gains;
    for (std::size_t k = 0; k < y.size(); ++k) {
      gains[k] = (g[k] > 0.0) != (update[k] > 0.0) ? gains[k] + 0.2 : gains[k] * 0.8;
      gains[k] = std::max(gains[k], 0.01);
      update[k] = momentum * update[k] - step_scale * cfg.learning_rate * gains[k] * g[k];
      y[k] += update[k];
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y[2 * i] / static_cast<double>(n);
      my += y[2 * i + 1] / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
    double next = kl_divergence(p, y);
    if (t >= guarded_from && !(next <= current)) {
      y = prev_y;
      gains = prev_gains;
      std::fill(update.begin(), update.end(), 0.0);
      step_scale *= 0.5;
      next = current;
    }
    current = next;
    out.kl_trace.push_back(current);
  }
  out.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.points[i] = {y[2 * i], y[2 * i + 1]};
  return out;
}

}  // namespace msa::viz
