// Copyright 2026 The jouleget Authors
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
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "jouleget/error.hpp"
#include "jouleget/transfer_plan.hpp"

namespace jouleget::tuner {

struct ThroughputSample {
  int n;                  // stream count
  double throughput_mbps; // > 0
};

/// Coefficients of the stream-count throughput model
/// Th(n) = n / sqrt(a*n^2 + b*n + c). The form linearizes exactly via
/// (n/Th)^2 = a*n^2 + b*n + c, so three samples pin it down.
struct ModelCoeffs {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;

  double predict(double n) const {
    double q = (a * n + b) * n + c;
    if (!(q > 0.0)) throw Error("throughput model non-positive at n=" +
                                std::to_string(n));
    return n / std::sqrt(q);
  }
};

namespace detail {

// Gaussian elimination with partial pivoting on a 3x3 system.
inline std::array<double, 3> solve3(std::array<std::array<double, 4>, 3> m) {
  double scale = 1.0;
  for (const auto &row : m)
    for (int k = 0; k < 3; ++k) scale = std::max(scale, std::fabs(row[k]));
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    std::swap(m[col], m[pivot]);
    if (std::fabs(m[col][col]) < 1e-12 * scale)
      throw Error("singular system while fitting throughput model");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (int k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
    }
  }
  return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

} // namespace detail

/// Fits the stream model. Exactly three samples with distinct n solve the
/// linearized 3x3 system directly; more samples go through least squares
/// on the same linearization. The fitted quadratic must stay positive over
/// the sampled stream counts.
inline ModelCoeffs fit_throughput_model(
    const std::vector<ThroughputSample> &samples) {
  std::set<int> distinct;
  for (const auto &s : samples) {
    if (s.n < 1) throw Error("stream count must be >= 1");
    if (!(s.throughput_mbps > 0.0))
      throw Error("throughput samples must be > 0");
    distinct.insert(s.n);
  }
  if (distinct.size() < 3)
    throw Error("need samples at >= 3 distinct stream counts");

  std::array<double, 3> sol{};
  if (samples.size() == 3) {
    std::array<std::array<double, 4>, 3> m{};
    for (int i = 0; i < 3; ++i) {
      double n = samples[i].n;
      double y = std::pow(n / samples[i].throughput_mbps, 2.0);
      m[i] = {n * n, n, 1.0, y};
    }
    sol = detail::solve3(m);
  } else {
    // normal equations of least squares over (n^2, n, 1) -> y
    std::array<std::array<double, 4>, 3> m{};
    for (const auto &s : samples) {
      double n = s.n;
      double y = std::pow(n / s.throughput_mbps, 2.0);
      std::array<double, 3> x = {n * n, n, 1.0};
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m[r][c] += x[r] * x[c];
        m[r][3] += x[r] * y;
      }
    }
    sol = detail::solve3(m);
  }

  ModelCoeffs coeffs{sol[0], sol[1], sol[2]};
  for (int n : distinct) coeffs.predict(n); // throws if non-positive
  return coeffs;
}

/// Smallest stream count whose marginal throughput gain drops below tau,
/// scanning n = 1..n_max; n_max if gains persist throughout. Picking the
/// knee instead of the argmax avoids paying connection power for gains
/// that no longer matter.
inline int predict_optimal_n(const ModelCoeffs &coeffs, int n_max,
                             double marginal_gain_tau = 0.05) {
  if (n_max < 1) throw Error("n_max must be >= 1");
  for (int n = 1; n < n_max; ++n) {
    double gain = coeffs.predict(n + 1) / coeffs.predict(n) - 1.0;
    if (gain < marginal_gain_tau) return n;
  }
  return n_max;
}

/// Level with minimum energy; ties go to the lower level.
inline int find_energy_break_point(
    const std::vector<std::pair<int, double>> &points) {
  if (points.empty()) throw Error("no points for break-point search");
  auto sorted = points;
  std::sort(sorted.begin(), sorted.end());
  int best_level = sorted.front().first;
  double best_energy = sorted.front().second;
  for (const auto &[level, e] : sorted) {
    if (e < best_energy) {
      best_energy = e;
      best_level = level;
    }
  }
  return best_level;
}

struct GridPoint {
  int cc = 1;
  int p = 1;
  std::uint64_t io_bytes = 8192;
  double throughput_mbps = 0.0;
  double energy_per_100mb_j = std::numeric_limits<double>::quiet_NaN();
};

enum class Objective {
  max_throughput,
  min_energy,
  energy_under_throughput_floor,
};

/// Picks the grid cell that optimizes the objective. Cells with NaN energy
/// (no trace captured) are skipped for energy objectives. Ties resolve to
/// the lexicographically smallest (cc, p, io) so the result is stable.
inline TransferPlan recommend_plan(const std::vector<GridPoint> &grid,
                                   Objective objective,
                                   double floor_mbps = 0.0) {
  if (grid.empty()) throw Error("empty parameter grid");
  auto key = [](const GridPoint &g) {
    return std::make_tuple(g.cc, g.p, g.io_bytes);
  };
  const GridPoint *best = nullptr;
  for (const auto &g : grid) {
    bool energy_objective = objective != Objective::max_throughput;
    if (energy_objective && std::isnan(g.energy_per_100mb_j)) continue;
    if (objective == Objective::energy_under_throughput_floor &&
        g.throughput_mbps < floor_mbps)
      continue;
    if (!best) {
      best = &g;
      continue;
    }
    bool better = false;
    if (objective == Objective::max_throughput) {
      better = g.throughput_mbps > best->throughput_mbps ||
               (g.throughput_mbps == best->throughput_mbps &&
                key(g) < key(*best));
    } else {
      better = g.energy_per_100mb_j < best->energy_per_100mb_j ||
               (g.energy_per_100mb_j == best->energy_per_100mb_j &&
                key(g) < key(*best));
    }
    if (better) best = &g;
  }
  if (!best) {
    if (objective == Objective::energy_under_throughput_floor)
      throw Error("no grid cell meets the throughput floor");
    throw Error("no grid cell carries energy data");
  }
  return TransferPlan{best->cc, best->p, best->io_bytes};
}

} // namespace jouleget::tuner
