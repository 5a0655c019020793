/*
 * Copyright 2026 the gpcmtest authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <string>
#include <vector>

#include "gpcm/mstep.hpp"

namespace gpcm {

namespace {

// Closed-form minimizer when the tight ordering constraints are fixed.
// Coordinates joined by tight constraints form blocks on which the solution
// is constant: block value log(mean(b over block)) - log(w_eff), where w_eff
// is the linear coefficient (shifted by the equality multiplier when the
// unit-determinant constraint is on, which makes the values sum to zero).
Vector solve_for_working_set(const Vector& b, double weight, bool unit_determinant,
                             const std::vector<char>& tight) {
  const int p = static_cast<int>(b.size());
  Vector zeta(p);
  double sum_log_means = 0.0;
  for (int start = 0; start < p;) {
    int end = start;
    while (end < p - 1 && tight[static_cast<std::size_t>(end)]) ++end;
    const double mean = b.segment(start, end - start + 1).mean();
    const double c = std::log(mean);
    zeta.segment(start, end - start + 1).setConstant(c);
    sum_log_means += (end - start + 1) * c;
    start = end + 1;
  }
  const double log_weff = unit_determinant ? sum_log_means / p : std::log(weight);
  zeta.array() -= log_weff;
  return zeta;
}

// Prefix sums of the stationarity residual give the inequality multipliers:
// mu_i = sum_{l <= i} (w_eff - b_l * exp(-zeta_l)).
Vector multipliers(const Vector& b, const Vector& zeta, double weff) {
  Vector mu(b.size());
  double acc = 0.0;
  for (Eigen::Index l = 0; l < b.size(); ++l) {
    acc += weff - b[l] * std::exp(-zeta[l]);
    mu[l] = acc;
  }
  return mu;
}

}  // namespace

Vector ordered_eigenvalue_solve(const Vector& quad_forms, double weight, bool unit_determinant) {
  const int p = static_cast<int>(quad_forms.size());
  if (p < 1) throw ValidationError("ordered solve: empty quadratic form vector");
  if (!(weight > 0.0) || !std::isfinite(weight))
    throw ValidationError("ordered solve: weight must be positive and finite");
  for (int l = 0; l < p; ++l)
    if (!(quad_forms[l] > 0.0) || !std::isfinite(quad_forms[l]))
      throw InvalidProjectionError("ordered solve: quadratic form entry " + std::to_string(l) +
                                   " is not strictly positive");

  const Vector& b = quad_forms;
  // Start with every ordering constraint tight: a single constant block is
  // always feasible, and constraints are dropped as multipliers dictate.
  std::vector<char> tight(static_cast<std::size_t>(std::max(0, p - 1)), 1);
  Vector zeta = solve_for_working_set(b, weight, unit_determinant, tight);

  const int max_rounds = 10 * (p + 2) * (p + 2);
  for (int round = 0; round < max_rounds; ++round) {
    const Vector cand = solve_for_working_set(b, weight, unit_determinant, tight);

    // Longest feasible step from zeta toward cand; constraints outside the
    // working set must keep zeta_i >= zeta_{i+1}.
    double alpha = 1.0;
    int blocker = -1;
    for (int i = 0; i + 1 < p; ++i) {
      if (tight[static_cast<std::size_t>(i)]) continue;
      const double gap = zeta[i] - zeta[i + 1];
      const double cand_gap = cand[i] - cand[i + 1];
      if (cand_gap >= 0.0) continue;
      const double a = std::max(0.0, gap / (gap - cand_gap));
      if (a < alpha) {
        alpha = a;
        blocker = i;
      }
    }
    if (blocker >= 0) {
      zeta += alpha * (cand - zeta);
      tight[static_cast<std::size_t>(blocker)] = 1;
      continue;
    }
    zeta = cand;

    const double weff =
        unit_determinant ? (b.array() * (-zeta.array()).exp()).sum() / p : weight;
    const Vector mu = multipliers(b, zeta, weff);
    const double tol = 1e-12 * std::max(1.0, std::abs(weff) * p);
    int worst = -1;
    double worst_val = -tol;
    for (int i = 0; i + 1 < p; ++i) {
      if (tight[static_cast<std::size_t>(i)] && mu[i] < worst_val) {
        worst_val = mu[i];
        worst = i;
      }
    }
    if (worst >= 0) {
      tight[static_cast<std::size_t>(worst)] = 0;
      continue;
    }

    // KKT certificate: primal feasibility, stationarity through the
    // multiplier prefix sums, and complementary slackness.
    const double cert = 1e-7 * std::max(1.0, std::abs(weff) * p);
    for (int i = 0; i + 1 < p; ++i) {
      if (zeta[i] < zeta[i + 1] - 1e-12)
        throw NumericError("ordered solve: certified point violates the ordering");
      if (tight[static_cast<std::size_t>(i)] ? mu[i] < -cert : std::abs(mu[i]) > cert)
        throw NumericError("ordered solve: KKT certificate failed");
    }
    if (std::abs(mu[p - 1]) > cert)
      throw NumericError("ordered solve: stationarity residual too large");
    if (unit_determinant && std::abs(zeta.sum()) > 1e-9 * p)
      throw NumericError("ordered solve: zero-sum constraint drifted");
    return zeta;
  }
  throw NumericError("ordered solve: active set failed to settle");
}

}  // namespace gpcm
