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

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gpcm/closed_test.hpp"
#include "gpcm/mixture.hpp"

namespace gpcm {

/// Planar covariance lambda * R(angle) diag(1/delta, delta) R(angle)' as
/// factors.  delta must lie in (0, 1] so the shape is already sorted.
CovarianceFactors planar_covariance(double lambda, double delta, double angle);

/// Bhattacharyya overlap coefficient B = exp(-B*) in (0, 1], where
/// B* = (1/8)(mu2-mu1)' Sbar^-1 (mu2-mu1) + (1/2) log(|Sbar|/sqrt(|S1||S2|))
/// and Sbar = (S1+S2)/2.
double bhattacharyya_overlap(const Vector& mu1, const Vector& mu2, const Matrix& s1,
                             const Matrix& s2);

/// Smallest vertical offset m >= 0 of the second mean (first mean at the
/// origin, offset along the second axis) with overlap(m) = target, found by
/// bisection to |B - target| <= 1e-10.  The target must be strictly below the
/// zero-offset overlap, otherwise UnreachableOverlapError.
double solve_mean_offset(double target, const Matrix& s1, const Matrix& s2);

/// Two balanced planar components whose second covariance varies from the
/// first exactly in the factors the model frees:
///   component 1: lambda 1, delta 0.7, angle pi/6;
///   component 2: lambda 3 (V volume), delta 0.3 (V shape),
///                angle pi/6 + pi/4 (V orientation).
/// The second mean sits (0, offset) away to hit the requested overlap.
struct ScenarioSpec {
  ModelId model;
  int n = 0;
  double overlap = 0.0;
  double offset = 0.0;        // solved second-mean displacement
  MixtureParams params;       // ready-to-sample ground truth
};

ScenarioSpec make_scenario(const ModelId& model, int n, double overlap);

/// Samples spec.n rows; labels (if requested) hold the true components.
DataMatrix generate_dataset(const ScenarioSpec& spec, std::uint64_t seed,
                            std::vector<int>* labels = nullptr);

/// Kolmogorov-Smirnov distance between a sample and the uniform law on [0,1].
double ks_uniform(std::vector<double> values);

struct SdfResult {
  std::vector<double> pvalues;  // sorted ascending, successes only
  int failures = 0;
  std::optional<double> ks;     // empty when no replicate succeeded
};

/// Null-distribution study of the test p-values: `reps` datasets are drawn
/// from the scenario's ground truth, each is tested (model vs VVV) with the
/// requested method, and the p-values are compared against uniformity.
SdfResult pvalue_sdf_experiment(const ModelId& model, int n, double overlap, int reps,
                                TestMethod method, int R, const FitConfig& cfg = {},
                                std::uint64_t seed = 1, int threads = 1);

}  // namespace gpcm
