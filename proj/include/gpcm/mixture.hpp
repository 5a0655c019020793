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

#include <random>
#include <vector>

#include "gpcm/covariance.hpp"
#include "gpcm/model_space.hpp"
#include "gpcm/types.hpp"

namespace gpcm {

/// Fitted (or constructed) parameters of a k-component Gaussian mixture under
/// one of the family constraints.  Factors constrained equal across
/// components are stored once, so every component reads the very same object.
struct MixtureParams {
  ModelId model;
  Vector weights;                   // k mixing proportions
  Matrix means;                     // k x p, one row per component
  std::vector<double> lambdas;      // size 1 (shared) or k
  std::vector<Vector> shapes;       // size 1 (shared) or k
  std::vector<Matrix> orientations; // size 1 (shared) or k

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }

  double lambda(int j) const { return lambdas[lambdas.size() == 1 ? 0 : j]; }
  const Vector& shape(int j) const { return shapes[shapes.size() == 1 ? 0 : j]; }
  const Matrix& orientation(int j) const {
    return orientations[orientations.size() == 1 ? 0 : j];
  }

  /// Factors of component j (copies of the stored objects).
  CovarianceFactors factors(int j) const { return {lambda(j), shape(j), orientation(j)}; }

  /// Dense covariance of component j.
  Matrix covariance(int j) const { return compose_covariance(factors(j)); }

  /// Checks dimensions, the simplex constraint on weights, factor storage
  /// sizes consistent with the model flags, and each factor's invariants.
  void validate() const;
};

/// n x k matrix with entry (i, j) = log(pi_j) + log N(x_i; mu_j, Sigma_j).
Matrix log_weighted_densities(const DataMatrix& data, const MixtureParams& params);

/// Observed-data log-likelihood, accumulated in log space.
double mixture_loglik(const DataMatrix& data, const MixtureParams& params);

/// Draws n observations; fills `labels` (if given) with the component of
/// each row.  Consumes the generator in a fixed order, so equal seeds give
/// identical output.
DataMatrix sample_mixture(const MixtureParams& params, int n, std::mt19937_64& rng,
                          std::vector<int>* labels = nullptr);

}  // namespace gpcm
