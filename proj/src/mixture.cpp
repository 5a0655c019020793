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

#include "gpcm/mixture.hpp"

#include <cmath>
#include <numbers>

#include "gpcm/rng.hpp"

namespace gpcm {

void MixtureParams::validate() const {
  const int k = components();
  const int p = dim();
  if (k < 1 || p < 1) throw ValidationError("mixture: needs k >= 1 components in p >= 1 dims");
  if (means.rows() != k) throw ValidationError("mixture: means must have one row per component");
  if (!weights.allFinite() || (weights.array() <= 0.0).any())
    throw ValidationError("mixture: weights must be positive");
  if (std::abs(weights.sum() - 1.0) > 1e-10)
    throw ValidationError("mixture: weights must sum to one");

  auto expect = [&](std::size_t got, Flag f, const char* what) {
    const std::size_t want = f == Flag::Equal ? 1u : static_cast<std::size_t>(k);
    if (got != want)
      throw ValidationError(std::string("mixture: ") + what + " storage size does not match " +
                            model.name());
  };
  expect(lambdas.size(), model.volume, "volume");
  expect(shapes.size(), model.shape, "shape");
  expect(orientations.size(), model.orientation, "orientation");
  for (int j = 0; j < k; ++j) {
    const CovarianceFactors f = factors(j);
    if (f.dim() != p) throw ValidationError("mixture: factor dimension mismatch");
    f.validate();
  }
}

Matrix log_weighted_densities(const DataMatrix& data, const MixtureParams& params) {
  const int n = data.n();
  const int k = params.components();
  const int p = data.p();
  if (params.dim() != p) throw ValidationError("data dimension does not match parameters");

  Matrix out(n, k);
  const double c = -0.5 * p * std::log(2.0 * std::numbers::pi);
  for (int j = 0; j < k; ++j) {
    const double lam = params.lambda(j);
    const Vector& delta = params.shape(j);
    const Matrix& gamma = params.orientation(j);
    const double head = std::log(params.weights[j]) + c - 0.5 * p * std::log(lam);
    // Rotate all rows at once; the quadratic form is diagonal afterwards.
    Matrix y = (data.values().rowwise() - params.means.row(j)) * gamma;
    Vector quad = (y.array().square().rowwise() * (1.0 / delta.array()).transpose())
                      .rowwise()
                      .sum() /
                  lam;
    out.col(j) = (head - 0.5 * quad.array()).matrix();
  }
  return out;
}

double mixture_loglik(const DataMatrix& data, const MixtureParams& params) {
  const Matrix lw = log_weighted_densities(data, params);
  double total = 0.0;
  for (Eigen::Index i = 0; i < lw.rows(); ++i) {
    const double m = lw.row(i).maxCoeff();
    if (!std::isfinite(m))
      throw NumericError("log-likelihood underflow: a row has no finite component density");
    total += m + std::log((lw.row(i).array() - m).exp().sum());
  }
  return total;
}

DataMatrix sample_mixture(const MixtureParams& params, int n, std::mt19937_64& rng,
                          std::vector<int>* labels) {
  if (n < 1) throw ValidationError("sample_mixture: n must be positive");
  params.validate();
  const int k = params.components();
  const int p = params.dim();

  Vector cum(k);
  double acc = 0.0;
  for (int j = 0; j < k; ++j) cum[j] = (acc += params.weights[j]);

  // Pre-scale the rotation columns by the per-axis standard deviations.
  std::vector<Matrix> transf(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j)
    transf[j] = params.orientation(j) *
                (params.lambda(j) * params.shape(j).array()).sqrt().matrix().asDiagonal();

  Matrix x(n, p);
  if (labels) labels->assign(static_cast<std::size_t>(n), 0);
  Vector u(p);
  for (int i = 0; i < n; ++i) {
    const double d = uniform01(rng);
    int j = 0;
    while (j < k - 1 && d >= cum[j]) ++j;
    for (int l = 0; l < p; ++l) u[l] = std_normal(rng);
    x.row(i) = params.means.row(j) + (transf[j] * u).transpose();
    if (labels) (*labels)[static_cast<std::size_t>(i)] = j;
  }
  return DataMatrix(std::move(x));
}

}  // namespace gpcm
