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

#include "gpcm/covariance.hpp"

#include <cmath>
#include <numbers>

namespace gpcm {

namespace {

constexpr double kStructureTol = 1e-8;

// Make the first entry of each column whose magnitude clears a relative
// threshold positive, so repeated factorizations of the same matrix agree.
void fix_column_signs(Matrix& vecs) {
  for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
    const double big = vecs.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
      if (std::abs(vecs(r, c)) > 1e-12 * big) {
        if (vecs(r, c) < 0.0) vecs.col(c) = -vecs.col(c);
        break;
      }
    }
  }
}

}  // namespace

void CovarianceFactors::validate() const {
  const int p = dim();
  if (p < 1) throw ValidationError("covariance factors: empty shape vector");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ValidationError("covariance factors: volume must be positive and finite");
  if (orientation.rows() != p || orientation.cols() != p)
    throw ValidationError("covariance factors: orientation must be p x p");
  double log_prod = 0.0;
  for (int l = 0; l < p; ++l) {
    if (!(shape[l] > 0.0) || !std::isfinite(shape[l]))
      throw ValidationError("covariance factors: shape entries must be positive and finite");
    if (l > 0 && shape[l] > shape[l - 1] * (1.0 + kStructureTol))
      throw ValidationError("covariance factors: shape entries must be non-increasing");
    log_prod += std::log(shape[l]);
  }
  if (std::abs(log_prod) > p * kStructureTol)
    throw ValidationError("covariance factors: shape must have unit product");
  const double ortho = (orientation.transpose() * orientation - Matrix::Identity(p, p))
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > kStructureTol)
    throw ValidationError("covariance factors: orientation is not orthogonal");
}

Matrix compose_covariance(const CovarianceFactors& f) {
  Matrix sigma = f.orientation * (f.lambda * f.shape.asDiagonal()) * f.orientation.transpose();
  return Matrix(0.5 * (sigma + sigma.transpose()));
}

CovarianceFactors decompose_covariance(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1)
    throw DecompositionError("matrix to factor must be square and nonempty");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > kStructureTol * scale)
    throw DecompositionError("matrix to factor is not symmetric");

  const Eigen::Index p = sigma.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sigma + sigma.transpose()));
  if (eig.info() != Eigen::Success)
    throw DecompositionError("eigenvalue iteration failed to converge");

  Vector evals = eig.eigenvalues().reverse();  // now decreasing
  Matrix evecs = eig.eigenvectors().rowwise().reverse();
  if (!(evals[p - 1] > 0.0) || evals[p - 1] <= 1e-12 * evals[0])
    throw DecompositionError("matrix to factor is not positive definite");
  fix_column_signs(evecs);

  CovarianceFactors f;
  f.lambda = std::exp(evals.array().log().mean());  // |Sigma|^(1/p)
  f.shape = evals / f.lambda;
  f.orientation = std::move(evecs);
  return f;
}

double log_density(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& mean,
                   const CovarianceFactors& f) {
  const int p = f.dim();
  const Vector y = f.orientation.transpose() * (x - mean).transpose();
  const double quad = (y.array().square() / f.shape.array()).sum() / f.lambda;
  return -0.5 * (p * std::log(2.0 * std::numbers::pi) + p * std::log(f.lambda) + quad);
}

}  // namespace gpcm
