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
#include <vector>

#include "gpcm/mstep.hpp"

namespace gpcm {

namespace {

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

double orientation_objective(const std::vector<Matrix>& scatters, const std::vector<Vector>& xis,
                             const Matrix& gamma) {
  double g = 0.0;
  for (std::size_t j = 0; j < scatters.size(); ++j) {
    const Matrix wg = scatters[j] * gamma;
    for (Eigen::Index l = 0; l < gamma.cols(); ++l)
      g += gamma.col(l).dot(wg.col(l)) / xis[j][l];
  }
  return g;
}

// One sweep of pairwise plane rotations.  For columns (q, r) the objective
// restricted to their span is u'Au + const with
//   A = sum_j (1/xi_jq - 1/xi_jr) * H' W_j H,   H = [gamma_q gamma_r],
// so the exact minimizer is the eigenvector of A with smallest eigenvalue.
void jacobi_sweep(const std::vector<Matrix>& scatters, const std::vector<Vector>& xis,
                  Matrix& gamma) {
  const Eigen::Index p = gamma.cols();
  for (Eigen::Index q = 0; q + 1 < p; ++q) {
    for (Eigen::Index r = q + 1; r < p; ++r) {
      Matrix h(gamma.rows(), 2);
      h.col(0) = gamma.col(q);
      h.col(1) = gamma.col(r);
      Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
      for (std::size_t j = 0; j < scatters.size(); ++j) {
        const double coeff = 1.0 / xis[j][q] - 1.0 / xis[j][r];
        if (coeff == 0.0) continue;
        a += coeff * (h.transpose() * scatters[j] * h);
      }
      a = 0.5 * (a + a.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(a);
      const Eigen::Vector2d u = eig.eigenvectors().col(0);  // smallest eigenvalue
      const Eigen::Vector2d v(-u[1], u[0]);
      gamma.col(q) = h * u;
      gamma.col(r) = h * v;
    }
  }
}

}  // namespace

Matrix update_common_orientation(const std::vector<Matrix>& scatters,
                                 const std::vector<Vector>& xis, const Matrix& init,
                                 const MStepConfig& cfg) {
  const std::size_t k = scatters.size();
  if (k == 0 || xis.size() != k)
    throw ValidationError("orientation update: scatters and xis must be nonempty and match");
  const Eigen::Index p = init.rows();
  if (init.cols() != p) throw ValidationError("orientation update: init must be square");
  for (std::size_t j = 0; j < k; ++j) {
    if (scatters[j].rows() != p || scatters[j].cols() != p || xis[j].size() != p)
      throw ValidationError("orientation update: dimension mismatch");
    if ((xis[j].array() <= 0.0).any())
      throw ValidationError("orientation update: xi entries must be positive");
  }

  if (k == 1) {
    // Exact: pair the largest scatter eigenvalue with the largest xi.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (scatters[0] + scatters[0].transpose()));
    if (eig.info() != Eigen::Success)
      throw DecompositionError("orientation update: eigenvalue iteration failed");
    Matrix vecs = eig.eigenvectors().rowwise().reverse();
    fix_column_signs(vecs);
    return vecs;
  }

  // Majorization: with wbar_j >= lambda_max(W_j) the surrogate is linear in
  // Gamma and its minimizer over the orthogonal group is the polar factor
  // U V' of M = sum_j (wbar_j I - W_j) Gamma Xi_j^-1.
  std::vector<double> wbar(k);
  for (std::size_t j = 0; j < k; ++j) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (scatters[j] + scatters[j].transpose()),
                                              Eigen::EigenvaluesOnly);
    wbar[j] = eig.eigenvalues().maxCoeff();
  }

  Matrix gamma = init;
  double g = orientation_objective(scatters, xis, gamma);
  const double g0 = g;
  for (int round = 0; round < cfg.orientation_max_iter; ++round) {
    Matrix m = Matrix::Zero(p, p);
    for (std::size_t j = 0; j < k; ++j)
      m += (wbar[j] * gamma - scatters[j] * gamma) * xis[j].cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix cand = svd.matrixU() * svd.matrixV().transpose();
    const double gc = orientation_objective(scatters, xis, cand);
    if (gc < g - 1e-12 * (1.0 + std::abs(g))) {
      gamma = cand;
      g = gc;
      continue;
    }
    // Majorization stalled; polish with exact pairwise rotations.
    Matrix swept = gamma;
    jacobi_sweep(scatters, xis, swept);
    const double gs = orientation_objective(scatters, xis, swept);
    if (gs < g - 1e-12 * (1.0 + std::abs(g))) {
      gamma = swept;
      g = gs;
      continue;
    }
    break;
  }
  if (g > g0 + 1e-10 * (1.0 + std::abs(g0)))
    throw NumericError("orientation update: objective increased");
  return gamma;
}

}  // namespace gpcm
