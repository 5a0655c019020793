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

#include <Eigen/Dense>

#include "gpcm/errors.hpp"

namespace gpcm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// n x p matrix of observations, rows are cases.  Entries must be finite.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1)
      throw ValidationError("data matrix must have at least one row and one column");
    if (!values_.allFinite()) throw ValidationError("data matrix contains NaN or infinity");
  }

  int n() const { return static_cast<int>(values_.rows()); }
  int p() const { return static_cast<int>(values_.cols()); }
  const Matrix& values() const { return values_; }
  Eigen::RowVectorXd row(int i) const { return values_.row(i); }

 private:
  Matrix values_;
};

/// n x k matrix of posterior membership probabilities; every row sums to one.
class Responsibilities {
 public:
  Responsibilities() = default;
  explicit Responsibilities(Matrix z) : z_(std::move(z)) {
    if (z_.rows() < 1 || z_.cols() < 1)
      throw ValidationError("responsibility matrix must be nonempty");
    if (!z_.allFinite() || (z_.array() < 0.0).any())
      throw ValidationError("responsibilities must be finite and nonnegative");
    for (Eigen::Index i = 0; i < z_.rows(); ++i)
      if (std::abs(z_.row(i).sum() - 1.0) > 1e-10)
        throw ValidationError("responsibility row " + std::to_string(i) +
                              " does not sum to one");
  }

  int n() const { return static_cast<int>(z_.rows()); }
  int k() const { return static_cast<int>(z_.cols()); }
  const Matrix& values() const { return z_; }

 private:
  Matrix z_;
};

}  // namespace gpcm
