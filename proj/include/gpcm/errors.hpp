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

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gpcm {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller handed us something malformed: unknown model code, bad CSV,
/// infeasible settings.  Distinct from numerical trouble discovered mid-run.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure while computing: rank-deficient scatter, collapsed
/// component, broken likelihood ordering.
class NumericError : public Error {
 public:
  using Error::Error;
};

class InvalidModelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CsvError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Requested (alpha, R) pair admits no exact order statistic.
class InvalidBootstrapPlanError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A p-value set handed to the multiplicity adjustment is missing entries.
class IncompleteInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The requested overlap cannot be reached by moving the mean apart.
class UnreachableOverlapError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A symmetric matrix failed the positive-definite spectral factorization.
class DecompositionError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A weighted scatter matrix is too ill-conditioned for the requested model.
class DegenerateScatterError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Nonpositive quadratic form handed to the ordered eigenvalue solver.
class InvalidProjectionError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Probability mass of one component fell below the floor during EM.
class ComponentCollapseError : public NumericError {
 public:
  ComponentCollapseError(int component, double mass, std::vector<double> partial_trace = {})
      : NumericError("component " + std::to_string(component) + " collapsed (soft count " +
                     std::to_string(mass) + " below floor)"),
        component_(component),
        mass_(mass),
        trace_(std::move(partial_trace)) {}

  int component() const noexcept { return component_; }
  double mass() const noexcept { return mass_; }
  const std::vector<double>& partial_trace() const noexcept { return trace_; }
  void set_partial_trace(std::vector<double> t) { trace_ = std::move(t); }

 private:
  int component_;
  double mass_;
  std::vector<double> trace_;
};

/// A restricted fit beat the unrestricted one by more than rounding allows.
class DominanceViolationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Too many bootstrap replicates failed to produce a statistic.
class BootstrapUnstableError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace gpcm
