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

#include <array>
#include <optional>
#include <vector>

#include "gpcm/em.hpp"

namespace gpcm {

inline constexpr std::array<const char*, 8> kCriterionNames{
    "AIC", "AIC3", "AICc", "AICu", "AWE", "BIC", "CAIC", "ICL"};

/// All eight criteria in kCriterionNames order; larger is better for every
/// one of them.  AICc/AICu are empty when n <= eta + 1.
struct CriteriaValues {
  double aic = 0.0;
  double aic3 = 0.0;
  std::optional<double> aicc;
  std::optional<double> aicu;
  double awe = 0.0;
  double bic = 0.0;
  double caic = 0.0;
  double icl = 0.0;

  std::optional<double> at(int c) const;
};

/// Sum over rows of the log posterior at each row's MAP component (ties to
/// the lowest index).  Always <= 0, so ICL <= BIC.
double map_classification_term(const Responsibilities& z);

/// Criteria from the raw ingredients:
///   AIC  = 2l - 2 eta                 AIC3 = 2l - 3 eta
///   AICc = AIC - 2 eta(eta+1)/(n-eta-1)
///   AICu = AICc - n log(n/(n-eta-1))
///   AWE  = 2l - 2 eta (3/2 + log n)   BIC  = 2l - eta log n
///   CAIC = 2l - eta (1 + log n)       ICL  = BIC + map term
CriteriaValues compute_criteria(double twice_loglik, int eta, int n, double map_term);

struct IcRow {
  ModelId model;
  int eta = 0;
  double twice_loglik = 0.0;
  CriteriaValues values;
};

/// Criteria for one fitted model (n is taken from the responsibilities).
IcRow information_criteria(const FitResult& fit);

struct IcTable {
  std::vector<IcRow> rows;
  std::array<int, 8> best{};  // row index of the winner per criterion, -1 if none defined
};

/// Rows plus the per-criterion winners.
IcTable make_ic_table(const std::vector<FitResult>& fits);

}  // namespace gpcm
