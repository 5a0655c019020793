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

#include "gpcm/criteria.hpp"

#include <cmath>

namespace gpcm {

std::optional<double> CriteriaValues::at(int c) const {
  switch (c) {
    case 0:
      return aic;
    case 1:
      return aic3;
    case 2:
      return aicc;
    case 3:
      return aicu;
    case 4:
      return awe;
    case 5:
      return bic;
    case 6:
      return caic;
    case 7:
      return icl;
    default:
      throw ValidationError("criterion index out of range");
  }
}

double map_classification_term(const Responsibilities& z) {
  double term = 0.0;
  for (int i = 0; i < z.n(); ++i) {
    Eigen::Index best = 0;
    z.values().row(i).maxCoeff(&best);  // first maximum wins ties
    term += std::log(z.values()(i, best));
  }
  return term;
}

CriteriaValues compute_criteria(double twice_loglik, int eta, int n, double map_term) {
  if (eta < 0 || n < 1) throw ValidationError("criteria need eta >= 0 and n >= 1");
  CriteriaValues v;
  const double logn = std::log(static_cast<double>(n));
  v.aic = twice_loglik - 2.0 * eta;
  v.aic3 = twice_loglik - 3.0 * eta;
  if (n > eta + 1) {
    const double denom = static_cast<double>(n - eta - 1);
    v.aicc = v.aic - 2.0 * eta * (eta + 1.0) / denom;
    v.aicu = *v.aicc - n * std::log(n / denom);
  }
  v.awe = twice_loglik - 2.0 * eta * (1.5 + logn);
  v.bic = twice_loglik - eta * logn;
  v.caic = twice_loglik - eta * (1.0 + logn);
  v.icl = v.bic + map_term;
  return v;
}

IcRow information_criteria(const FitResult& fit) {
  IcRow row;
  row.model = fit.params.model;
  const int n = fit.resp.n();
  row.eta = total_params(row.model, fit.params.dim(), fit.params.components());
  row.twice_loglik = 2.0 * fit.loglik();
  row.values = compute_criteria(row.twice_loglik, row.eta, n, map_classification_term(fit.resp));
  return row;
}

IcTable make_ic_table(const std::vector<FitResult>& fits) {
  IcTable table;
  for (const FitResult& f : fits) table.rows.push_back(information_criteria(f));
  for (int c = 0; c < 8; ++c) {
    int best = -1;
    double best_val = 0.0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const std::optional<double> v = table.rows[i].values.at(c);
      if (!v) continue;
      if (best < 0 || *v > best_val) {
        best = static_cast<int>(i);
        best_val = *v;
      }
    }
    table.best[static_cast<std::size_t>(c)] = best;
  }
  return table;
}

}  // namespace gpcm
