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
#include <random>
#include <utility>
#include <vector>

#include "gpcm/mixture.hpp"
#include "gpcm/mstep.hpp"
#include "gpcm/types.hpp"

namespace gpcm {

/// Settings shared by all fitting entry points.
struct FitConfig {
  double epsilon = 1e-6;     // threshold on the accelerated likelihood gain
  int max_iter = 1000;       // EM iteration cap
  double min_weight = -1.0;  // soft-count floor per component; negative = p + 1
  int starts = 20;           // random initializations for multistart fitting
  bool hard_init = false;    // one-hot random starts instead of soft ones
  std::uint64_t seed = 1;
  MStepConfig mstep;
};

struct FitResult {
  MixtureParams params;
  Responsibilities resp;
  std::vector<double> loglik_trace;  // one observed-data log-likelihood per iteration
  bool converged = false;
  int iterations = 0;

  double loglik() const { return loglik_trace.back(); }
};

/// Posterior membership probabilities and the observed-data log-likelihood.
std::pair<Responsibilities, double> e_step(const DataMatrix& data, const MixtureParams& params);

/// Soft counts, weighted means and scatters.  Throws ComponentCollapseError
/// when any soft count falls below `min_weight`.
SufficientStats sufficient_stats(const DataMatrix& data, const Responsibilities& z,
                                 double min_weight);

/// Aitken acceleration stop rule on three consecutive log-likelihoods:
/// converged when the projected limit exceeds the current value by less than
/// `epsilon`.  Falls back to the plain increment when the acceleration ratio
/// is degenerate.
bool aitken_converged(double l0, double l1, double l2, double epsilon);

/// Random starting responsibilities: rows drawn uniformly from the simplex
/// (soft) or uniform one-hot rows (hard).
Responsibilities init_random(int n, int k, std::mt19937_64& rng, bool hard);

/// EM from a given starting responsibility matrix.
FitResult fit(const DataMatrix& data, const ModelId& model, const Responsibilities& init,
              const FitConfig& cfg = {});

/// Best of `cfg.starts` random initializations (seeded from cfg.seed and the
/// start index, so runs are reproducible).
FitResult fit_multistart(const DataMatrix& data, const ModelId& model, int k,
                         const FitConfig& cfg = {});

struct NestedPair {
  FitResult restricted;  // the constrained model
  FitResult full;        // VVV started from the restricted fit's posteriors
};

/// Fits `model`, then VVV initialized at the restricted posteriors.  The VVV
/// log-likelihood can then never fall below the restricted one; if it does by
/// more than rounding, DominanceViolationError.
NestedPair fit_nested_pair(const DataMatrix& data, const ModelId& model, int k,
                           const FitConfig& cfg = {});

/// Fits all eight family members, walking the constraint lattice in both
/// directions: an upward sweep seeds every model with the posteriors of its
/// immediate sub-models (plus its own random starts), a downward sweep then
/// offers every model the posteriors of its richer neighbours, and a final
/// upward sweep re-seeds children from any parents the downward sweep
/// improved.  The last sweep is what keeps the log-likelihood ordering along
/// nesting guaranteed.  Results come back in kGeneralFamily order.
std::vector<FitResult> fit_hierarchy(const DataMatrix& data, int k, const FitConfig& cfg = {});

}  // namespace gpcm
