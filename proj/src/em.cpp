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

#include "gpcm/em.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "gpcm/rng.hpp"

namespace gpcm {

namespace {

// Likelihoods may wiggle at this relative scale from rounding alone.
constexpr double kMonotoneSlack = 1e-8;

MixtureParams assemble(const ModelId& model, const SufficientStats& stats, CovarianceSet cov) {
  MixtureParams params;
  params.model = model;
  params.weights = stats.counts / stats.n;
  params.means = stats.means;
  params.lambdas = std::move(cov.lambdas);
  params.shapes = std::move(cov.shapes);
  params.orientations = std::move(cov.orientations);
  return params;
}

}  // namespace

std::pair<Responsibilities, double> e_step(const DataMatrix& data, const MixtureParams& params) {
  const Matrix lw = log_weighted_densities(data, params);
  Matrix z(lw.rows(), lw.cols());
  double loglik = 0.0;
  for (Eigen::Index i = 0; i < lw.rows(); ++i) {
    const double m = lw.row(i).maxCoeff();
    if (!std::isfinite(m))
      throw NumericError("e-step underflow: observation " + std::to_string(i) +
                         " has no finite component density");
    const Eigen::ArrayXd shifted = (lw.row(i).array() - m).exp();
    const double norm = shifted.sum();
    z.row(i) = (shifted / norm).matrix();
    loglik += m + std::log(norm);
  }
  return {Responsibilities(std::move(z)), loglik};
}

SufficientStats sufficient_stats(const DataMatrix& data, const Responsibilities& z,
                                 double min_weight) {
  if (z.n() != data.n()) throw ValidationError("responsibilities do not match the data rows");
  const int k = z.k();
  const int p = data.p();
  SufficientStats stats;
  stats.n = data.n();
  stats.counts = z.values().colwise().sum();
  stats.means.resize(k, p);
  stats.scatters.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    if (stats.counts[j] < min_weight)
      throw ComponentCollapseError(j, stats.counts[j]);
    stats.means.row(j) = (z.values().col(j).transpose() * data.values()) / stats.counts[j];
    const Matrix centered = data.values().rowwise() - stats.means.row(j);
    const Matrix weighted = centered.array().colwise() * z.values().col(j).array();
    Matrix w = weighted.transpose() * centered;
    stats.scatters[static_cast<std::size_t>(j)] = 0.5 * (w + w.transpose());
  }
  return stats;
}

bool aitken_converged(double l0, double l1, double l2, double epsilon) {
  const double d0 = l1 - l0;
  const double d1 = l2 - l1;
  if (d0 == 0.0) return std::abs(d1) < epsilon;
  const double a = d1 / d0;
  // The geometric projection only makes sense for a contraction.
  if (a >= 1.0 || !std::isfinite(a)) return std::abs(d1) < epsilon;
  const double projected = l1 + d1 / (1.0 - a);
  return projected - l1 < epsilon;
}

Responsibilities init_random(int n, int k, std::mt19937_64& rng, bool hard) {
  if (n < k || k < 1) throw ValidationError("random init requires n >= k >= 1");
  Matrix z(n, k);
  if (hard) {
    z.setZero();
    for (int i = 0; i < n; ++i) {
      const int j = std::min(k - 1, static_cast<int>(uniform01(rng) * k));
      z(i, j) = 1.0;
    }
  } else {
    // Exponential spacings normalize to a uniform draw from the simplex.
    for (int i = 0; i < n; ++i) {
      double total = 0.0;
      for (int j = 0; j < k; ++j) {
        const double e = -std::log(1.0 - uniform01(rng));
        z(i, j) = e;
        total += e;
      }
      z.row(i) /= total;
    }
  }
  return Responsibilities(std::move(z));
}

FitResult fit(const DataMatrix& data, const ModelId& model, const Responsibilities& init,
              const FitConfig& cfg) {
  if (init.n() != data.n()) throw ValidationError("init responsibilities do not match data");
  if (cfg.max_iter < 1) throw ValidationError("fit: max_iter must be at least 1");
  if (!(cfg.epsilon > 0.0)) throw ValidationError("fit: epsilon must be positive");
  const double min_weight = cfg.min_weight >= 0.0 ? cfg.min_weight : data.p() + 1.0;

  Responsibilities z = init;
  std::vector<double> trace;
  std::optional<CovarianceSet> cov;
  MixtureParams params;
  bool converged = false;

  for (int it = 0; it < cfg.max_iter; ++it) {
    SufficientStats stats;
    try {
      stats = sufficient_stats(data, z, min_weight);
    } catch (ComponentCollapseError& e) {
      e.set_partial_trace(trace);
      throw;
    }
    cov = mstep_covariances(model, stats, cov ? &*cov : nullptr, cfg.mstep);
    params = assemble(model, stats, *cov);
    auto [z_new, loglik] = e_step(data, params);
    z = std::move(z_new);
    if (!trace.empty() && loglik < trace.back() - kMonotoneSlack * (1.0 + std::abs(trace.back())))
      throw NumericError("EM log-likelihood decreased from " + std::to_string(trace.back()) +
                         " to " + std::to_string(loglik));
    trace.push_back(loglik);
    const std::size_t t = trace.size();
    if (t >= 3 && aitken_converged(trace[t - 3], trace[t - 2], trace[t - 1], cfg.epsilon)) {
      converged = true;
      break;
    }
  }

  FitResult out{std::move(params), std::move(z), std::move(trace), converged, 0};
  out.iterations = static_cast<int>(out.loglik_trace.size());
  return out;
}

FitResult fit_multistart(const DataMatrix& data, const ModelId& model, int k,
                         const FitConfig& cfg) {
  if (cfg.starts < 1) throw ValidationError("multistart fitting needs at least one start");
  std::optional<FitResult> best;
  std::exception_ptr last_error;
  const auto model_tag = static_cast<std::uint64_t>(family_index(model));
  for (int s = 0; s < cfg.starts; ++s) {
    auto rng = make_rng(cfg.seed, {model_tag, static_cast<std::uint64_t>(s)});
    try {
      FitResult r = fit(data, model, init_random(data.n(), k, rng, cfg.hard_init), cfg);
      if (!best || r.loglik() > best->loglik()) best = std::move(r);
    } catch (const NumericError&) {
      last_error = std::current_exception();
    }
  }
  if (!best) std::rethrow_exception(last_error);
  return std::move(*best);
}

NestedPair fit_nested_pair(const DataMatrix& data, const ModelId& model, int k,
                           const FitConfig& cfg) {
  FitResult restricted = fit_multistart(data, model, k, cfg);
  FitResult full = fit(data, kVVV, restricted.resp, cfg);
  if (full.loglik() < restricted.loglik() - kMonotoneSlack * (1.0 + std::abs(restricted.loglik())))
    throw DominanceViolationError("VVV fit fell below the " + model.name() +
                                  " fit it was started from");
  return {std::move(restricted), std::move(full)};
}

std::vector<FitResult> fit_hierarchy(const DataMatrix& data, int k, const FitConfig& cfg) {
  std::vector<std::optional<FitResult>> fits(kGeneralFamily.size());
  auto at = [&](const ModelId& m) -> std::optional<FitResult>& {
    return fits[static_cast<std::size_t>(family_index(m))];
  };

  // Offer `m` one extra EM run from the given posteriors; keep it on improvement.
  auto offer = [&](const ModelId& m, const Responsibilities& init) {
    try {
      FitResult r = fit(data, m, init, cfg);
      std::optional<FitResult>& slot = at(m);
      if (!slot || r.loglik() > slot->loglik()) slot = std::move(r);
    } catch (const NumericError&) {
    }
  };

  // Each model with its immediate sub-models, in a topological order.
  const std::array<std::pair<ModelId, std::vector<ModelId>>, 8> lattice = {{
      {kEEE, {}},
      {kVEE, {kEEE}},
      {kEVE, {kEEE}},
      {kEEV, {kEEE}},
      {kVVE, {kVEE, kEVE}},
      {kVEV, {kVEE, kEEV}},
      {kEVV, {kEVE, kEEV}},
      {kVVV, {kVVE, kVEV, kEVV}},
  }};

  // Upward sweep: random starts plus the posteriors of every immediate
  // sub-model, so each child can only land at or above its parents.
  for (const auto& [m, parents] : lattice) {
    std::exception_ptr last_error;
    try {
      at(m) = fit_multistart(data, m, k, cfg);
    } catch (const NumericError&) {
      last_error = std::current_exception();
    }
    for (const ModelId& q : parents)
      if (at(q)) offer(m, at(q)->resp);
    if (!at(m)) std::rethrow_exception(last_error);
  }

  // Downward sweep: richer models often sit in basins the restricted fits
  // missed, so hand every model the posteriors of its richer neighbours.
  for (auto it = lattice.rbegin(); it != lattice.rend(); ++it)
    for (const ModelId& q : it->second) offer(q, at(it->first)->resp);

  // Final upward sweep restores the nesting guarantee against any parent the
  // downward sweep improved.
  for (const auto& [m, parents] : lattice)
    for (const ModelId& q : parents) offer(m, at(q)->resp);

  std::vector<FitResult> out;
  out.reserve(fits.size());
  for (std::optional<FitResult>& f : fits) out.push_back(std::move(*f));
  return out;
}

}  // namespace gpcm
