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

#include "gpcm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gpcm/parallel.hpp"
#include "gpcm/rng.hpp"

namespace gpcm {

namespace {

double overlap_at_offset(double m, const Matrix& s1, const Matrix& s2) {
  Vector mu1 = Vector::Zero(s1.rows());
  Vector mu2 = Vector::Zero(s1.rows());
  mu2[s1.rows() - 1] = m;
  return bhattacharyya_overlap(mu1, mu2, s1, s2);
}

}  // namespace

CovarianceFactors planar_covariance(double lambda, double delta, double angle) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ValidationError("planar covariance: lambda must be positive");
  if (!(delta > 0.0) || delta > 1.0)
    throw ValidationError("planar covariance: delta must lie in (0, 1]");
  CovarianceFactors f;
  f.lambda = lambda;
  f.shape = Vector(2);
  f.shape << 1.0 / delta, delta;
  f.orientation = Matrix(2, 2);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  f.orientation << c, -s, s, c;
  return f;
}

double bhattacharyya_overlap(const Vector& mu1, const Vector& mu2, const Matrix& s1,
                             const Matrix& s2) {
  const Eigen::Index p = mu1.size();
  if (mu2.size() != p || s1.rows() != p || s1.cols() != p || s2.rows() != p || s2.cols() != p)
    throw ValidationError("overlap: dimension mismatch");
  const Matrix sbar = 0.5 * (s1 + s2);
  const Eigen::LLT<Matrix> llt_bar(sbar);
  const Eigen::LLT<Matrix> llt_1(s1);
  const Eigen::LLT<Matrix> llt_2(s2);
  if (llt_bar.info() != Eigen::Success || llt_1.info() != Eigen::Success ||
      llt_2.info() != Eigen::Success)
    throw DecompositionError("overlap: covariance is not positive definite");
  auto logdet = [](const Eigen::LLT<Matrix>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  };
  const Vector d = mu2 - mu1;
  const double quad = d.dot(llt_bar.solve(d));
  const double bstar = 0.125 * quad + 0.5 * (logdet(llt_bar) - 0.5 * (logdet(llt_1) + logdet(llt_2)));
  return std::exp(-bstar);
}

double solve_mean_offset(double target, const Matrix& s1, const Matrix& s2) {
  if (!(target > 0.0) || !(target < 1.0))
    throw ValidationError("overlap target must lie in (0, 1)");
  const double at_zero = overlap_at_offset(0.0, s1, s2);
  if (target >= at_zero)
    throw UnreachableOverlapError("overlap " + std::to_string(target) +
                                  " is not below the zero-offset overlap " +
                                  std::to_string(at_zero));
  double lo = 0.0;
  double hi = 1.0;
  int guard = 0;
  while (overlap_at_offset(hi, s1, s2) > target) {
    hi *= 2.0;
    if (++guard > 60) throw NumericError("overlap bracket expansion failed");
  }
  // The overlap is strictly decreasing in the offset, so plain bisection
  // converges; stop once the overlap itself is pinned to 1e-10.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double b = overlap_at_offset(mid, s1, s2);
    if (std::abs(b - target) <= 1e-10) return mid;
    (b > target ? lo : hi) = mid;
  }
  throw NumericError("overlap bisection failed to reach tolerance");
}

ScenarioSpec make_scenario(const ModelId& model, int n, double overlap) {
  if (n < 1) throw ValidationError("scenario: n must be positive");
  constexpr double kAngle = std::numbers::pi / 6.0;
  const CovarianceFactors base = planar_covariance(1.0, 0.7, kAngle);
  const CovarianceFactors second =
      planar_covariance(model.volume == Flag::Variable ? 3.0 : 1.0,
                        model.shape == Flag::Variable ? 0.3 : 0.7,
                        model.orientation == Flag::Variable ? kAngle + std::numbers::pi / 4.0
                                                            : kAngle);

  ScenarioSpec spec;
  spec.model = model;
  spec.n = n;
  spec.overlap = overlap;
  spec.offset =
      solve_mean_offset(overlap, compose_covariance(base), compose_covariance(second));

  MixtureParams& par = spec.params;
  par.model = model;
  par.weights = Vector::Constant(2, 0.5);
  par.means = Matrix::Zero(2, 2);
  par.means(1, 1) = spec.offset;
  if (model.volume == Flag::Variable)
    par.lambdas = {base.lambda, second.lambda};
  else
    par.lambdas = {base.lambda};
  if (model.shape == Flag::Variable)
    par.shapes = {base.shape, second.shape};
  else
    par.shapes = {base.shape};
  if (model.orientation == Flag::Variable)
    par.orientations = {base.orientation, second.orientation};
  else
    par.orientations = {base.orientation};
  par.validate();
  return spec;
}

DataMatrix generate_dataset(const ScenarioSpec& spec, std::uint64_t seed,
                            std::vector<int>* labels) {
  auto rng = make_rng(seed);
  return sample_mixture(spec.params, spec.n, rng, labels);
}

double ks_uniform(std::vector<double> values) {
  if (values.empty()) throw ValidationError("KS distance of an empty sample is undefined");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= 0.0) || !(v <= 1.0)) throw ValidationError("KS sample values must lie in [0,1]");
    d = std::max(d, std::max(v - static_cast<double>(i) / n,
                             static_cast<double>(i + 1) / n - v));
  }
  return d;
}

SdfResult pvalue_sdf_experiment(const ModelId& model, int n, double overlap, int reps,
                                TestMethod method, int R, const FitConfig& cfg,
                                std::uint64_t seed, int threads) {
  if (reps < 0) throw ValidationError("sdf experiment: reps must be nonnegative");
  if (model == kVVV) throw ValidationError("sdf experiment: the null model cannot be VVV");
  SdfResult out;
  if (reps == 0) return out;
  const ScenarioSpec spec = make_scenario(model, n, overlap);

  std::vector<double> pvals(static_cast<std::size_t>(reps),
                            std::numeric_limits<double>::quiet_NaN());
  parallel_for(reps, threads, [&](int t) {
    try {
      const DataMatrix data =
          generate_dataset(spec, mix_seed(seed, {static_cast<std::uint64_t>(t)}), nullptr);
      const NestedPair pair = fit_nested_pair(data, model, 2, cfg);
      const double lr = lr_statistic(pair.restricted.loglik(), pair.full.loglik());
      if (method == TestMethod::Chi2) {
        pvals[static_cast<std::size_t>(t)] =
            chi2_pvalue(lr, lr_degrees_of_freedom(model, 2, 2));
      } else {
        const BootstrapNull null = bootstrap_null(
            pair.restricted.params, n, R, cfg,
            mix_seed(seed, {static_cast<std::uint64_t>(t), 0x626f6f74ULL}), 1);
        int exceed = 0;
        int valid = 0;
        for (double x : null.lr) {
          if (std::isnan(x)) continue;
          ++valid;
          if (x >= lr) ++exceed;
        }
        pvals[static_cast<std::size_t>(t)] = (1.0 + exceed) / (valid + 1.0);
      }
    } catch (const NumericError&) {
      // left as NaN and counted below
    }
  });

  for (double p : pvals) {
    if (std::isnan(p))
      ++out.failures;
    else
      out.pvalues.push_back(p);
  }
  std::sort(out.pvalues.begin(), out.pvalues.end());
  if (!out.pvalues.empty()) out.ks = ks_uniform(out.pvalues);
  return out;
}

}  // namespace gpcm
