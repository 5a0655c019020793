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

#include "gpcm/mstep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

namespace gpcm {

namespace {

struct Eig {
  Vector values;   // decreasing
  Matrix vectors;  // columns match values, signs fixed
};

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

Eig eig_desc(const Matrix& w, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (w + w.transpose()));
  if (eig.info() != Eigen::Success)
    throw DegenerateScatterError(what + ": eigenvalue iteration failed");
  Eig out{eig.eigenvalues().reverse(), eig.eigenvectors().rowwise().reverse()};
  fix_column_signs(out.vectors);
  return out;
}

// Geometric mean of a positive vector; throws when any entry is too small
// relative to the largest, which is how rank deficiency shows up here.
double geo_mean(const Vector& v, const std::string& what) {
  const double top = v.maxCoeff();
  if (!(top > 0.0) || v.minCoeff() <= 1e-12 * top)
    throw DegenerateScatterError(what + ": scatter matrix is numerically rank deficient");
  return std::exp(v.array().log().mean());
}

void check_stats(const SufficientStats& stats) {
  const int k = stats.k();
  const int p = stats.p();
  if (k < 1 || p < 1 || static_cast<int>(stats.scatters.size()) != k)
    throw ValidationError("m-step: malformed sufficient statistics");
  for (int j = 0; j < k; ++j) {
    if (stats.scatters[j].rows() != p || stats.scatters[j].cols() != p)
      throw ValidationError("m-step: scatter matrix dimension mismatch");
    if (!(stats.counts[j] > 0.0))
      throw ValidationError("m-step: soft counts must be positive");
  }
}

// tr(W C^-1) through the factors of C.
double trace_quot(const Matrix& w, const Eig& c, const Vector& delta) {
  double t = 0.0;
  for (Eigen::Index l = 0; l < delta.size(); ++l)
    t += c.vectors.col(l).dot(w * c.vectors.col(l)) / delta[l];
  return t;
}

Vector quad_forms_of(const Matrix& w, const Matrix& gamma) {
  Vector b(gamma.cols());
  const Matrix wg = w * gamma;
  for (Eigen::Index l = 0; l < gamma.cols(); ++l) b[l] = gamma.col(l).dot(wg.col(l));
  return b;
}

bool tiny_decrease(double before, double now, double tol) {
  return before - now <= tol * (1.0 + std::abs(before));
}

CovarianceSet mstep_vvv(const SufficientStats& s) {
  CovarianceSet out;
  for (int j = 0; j < s.k(); ++j) {
    CovarianceFactors f;
    try {
      f = decompose_covariance(s.scatters[j] / s.counts[j]);
    } catch (const DecompositionError& e) {
      throw DegenerateScatterError("VVV m-step, component " + std::to_string(j) + ": " +
                                   e.what());
    }
    out.lambdas.push_back(f.lambda);
    out.shapes.push_back(std::move(f.shape));
    out.orientations.push_back(std::move(f.orientation));
  }
  return out;
}

CovarianceSet mstep_eee(const SufficientStats& s) {
  Matrix pooled = Matrix::Zero(s.p(), s.p());
  for (const Matrix& w : s.scatters) pooled += w;
  CovarianceFactors f;
  try {
    f = decompose_covariance(pooled / s.n);
  } catch (const DecompositionError& e) {
    throw DegenerateScatterError(std::string("EEE m-step: ") + e.what());
  }
  return {{f.lambda}, {std::move(f.shape)}, {std::move(f.orientation)}};
}

CovarianceSet mstep_eev(const SufficientStats& s) {
  const int p = s.p();
  Vector a = Vector::Zero(p);
  CovarianceSet out;
  for (int j = 0; j < s.k(); ++j) {
    Eig e = eig_desc(s.scatters[j], "EEV m-step");
    a += e.values;
    out.orientations.push_back(std::move(e.vectors));
  }
  const double gm = geo_mean(a, "EEV m-step");
  out.lambdas = {gm / s.n};
  out.shapes = {a / gm};
  return out;
}

CovarianceSet mstep_evv(const SufficientStats& s) {
  CovarianceSet out;
  double lambda_sum = 0.0;
  for (int j = 0; j < s.k(); ++j) {
    Eig e = eig_desc(s.scatters[j], "EVV m-step");
    const double gm = geo_mean(e.values, "EVV m-step");
    lambda_sum += gm;
    out.shapes.push_back(e.values / gm);
    out.orientations.push_back(std::move(e.vectors));
  }
  out.lambdas = {lambda_sum / s.n};
  return out;
}

// Common shape-orientation block C = Gamma Delta Gamma' (unit determinant),
// per-component volumes.  Alternates the exact conditional updates
//   C = S / |S|^(1/p) with S = sum_j W_j / lambda_j,
//   lambda_j = tr(W_j C^-1) / (p n_j).
CovarianceSet mstep_vee(const SufficientStats& s, const CovarianceSet* warm,
                        const MStepConfig& cfg) {
  const int p = s.p();
  const int k = s.k();
  std::vector<double> lam(static_cast<std::size_t>(k), 1.0);
  Eig c;
  Vector delta;
  if (warm) {
    for (int j = 0; j < k; ++j) lam[static_cast<std::size_t>(j)] = warm->lambda(j);
    c.vectors = warm->orientation(0);
    delta = warm->shape(0);
  } else {
    Matrix pooled = Matrix::Zero(p, p);
    for (const Matrix& w : s.scatters) pooled += w;
    Eig e = eig_desc(pooled, "VEE m-step");
    const double gm = geo_mean(e.values, "VEE m-step");
    delta = e.values / gm;
    c.vectors = std::move(e.vectors);
    for (int j = 0; j < k; ++j) {
      lam[static_cast<std::size_t>(j)] =
          trace_quot(s.scatters[j], c, delta) / (p * s.counts[j]);
    }
  }

  double f_prev = std::numeric_limits<double>::infinity();
  for (int round = 0; round < cfg.inner_max_iter; ++round) {
    Matrix sm = Matrix::Zero(p, p);
    for (int j = 0; j < k; ++j) sm += s.scatters[j] / lam[static_cast<std::size_t>(j)];
    Eig e = eig_desc(sm, "VEE m-step");
    const double gm = geo_mean(e.values, "VEE m-step");
    delta = e.values / gm;
    c.vectors = std::move(e.vectors);
    double f = 0.0;
    for (int j = 0; j < k; ++j) {
      const double t = trace_quot(s.scatters[j], c, delta);
      if (!(t > 0.0)) throw DegenerateScatterError("VEE m-step: vanishing scatter trace");
      lam[static_cast<std::size_t>(j)] = t / (p * s.counts[j]);
      f += p * s.counts[j] * (1.0 + std::log(lam[static_cast<std::size_t>(j)]));
    }
    if (tiny_decrease(f_prev, f, cfg.inner_tol)) break;
    f_prev = f;
  }
  CovarianceSet out;
  out.lambdas = std::move(lam);
  out.shapes = {std::move(delta)};
  out.orientations = {std::move(c.vectors)};
  return out;
}

// Per-component orientation and volume, common shape.  The optimal
// orientation for component j is always the eigenvector basis of W_j (largest
// eigenvalue first), so only lambda_j and Delta alternate:
//   lambda_j = sum_l omega_jl / delta_l / (p n_j),
//   Delta  proportional to  diag(sum_j Omega_j / lambda_j), unit determinant.
CovarianceSet mstep_vev(const SufficientStats& s, const CovarianceSet* warm,
                        const MStepConfig& cfg) {
  const int p = s.p();
  const int k = s.k();
  std::vector<Vector> omega(static_cast<std::size_t>(k));
  CovarianceSet out;
  for (int j = 0; j < k; ++j) {
    Eig e = eig_desc(s.scatters[j], "VEV m-step");
    omega[static_cast<std::size_t>(j)] = std::move(e.values);
    out.orientations.push_back(std::move(e.vectors));
  }

  Vector delta;
  if (warm) {
    delta = warm->shape(0);
  } else {
    Vector acc = Vector::Zero(p);
    for (const Vector& o : omega) acc += o;
    delta = acc / geo_mean(acc, "VEV m-step");
  }

  std::vector<double> lam(static_cast<std::size_t>(k), 1.0);
  double f_prev = std::numeric_limits<double>::infinity();
  for (int round = 0; round < cfg.inner_max_iter; ++round) {
    for (int j = 0; j < k; ++j) {
      const double t = (omega[static_cast<std::size_t>(j)].array() / delta.array()).sum();
      if (!(t > 0.0)) throw DegenerateScatterError("VEV m-step: vanishing scatter trace");
      lam[static_cast<std::size_t>(j)] = t / (p * s.counts[j]);
    }
    Vector acc = Vector::Zero(p);
    for (int j = 0; j < k; ++j)
      acc += omega[static_cast<std::size_t>(j)] / lam[static_cast<std::size_t>(j)];
    delta = acc / geo_mean(acc, "VEV m-step");
    double f = 0.0;
    for (int j = 0; j < k; ++j) {
      f += (omega[static_cast<std::size_t>(j)].array() / delta.array()).sum() /
               lam[static_cast<std::size_t>(j)] +
           p * s.counts[j] * std::log(lam[static_cast<std::size_t>(j)]);
    }
    if (tiny_decrease(f_prev, f, cfg.inner_tol)) break;
    f_prev = f;
  }
  // One more volume refresh so the returned factors are mutually consistent.
  for (int j = 0; j < k; ++j)
    lam[static_cast<std::size_t>(j)] =
        (omega[static_cast<std::size_t>(j)].array() / delta.array()).sum() / (p * s.counts[j]);
  out.lambdas = std::move(lam);
  out.shapes = {std::move(delta)};
  return out;
}

// Profiled objective for the shared-orientation models EVE and VVE: given the
// orientation, the ordered shape solve per component is closed form, so
// orientation candidates can be scored by the exact inner minimum.  For the
// common-volume variant the volume is profiled out analytically as well.
struct SharedOrientationProblem {
  const SufficientStats& s;
  bool common_volume;  // true for EVE, false for VVE
  const char* what;

  double value_from_quads(const std::vector<Vector>& bs) const {
    double f = 0.0;
    double g = 0.0;
    for (int j = 0; j < s.k(); ++j) {
      const Vector& b = bs[static_cast<std::size_t>(j)];
      const Vector z = ordered_eigenvalue_solve(b, s.counts[j], common_volume);
      const double e = (b.array() * (-z.array()).exp()).sum();
      if (common_volume)
        g += e;
      else
        f += e + s.counts[j] * z.sum();
    }
    if (common_volume) {
      const double np = static_cast<double>(s.n) * s.p();
      f = np * (1.0 + std::log(g / np));
    }
    return f;
  }

  std::vector<Vector> quads(const Matrix& gamma) const {
    std::vector<Vector> bs(static_cast<std::size_t>(s.k()));
    for (int j = 0; j < s.k(); ++j)
      bs[static_cast<std::size_t>(j)] = quad_forms_of(s.scatters[j], gamma);
    return bs;
  }

  double value(const Matrix& gamma) const { return value_from_quads(quads(gamma)); }

  // Scaled shape diagonals for the fixed-shape orientation update.
  std::vector<Vector> xis_at(const Matrix& gamma) const {
    std::vector<Vector> out(static_cast<std::size_t>(s.k()));
    double g = 0.0;
    for (int j = 0; j < s.k(); ++j) {
      const Vector b = quad_forms_of(s.scatters[j], gamma);
      const Vector z = ordered_eigenvalue_solve(b, s.counts[j], common_volume);
      if (common_volume) g += (b.array() * (-z.array()).exp()).sum();
      out[static_cast<std::size_t>(j)] = z.array().exp();
    }
    if (common_volume) {
      const double lambda = g / (static_cast<double>(s.n) * s.p());
      for (Vector& x : out) x *= lambda;
    }
    return out;
  }
};

// Plane-rotation descent on the profiled objective.  Rotating one column pair
// moves their quadratic forms along sinusoids in the angle and leaves every
// other column alone, so re-scoring an angle costs one ordered solve per
// component.  A coarse scan of the half turn followed by golden-section
// refinement finds the per-pair minimizer; sweeps repeat until a full pass
// stops improving.  This sees through planes where tied shape entries make
// the fixed-shape update blind: the tie is re-solved at every trial angle.
double polish_orientation(const SharedOrientationProblem& prob, Matrix& gamma, double f,
                          const MStepConfig& cfg) {
  const Eigen::Index p = gamma.cols();
  const int k = prob.s.k();
  std::vector<Vector> bs = prob.quads(gamma);
  std::vector<double> u(static_cast<std::size_t>(k));
  std::vector<double> v(static_cast<std::size_t>(k));
  std::vector<double> w(static_cast<std::size_t>(k));

  auto at_angle = [&](Eigen::Index q, Eigen::Index r, double th) {
    const double c = std::cos(th);
    const double sn = std::sin(th);
    for (int j = 0; j < k; ++j) {
      const std::size_t sj = static_cast<std::size_t>(j);
      const double bq = u[sj] * c * c + 2.0 * w[sj] * c * sn + v[sj] * sn * sn;
      bs[sj][q] = bq;
      bs[sj][r] = u[sj] + v[sj] - bq;  // the pair trace is rotation invariant
    }
    try {
      return prob.value_from_quads(bs);
    } catch (const InvalidProjectionError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  constexpr double kPi = 3.14159265358979323846;
  constexpr int kGrid = 24;
  constexpr double kInvPhi = 0.6180339887498949;
  for (int sweep = 0; sweep < cfg.orientation_max_iter; ++sweep) {
    const double f_start = f;
    for (Eigen::Index q = 0; q + 1 < p; ++q) {
      for (Eigen::Index r = q + 1; r < p; ++r) {
        for (int j = 0; j < k; ++j) {
          const std::size_t sj = static_cast<std::size_t>(j);
          u[sj] = bs[sj][q];
          v[sj] = bs[sj][r];
          w[sj] = gamma.col(q).dot(prob.s.scatters[j] * gamma.col(r));
        }
        double th_best = 0.0;
        double f_best = f;
        for (int g = 0; g < kGrid; ++g) {
          const double th = -0.5 * kPi + (g + 0.5) * kPi / kGrid;
          const double fg = at_angle(q, r, th);
          if (fg < f_best) {
            f_best = fg;
            th_best = th;
          }
        }
        double lo = th_best - kPi / kGrid;
        double hi = th_best + kPi / kGrid;
        double m1 = hi - kInvPhi * (hi - lo);
        double m2 = lo + kInvPhi * (hi - lo);
        double f1 = at_angle(q, r, m1);
        double f2 = at_angle(q, r, m2);
        while (hi - lo > 1e-12) {
          if (f1 <= f2) {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - kInvPhi * (hi - lo);
            f1 = at_angle(q, r, m1);
          } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + kInvPhi * (hi - lo);
            f2 = at_angle(q, r, m2);
          }
        }
        const double th_fine = f1 <= f2 ? m1 : m2;
        const double f_fine = at_angle(q, r, th_fine);
        if (f_fine < f_best) {
          f_best = f_fine;
          th_best = th_fine;
        }
        if (f_best < f) {
          const double c = std::cos(th_best);
          const double sn = std::sin(th_best);
          const Vector gq = gamma.col(q);
          const Vector gr = gamma.col(r);
          gamma.col(q) = c * gq + sn * gr;
          gamma.col(r) = -sn * gq + c * gr;
          at_angle(q, r, th_best);  // leave the quadratic forms at the accepted angle
          f = f_best;
        } else {
          for (int j = 0; j < k; ++j) {
            bs[static_cast<std::size_t>(j)][q] = u[static_cast<std::size_t>(j)];
            bs[static_cast<std::size_t>(j)][r] = v[static_cast<std::size_t>(j)];
          }
        }
      }
    }
    if (f_start - f <= 1e-13 * (1.0 + std::abs(f_start))) break;
  }
  return f;
}

// Bulk descent by alternation (exact shape solve against the fixed-shape
// orientation update), then plane-rotation descent on the profiled objective
// to finish.  Returns the profiled value reached; `gamma` is updated in
// place.
double refine_orientation(const SharedOrientationProblem& prob, Matrix& gamma,
                          const MStepConfig& cfg) {
  double f = prob.value(gamma);
  for (int round = 0; round < cfg.inner_max_iter; ++round) {
    Matrix next = update_common_orientation(prob.s.scatters, prob.xis_at(gamma), gamma, cfg);
    const double fn = prob.value(next);
    if (fn < f) gamma = std::move(next);
    const bool stalled = tiny_decrease(f, fn, cfg.inner_tol);
    f = std::min(f, fn);
    if (stalled) break;
  }
  return polish_orientation(prob, gamma, f, cfg);
}

// Starting bases for the shared-orientation search.  Warm runs stay cheap:
// the previous orientation plus the pooled basis.  Cold runs add every
// per-component eigenbasis, the identity, and a few fixed random rotations in
// case all structured bases share one basin of the profiled objective.
std::vector<Matrix> orientation_candidates(const SufficientStats& s, const CovarianceSet* warm,
                                           const std::string& what) {
  const int p = s.p();
  std::vector<Matrix> out;
  if (warm) out.push_back(warm->orientation(0));
  Matrix pooled = Matrix::Zero(p, p);
  for (const Matrix& w : s.scatters) pooled += w;
  out.push_back(eig_desc(pooled, what).vectors);
  if (warm) return out;
  for (int j = 0; j < s.k(); ++j) out.push_back(eig_desc(s.scatters[j], what).vectors);
  out.push_back(Matrix::Identity(p, p));
  std::mt19937_64 rng(20260814u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < 6; ++t) {
    Matrix m(p, p);
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c) m(r, c) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ();
    const Matrix rm = qr.matrixQR();
    for (int c = 0; c < p; ++c)
      if (rm(c, c) < 0.0) q.col(c) = -q.col(c);
    out.push_back(std::move(q));
  }
  return out;
}

Matrix best_shared_orientation(const SharedOrientationProblem& prob, const CovarianceSet* warm,
                               const MStepConfig& cfg) {
  std::vector<Matrix> cands = orientation_candidates(prob.s, warm, prob.what);
  Matrix best;
  double f_best = std::numeric_limits<double>::infinity();
  std::string last;
  for (Matrix& gamma : cands) {
    try {
      const double f = refine_orientation(prob, gamma, cfg);
      if (f < f_best) {
        f_best = f;
        best = std::move(gamma);
      }
    } catch (const NumericError& e) {
      last = e.what();
    }
  }
  if (!std::isfinite(f_best))
    throw DegenerateScatterError(std::string(prob.what) + ": " +
                                 (last.empty() ? "no usable orientation basis" : last));
  return best;
}

// Common orientation, per-component shape and volume.
CovarianceSet mstep_vve(const SufficientStats& s, const CovarianceSet* warm,
                        const MStepConfig& cfg) {
  const SharedOrientationProblem prob{s, false, "VVE m-step"};
  Matrix gamma = best_shared_orientation(prob, warm, cfg);
  CovarianceSet out;
  for (int j = 0; j < s.k(); ++j) {
    const Vector b = quad_forms_of(s.scatters[j], gamma);
    Vector z;
    try {
      z = ordered_eigenvalue_solve(b, s.counts[j], false);
    } catch (const InvalidProjectionError& e) {
      throw DegenerateScatterError(std::string("VVE m-step: ") + e.what());
    }
    const double m = z.mean();
    out.lambdas.push_back(std::exp(m));
    out.shapes.push_back((z.array() - m).exp());
  }
  out.orientations = {std::move(gamma)};
  return out;
}

// Common orientation and volume, per-component shape.  The unit-determinant
// variant of the ordered solve makes the shape update independent of lambda.
CovarianceSet mstep_eve(const SufficientStats& s, const CovarianceSet* warm,
                        const MStepConfig& cfg) {
  const int p = s.p();
  const SharedOrientationProblem prob{s, true, "EVE m-step"};
  Matrix gamma = best_shared_orientation(prob, warm, cfg);
  CovarianceSet out;
  double num = 0.0;
  for (int j = 0; j < s.k(); ++j) {
    const Vector b = quad_forms_of(s.scatters[j], gamma);
    Vector z;
    try {
      z = ordered_eigenvalue_solve(b, s.counts[j], true);
    } catch (const InvalidProjectionError& e) {
      throw DegenerateScatterError(std::string("EVE m-step: ") + e.what());
    }
    num += (b.array() * (-z.array()).exp()).sum();
    out.shapes.push_back(z.array().exp());
  }
  out.lambdas = {num / (s.n * p)};
  out.orientations = {std::move(gamma)};
  return out;
}

}  // namespace

double mstep_objective(const SufficientStats& stats, const CovarianceSet& cov) {
  check_stats(stats);
  double f = 0.0;
  for (int j = 0; j < stats.k(); ++j) {
    const Vector b = quad_forms_of(stats.scatters[j], cov.orientation(j));
    const Vector& delta = cov.shape(j);
    const double lam = cov.lambda(j);
    f += (b.array() / delta.array()).sum() / lam +
         stats.counts[j] * (stats.p() * std::log(lam) + delta.array().log().sum());
  }
  return f;
}

CovarianceSet mstep_covariances(const ModelId& m, const SufficientStats& stats,
                                const CovarianceSet* warm, const MStepConfig& cfg) {
  check_stats(stats);
  if (m == kVVV) return mstep_vvv(stats);
  if (m == kEEE) return mstep_eee(stats);
  if (m == kEEV) return mstep_eev(stats);
  if (m == kEVV) return mstep_evv(stats);
  if (m == kVEE) return mstep_vee(stats, warm, cfg);
  if (m == kVEV) return mstep_vev(stats, warm, cfg);
  if (m == kVVE) return mstep_vve(stats, warm, cfg);
  return mstep_eve(stats, warm, cfg);
}

std::vector<CovarianceFactors> mstep(const ModelId& m, const SufficientStats& stats,
                                     const std::vector<CovarianceFactors>& warm,
                                     const MStepConfig& cfg) {
  CovarianceSet warm_set;
  const CovarianceSet* wp = nullptr;
  if (!warm.empty()) {
    if (static_cast<int>(warm.size()) != stats.k())
      throw ValidationError("m-step: warm start must carry one factor set per component");
    const bool share_vol = m.volume == Flag::Equal;
    const bool share_shape = m.shape == Flag::Equal;
    const bool share_orient = m.orientation == Flag::Equal;
    for (int j = 0; j < stats.k(); ++j) {
      if (j == 0 || !share_vol) warm_set.lambdas.push_back(warm[static_cast<std::size_t>(j)].lambda);
      if (j == 0 || !share_shape) warm_set.shapes.push_back(warm[static_cast<std::size_t>(j)].shape);
      if (j == 0 || !share_orient)
        warm_set.orientations.push_back(warm[static_cast<std::size_t>(j)].orientation);
    }
    wp = &warm_set;
  }
  const CovarianceSet out = mstep_covariances(m, stats, wp, cfg);
  std::vector<CovarianceFactors> factors;
  factors.reserve(static_cast<std::size_t>(stats.k()));
  for (int j = 0; j < stats.k(); ++j) factors.push_back(out.factors(j));
  return factors;
}

}  // namespace gpcm
