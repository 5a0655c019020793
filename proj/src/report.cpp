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

#include "gpcm/report.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

namespace gpcm {

namespace {

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json optional_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

const char* method_name(TestMethod m) {
  return m == TestMethod::Chi2 ? "chi2" : "bootstrap";
}

}  // namespace

std::vector<int> map_classification(const Responsibilities& z) {
  std::vector<int> classes(static_cast<std::size_t>(z.n()));
  for (int i = 0; i < z.n(); ++i) {
    Eigen::Index best = 0;
    z.values().row(i).maxCoeff(&best);
    classes[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return classes;
}

int misallocation_count(const std::vector<int>& classes, int k,
                        const std::vector<std::string>& labels) {
  if (labels.size() != classes.size())
    throw ValidationError("misallocation count: labels do not match classification length");
  std::map<std::string, int> label_ids;
  std::vector<int> label_of(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    label_of[i] =
        label_ids.emplace(labels[i], static_cast<int>(label_ids.size())).first->second;
  }
  const int g = static_cast<int>(label_ids.size());

  std::vector<std::vector<long>> counts(static_cast<std::size_t>(k),
                                        std::vector<long>(static_cast<std::size_t>(g), 0));
  for (std::size_t i = 0; i < classes.size(); ++i)
    ++counts[static_cast<std::size_t>(classes[i])][static_cast<std::size_t>(label_of[i])];

  // Exhaustive matching over the larger index set; k and g stay single-digit
  // in every supported workflow.
  const bool labels_fewer = g <= k;
  const int big = labels_fewer ? k : g;
  const int small = labels_fewer ? g : k;
  std::vector<int> perm(static_cast<std::size_t>(big));
  std::iota(perm.begin(), perm.end(), 0);
  long best = 0;
  do {
    long agree = 0;
    for (int s = 0; s < small; ++s) {
      const int j = labels_fewer ? perm[static_cast<std::size_t>(s)] : s;
      const int l = labels_fewer ? s : perm[static_cast<std::size_t>(s)];
      agree += counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
    }
    best = std::max(best, agree);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<int>(classes.size()) - static_cast<int>(best);
}

Json fit_report(const FitResult& fit, const std::vector<std::string>& labels) {
  const MixtureParams& par = fit.params;
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "fit";
  doc["model"] = par.model.name();
  doc["n"] = fit.resp.n();
  doc["p"] = par.dim();
  doc["k"] = par.components();
  doc["eta"] = total_params(par.model, par.dim(), par.components());
  doc["loglik"] = fit.loglik();
  doc["twice_loglik"] = 2.0 * fit.loglik();
  doc["iterations"] = fit.iterations;
  doc["converged"] = fit.converged;
  doc["weights"] = vector_json(par.weights);
  doc["means"] = matrix_json(par.means);
  Json comps = Json::array();
  for (int j = 0; j < par.components(); ++j) {
    Json c;
    c["lambda"] = par.lambda(j);
    c["shape"] = vector_json(par.shape(j));
    c["orientation"] = matrix_json(par.orientation(j));
    comps.push_back(std::move(c));
  }
  doc["components"] = std::move(comps);
  const std::vector<int> classes = map_classification(fit.resp);
  doc["classification"] = classes;
  if (!labels.empty())
    doc["misallocations"] = misallocation_count(classes, par.components(), labels);
  return doc;
}

Json closed_test_report(const ClosedTestReport& report) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "closed-test";
  doc["method"] = method_name(report.method);
  doc["alpha"] = report.alpha;
  if (report.method == TestMethod::Bootstrap) {
    doc["R"] = report.R;
    doc["seed"] = report.seed;
  }
  doc["n"] = report.n;
  doc["p"] = report.p;
  doc["k"] = report.k;
  Json rows = Json::array();
  for (const ClosedTestRow& row : report.rows) {
    Json r;
    r["model"] = row.model.name();
    r["eta"] = row.eta;
    r["df"] = row.df;
    r["twice_loglik"] = 2.0 * row.loglik;
    r["lr"] = optional_json(row.lr);
    r["p"] = optional_json(row.p_raw);
    r["q"] = optional_json(row.q);
    if (report.method == TestMethod::Bootstrap && row.boot_valid) {
      r["boot_exceed"] = *row.boot_exceed;
      r["boot_valid"] = *row.boot_valid;
    }
    rows.push_back(std::move(r));
  }
  doc["models"] = std::move(rows);
  doc["retained"] = report.retained.name();
  return doc;
}

Json ic_report(const IcTable& table, int n) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "ic";
  doc["n"] = n;
  Json rows = Json::array();
  for (const IcRow& row : table.rows) {
    Json r;
    r["model"] = row.model.name();
    r["eta"] = row.eta;
    r["twice_loglik"] = row.twice_loglik;
    for (int c = 0; c < 8; ++c) r[kCriterionNames[static_cast<std::size_t>(c)]] =
        optional_json(row.values.at(c));
    rows.push_back(std::move(r));
  }
  doc["models"] = std::move(rows);
  Json best;
  for (int c = 0; c < 8; ++c) {
    const int idx = table.best[static_cast<std::size_t>(c)];
    best[kCriterionNames[static_cast<std::size_t>(c)]] =
        idx >= 0 ? Json(table.rows[static_cast<std::size_t>(idx)].model.name()) : Json(nullptr);
  }
  doc["best"] = std::move(best);
  return doc;
}

Json sdf_report(const SdfResult& result, const ModelId& model, int n, double overlap, int reps,
                TestMethod method, int R, std::uint64_t seed) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "simulate";
  doc["model"] = model.name();
  doc["n"] = n;
  doc["overlap"] = overlap;
  doc["reps"] = reps;
  doc["method"] = method_name(method);
  if (method == TestMethod::Bootstrap) doc["R"] = R;
  doc["seed"] = seed;
  doc["failures"] = result.failures;
  doc["ks"] = result.ks ? Json(*result.ks) : Json(nullptr);
  doc["pvalues"] = result.pvalues;
  return doc;
}

std::string closed_test_table(const ClosedTestReport& report) {
  std::ostringstream out;
  out << "closed LR test (" << method_name(report.method) << ", alpha=" << report.alpha;
  if (report.method == TestMethod::Bootstrap) out << ", R=" << report.R;
  out << ")\n";
  out << std::setw(6) << "model" << std::setw(6) << "eta" << std::setw(6) << "df"
      << std::setw(12) << "2*loglik" << std::setw(10) << "LR" << std::setw(10) << "p"
      << std::setw(10) << "q" << '\n';
  out << std::fixed;
  for (const ClosedTestRow& row : report.rows) {
    out << std::setw(6) << row.model.name() << std::setw(6) << row.eta << std::setw(6)
        << row.df << std::setw(12) << std::setprecision(2) << 2.0 * row.loglik;
    if (row.lr)
      out << std::setw(10) << std::setprecision(3) << *row.lr;
    else
      out << std::setw(10) << "-";
    if (row.p_raw)
      out << std::setw(10) << std::setprecision(5) << *row.p_raw;
    else
      out << std::setw(10) << "-";
    if (row.q)
      out << std::setw(10) << std::setprecision(5) << *row.q;
    else
      out << std::setw(10) << "-";
    out << '\n';
  }
  out << "retained model: " << report.retained.name() << '\n';
  return out.str();
}

}  // namespace gpcm
