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

// Access to the frozen fixtures under tests/data.

#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpcm/mstep.hpp"
#include "gpcm/types.hpp"

namespace gpcm::testref {

// Compile-time default (set by CMake) with an environment override.
inline std::string data_dir() {
  if (const char* env = std::getenv("GPCM_TEST_DATA_DIR")) return env;
#ifdef GPCM_TEST_DATA_DIR
  return GPCM_TEST_DATA_DIR;
#else
  return "tests/data";
#endif
}

inline nlohmann::json load_json(const std::string& name) {
  const std::string path = data_dir() + "/" + name;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture " + path);
  return nlohmann::json::parse(in);
}

struct MstepOracleCase {
  int p = 0;
  int k = 0;
  Vector counts;
  std::vector<Matrix> scatters;
  int n = 0;
  double f_eve = 0.0;
  double f_vve = 0.0;
};

inline std::vector<MstepOracleCase> load_mstep_oracle() {
  const nlohmann::json doc = load_json("mstep_oracle.json");
  std::vector<MstepOracleCase> out;
  for (const auto& inst : doc.at("instances")) {
    MstepOracleCase c;
    c.p = inst.at("p").get<int>();
    c.k = inst.at("k").get<int>();
    const auto& counts = inst.at("n");
    c.counts = Vector(static_cast<Eigen::Index>(counts.size()));
    double total = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      c.counts[static_cast<Eigen::Index>(j)] = counts[j].get<double>();
      total += counts[j].get<double>();
    }
    c.n = static_cast<int>(std::lround(total));
    for (const auto& w : inst.at("W")) {
      Matrix m(c.p, c.p);
      for (int r = 0; r < c.p; ++r)
        for (int col = 0; col < c.p; ++col)
          m(r, col) = w[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)].get<double>();
      c.scatters.push_back(std::move(m));
    }
    c.f_eve = inst.at("F_eve").get<double>();
    c.f_vve = inst.at("F_vve").get<double>();
    out.push_back(std::move(c));
  }
  return out;
}

inline SufficientStats stats_of(const MstepOracleCase& c) {
  SufficientStats s;
  s.counts = c.counts;
  s.means = Matrix::Zero(c.k, c.p);
  s.scatters = c.scatters;
  s.n = c.n;
  return s;
}

}  // namespace gpcm::testref
