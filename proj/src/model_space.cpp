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

#include "gpcm/model_space.hpp"

#include <algorithm>
#include <cctype>

#include "gpcm/errors.hpp"

namespace gpcm {

namespace {

char flag_char(Flag f) { return f == Flag::Equal ? 'E' : 'V'; }

Flag parse_flag(char c, std::string_view code) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'E':
      return Flag::Equal;
    case 'V':
      return Flag::Variable;
    default:
      throw InvalidModelError("unknown model code '" + std::string(code) +
                              "': each letter must be E or V");
  }
}

}  // namespace

std::string ModelId::name() const {
  return {flag_char(volume), flag_char(shape), flag_char(orientation)};
}

ModelId ModelId::parse(std::string_view code) {
  if (code.size() != 3)
    throw InvalidModelError("unknown model code '" + std::string(code) +
                            "': expected three letters like EEE or VVE");
  return {parse_flag(code[0], code), parse_flag(code[1], code), parse_flag(code[2], code)};
}

int family_index(const ModelId& m) {
  auto it = std::find(kGeneralFamily.begin(), kGeneralFamily.end(), m);
  return static_cast<int>(it - kGeneralFamily.begin());
}

int total_params(const ModelId& m, int p, int k) {
  if (p < 1 || k < 1) throw ValidationError("total_params requires p >= 1 and k >= 1");
  const int per = p * (p - 1) / 2;
  int cov = (m.volume == Flag::Variable ? k : 1);
  cov += (m.shape == Flag::Variable ? k : 1) * (p - 1);
  cov += (m.orientation == Flag::Variable ? k : 1) * per;
  return (k - 1) + k * p + cov;
}

int lr_degrees_of_freedom(const ModelId& m, int p, int k) {
  return total_params(kVVV, p, k) - total_params(m, p, k);
}

std::vector<ModelId> implied_hypotheses(const ModelId& m) {
  if (m == kVVV)
    throw InvalidModelError("VVV is the unconstrained alternative, it implies no null hypotheses");
  std::vector<ModelId> out;
  for (const ModelId& c : kGeneralFamily)
    if (c.nested_in(m)) out.push_back(c);
  return out;
}

}  // namespace gpcm
