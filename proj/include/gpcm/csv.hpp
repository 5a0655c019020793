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

#include <iosfwd>
#include <string>
#include <vector>

#include "gpcm/types.hpp"

namespace gpcm {

/// A parsed observation file: the numeric block, optional row labels from a
/// trailing string column, and the numeric column names (synthesized x1..xp
/// when the file has no header).
struct Dataset {
  Matrix values;
  std::vector<std::string> labels;   // empty when no label column
  std::vector<std::string> columns;  // one name per numeric column

  DataMatrix data() const { return DataMatrix(values); }
};

/// Comma-separated values, one observation per row.  A header row is
/// detected when any non-final cell of the first row is not numeric.  A
/// trailing label column is detected when any data row's final cell is not
/// numeric.  Everything else must parse as a number; failures carry
/// line/column diagnostics in a CsvError.
Dataset parse_csv(std::istream& in, const std::string& source);

Dataset load_csv(const std::string& path);

}  // namespace gpcm
